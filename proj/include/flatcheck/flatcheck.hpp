#pragma once

#include "flatcheck/checker.hpp"
#include "flatcheck/common.hpp"
#include "flatcheck/consistency.hpp"
#include "flatcheck/counter_system.hpp"
#include "flatcheck/encoder.hpp"
#include "flatcheck/formula.hpp"
#include "flatcheck/lasso.hpp"
#include "flatcheck/oracle.hpp"
#include "flatcheck/qpa.hpp"
#include "flatcheck/smtlib.hpp"
#include "flatcheck/solver.hpp"
#include "flatcheck/witness.hpp"
