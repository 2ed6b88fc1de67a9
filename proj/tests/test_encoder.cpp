#include "flatcheck/encoder.hpp"
#include "flatcheck/oracle.hpp"
#include "flatcheck/smtlib.hpp"
#include "flatcheck/solver.hpp"
#include "support/random_gen.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace flatcheck;

namespace {

CounterSystem load(const std::string& name) {
    std::ifstream f(std::string(FLATCHECK_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_dot(ss.str());
}

std::set<std::string> referenced(const QpaScript& s) {
    std::set<std::string> out;
    for (const auto& a : s.assertions()) {
        std::vector<std::string> vs;
        collect_vars(a.expr, vs);
        out.insert(vs.begin(), vs.end());
    }
    return out;
}

}  // namespace

TEST(Encoder, DeclarationCountMatchesClosedForm) {
    fctest::Rng rng(41);
    for (int k = 0; k < 60; ++k) {
        CounterSystem S = fctest::random_system(rng);
        Formula phi = fctest::random_formula(rng, fctest::shape_for(S));
        std::size_t n = static_cast<std::size_t>(fctest::uniform(rng, 2, 9));
        Encoding e = encode_fmc(S, phi, n);
        EXPECT_EQ(e.script.declarations().size(), predicted_declarations(S, phi, n)) << phi->key();
    }
}

TEST(Encoder, EveryDeclarationIsConstrained) {
    fctest::Rng rng(42);
    for (int k = 0; k < 40; ++k) {
        CounterSystem S = fctest::random_system(rng);
        Formula phi = fctest::random_formula(rng, fctest::shape_for(S));
        Encoding e = encode_fmc(S, phi, 5);
        auto used = referenced(e.script);
        for (const auto& d : e.script.declarations()) EXPECT_TRUE(used.count(d.name)) << d.name << " in " << phi->key();
    }
}

TEST(Encoder, AssertionsAreLinearAndDeterministic) {
    fctest::Rng rng(43);
    for (int k = 0; k < 30; ++k) {
        CounterSystem S = fctest::random_system(rng);
        Formula phi = fctest::random_formula(rng, fctest::shape_for(S));
        Encoding a = encode_fmc(S, phi, 6), b = encode_fmc(S, phi, 6);
        for (const auto& x : a.script.assertions()) ASSERT_TRUE(is_linear(x.expr)) << x.family;
        EXPECT_EQ(emit_smtlib(a.script), emit_smtlib(b.script));
    }
}

TEST(Encoder, EachSubformulaHasOneConsistencyFamily) {
    Formula phi = parse_formula("(X a & !(x >= 2)) U[2*a - 1*b >= 1] F c");
    CounterSystem S = load("two_loops.dot");
    Encoding e = encode_fmc(S, phi, 4);
    std::map<std::size_t, std::set<std::string>> families;
    for (const auto& a : e.script.assertions()) {
        auto colon = a.family.find(':');
        if (colon == std::string::npos) continue;
        std::string kind = a.family.substr(0, colon);
        std::size_t rest = colon + 1;
        std::size_t j = std::stoul(a.family.substr(rest));
        families[j].insert(kind);
    }
    for (std::size_t j = 0; j < e.closure.size(); ++j) {
        Kind k = e.closure[j]->kind();
        if (k == Kind::True || k == Kind::Atom) {
            EXPECT_FALSE(families.count(j)) << e.closure[j]->key();
            continue;
        }
        ASSERT_EQ(families[j].size(), 1u) << e.closure[j]->key();
        std::string want = k == Kind::Not ? "consistencyNeg" : k == Kind::And ? "consistencyAnd" : k == Kind::Guard ? "consistencyCstr"
                           : k == Kind::Next ? "consistencyX" : "consistencyU";
        EXPECT_EQ(*families[j].begin(), want);
    }
}

TEST(Encoder, NegationBiconditionalPerPosition) {
    CounterSystem S = load("sys_b.dot");
    Encoding e = encode_fmc(S, parse_formula("!p"), 5);
    std::size_t j = e.closure.index_of(e.phi), a = e.closure.index_of(f_atom("p"));
    std::size_t count = 0;
    for (const auto& x : e.script.assertions()) {
        if (x.family != "consistencyNeg:" + std::to_string(j)) continue;
        // (lbl_i_j <-> !lbl_i_a) for every i: check on all four assignments
        std::vector<std::string> vs;
        collect_vars(x.expr, vs);
        std::set<std::string> names(vs.begin(), vs.end());
        ASSERT_EQ(names.size(), 2u);
        std::string i = std::to_string(count);
        EXPECT_TRUE(names.count("lbl_" + i + "_" + std::to_string(j)));
        EXPECT_TRUE(names.count("lbl_" + i + "_" + std::to_string(a)));
        for (int m = 0; m < 4; ++m) {
            Model model{{"lbl_" + i + "_" + std::to_string(j), Value::of(bool(m & 1))},
                        {"lbl_" + i + "_" + std::to_string(a), Value::of(bool(m & 2))}};
            EXPECT_EQ(evaluate(x.expr, model).truth, bool(m & 1) != bool(m & 2));
        }
        ++count;
    }
    EXPECT_EQ(count, 5u);
}

TEST(Encoder, RejectsBadInputs) {
    CounterSystem S = load("sys_a.dot");
    EXPECT_THROW(encode_fmc(S, parse_formula("p"), 1), Error);
    EXPECT_THROW(encode_fmc(S, parse_formula("F (e >= 1)"), 3), Error);
}

TEST(Encoder, FalseIsUnsatAtEveryDepth) {
    CounterSystem S = load("sys_b.dot");
    for (std::size_t n : {2, 3, 5, 8}) EXPECT_EQ(check(encode_fmc(S, parse_formula("!true"), n).script, {}).status, Status::Unsat);
}

TEST(Encoder, MetadataAndVariableNames) {
    CounterSystem S = load("sys_a.dot");
    Encoding e = encode_fmc(S, parse_formula("F (c >= 3)"), 4);
    EXPECT_EQ(e.script.metadata().at("n"), "4");
    EXPECT_EQ(e.script.metadata().at("formula"), e.phi->key());
    for (const char* v : {"typ_0", "org_3", "itr_2", "tf_1", "tb_0", "valFst_0_0", "valLst_3_0.k", "valLst_3_0.v"})
        EXPECT_TRUE(e.script.declared(v)) << v;
    EXPECT_FALSE(e.script.declared("tf_0"));
}

TEST(Encoder, SysAWitnessDepth) {
    CounterSystem S = load("sys_a.dot");
    Formula phi = parse_formula("F (c >= 3)");
    // the enumerator finds a witness; the encoding needs depth 4 to express it
    ASSERT_TRUE(enumerate_flat_witness(S, 4, 8, phi).has_value());
    EXPECT_EQ(check(encode_fmc(S, phi, 3).script, {}).status, Status::Unsat);
    SolverVerdict v = check(encode_fmc(S, phi, 4).script, {});
    ASSERT_EQ(v.status, Status::Sat);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(v.model.at("org_" + std::to_string(i)).number, 0);
}

// Growth in n is linear: doubling n doubles the script size up to a small
// constant.
TEST(Encoder, SizeGrowsLinearlyInDepth) {
    fctest::Rng rng(44);
    CounterSystem S = fctest::random_system(rng);
    Formula phi = parse_formula("G (p -> (q U[1*p - 1*q >= 2] !q)) & F (c >= 1)");
    auto size = [&](std::size_t n) { return double(script_size(encode_fmc(S, phi, n).script).total()); };
    for (std::size_t n : {16, 32, 64}) {
        double r = size(2 * n) / size(n);
        EXPECT_GE(r, 1.8);
        EXPECT_LE(r, 2.2);
    }
}
