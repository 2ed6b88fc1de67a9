#pragma once

#include "flatcheck/common.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace flatcheck {

template <class Atom>
struct Monomial {
    BigInt coeff;
    Atom atom;
};

// A linear combination sum(coeff_i * atom_i). `AtomKey` maps an atom to a
// string identity so that equal atoms can be merged.
template <class Atom>
class LinearTerm {
public:
    using value_type = Monomial<Atom>;

    LinearTerm() = default;
    explicit LinearTerm(std::vector<Monomial<Atom>> monomials) : monomials_(std::move(monomials)) {}

    const std::vector<Monomial<Atom>>& monomials() const { return monomials_; }
    bool empty() const { return monomials_.empty(); }
    std::size_t size() const { return monomials_.size(); }
    auto begin() const { return monomials_.begin(); }
    auto end() const { return monomials_.end(); }

    void add(BigInt coeff, Atom atom) { monomials_.push_back({std::move(coeff), std::move(atom)}); }

    LinearTerm negated() const {
        LinearTerm out = *this;
        for (auto& m : out.monomials_) m.coeff = -m.coeff;
        return out;
    }

    // Merges equal atoms (first occurrence order) and drops zero coefficients.
    template <class KeyFn>
    LinearTerm normalized(KeyFn key) const {
        std::vector<Monomial<Atom>> out;
        std::vector<std::string> keys;
        for (const auto& m : monomials_) {
            std::string k = key(m.atom);
            bool merged = false;
            for (std::size_t j = 0; j < keys.size(); ++j) {
                if (keys[j] == k) {
                    out[j].coeff += m.coeff;
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                keys.push_back(std::move(k));
                out.push_back(m);
            }
        }
        std::vector<Monomial<Atom>> kept;
        for (auto& m : out)
            if (m.coeff != 0) kept.push_back(std::move(m));
        return LinearTerm(std::move(kept));
    }

    // Sum of coeff * value(atom).
    template <class ValueFn>
    BigInt evaluate(ValueFn value) const {
        BigInt sum = 0;
        for (const auto& m : monomials_) sum += m.coeff * value(m.atom);
        return sum;
    }

    // Canonical text "2*a - 1*b"; an empty term prints as "0".
    template <class AtomPrinter>
    std::string print(AtomPrinter atom_text) const {
        if (monomials_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& m : monomials_) {
            BigInt c = m.coeff;
            if (first) {
                if (c < 0) {
                    s += "-";
                    c = -c;
                }
            } else {
                s += c < 0 ? " - " : " + ";
                if (c < 0) c = -c;
            }
            s += c.str() + "*" + atom_text(m.atom);
            first = false;
        }
        return s;
    }

private:
    std::vector<Monomial<Atom>> monomials_;
};

// A full constraint `term >= bound`.
template <class Atom>
struct Constraint {
    LinearTerm<Atom> term;
    BigInt bound;

    template <class ValueFn>
    bool holds(ValueFn value) const {
        return term.evaluate(value) >= bound;
    }
};

// The integer equivalent of `term < bound`, i.e. `-term >= -bound + 1`.
template <class Atom>
Constraint<Atom> dual(const Constraint<Atom>& c) {
    return Constraint<Atom>{c.term.negated(), -c.bound + 1};
}

enum class Relation { Ge, Gt, Le, Lt };

// Rewrites `term REL rhs` into the `>=` normal form.
template <class Atom>
Constraint<Atom> normalize_relation(LinearTerm<Atom> term, Relation rel, BigInt rhs) {
    switch (rel) {
        case Relation::Ge: return {std::move(term), std::move(rhs)};
        case Relation::Gt: return {std::move(term), rhs + 1};
        case Relation::Le: return {term.negated(), -rhs};
        case Relation::Lt: return {term.negated(), -rhs + 1};
    }
    return {std::move(term), std::move(rhs)};
}

using CounterTerm = LinearTerm<std::string>;
using CounterConstraint = Constraint<std::string>;

inline std::string print_counter_constraint(const CounterConstraint& c) {
    return c.term.print([](const std::string& n) { return n; }) + " >= " + c.bound.str();
}

}  // namespace flatcheck
