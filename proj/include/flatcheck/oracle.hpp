#pragma once

#include "flatcheck/counter_system.hpp"
#include "flatcheck/formula.hpp"
#include "flatcheck/lasso.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flatcheck {

// Truth of one subformula along a lasso: explicit on [0, p0 + L), then
// repeating with the period length L.
struct TruthVector {
    std::vector<bool> values;
    std::size_t p0 = 0;
    std::size_t L = 1;

    bool at(std::size_t x) const {
        if (x < values.size()) return values[x];
        return values[p0 + (x - p0) % L];
    }
};

// Value in Z ∪ {-inf, +inf}.
struct XInt {
    int kind = -1;  // -1: -inf, 0: finite, 1: +inf
    BigInt v;

    static XInt neg_inf() { return {}; }
    static XInt pos_inf() { return {1, 0}; }
    static XInt fin(BigInt x) { return {0, std::move(x)}; }
    XInt plus(const BigInt& d) const { return kind == 0 ? fin(v + d) : *this; }
    bool ge(const BigInt& b) const { return kind == 1 || (kind == 0 && v >= b); }
    bool less_than(const XInt& o) const {
        if (kind != o.kind) return kind < o.kind;
        return kind == 0 && v < o.v;
    }
};

inline XInt xmax(const XInt& a, const XInt& b) { return a.less_than(b) ? b : a; }

// Number of period copies after which `τ >= b` has constant truth at every
// residue: counter values at residue r in copy p are base_r + p * drift.
inline std::size_t guard_stabilization(const CounterSystem& S, const LassoRun& run, const CounterConstraint& g) {
    BigInt d = S.eval(g.term, run.drift(S));
    std::size_t best = 0;
    if (d == 0) return 0;
    for (const auto& c : run.period) {
        BigInt base = S.eval(g.term, c.valuation);
        BigInt copies;
        if (d > 0) copies = ceil_div(g.bound - base, d);      // true from this copy on
        else copies = floor_div(base - g.bound, -d) + 1;       // false from this copy on
        if (copies > 0 && copies > BigInt(best)) best = static_cast<std::size_t>(copies);
    }
    return best;
}

// Exact CLTL evaluation on a lasso run. The counting interval of
// `χ U[τ >= b] ψ` at i with witness j is [i, j-1].
class CltlEvaluator {
public:
    CltlEvaluator(const CounterSystem& S, const LassoRun& run, std::size_t extra_copies = 0)
        : S_(S), run_(run), extra_(extra_copies) {
        if (run.period.empty()) throw Error("lasso run has an empty period");
    }

    const TruthVector& truth(const Formula& f0) {
        Formula f = is_core_formula(f0) ? f0 : desugar(f0);
        auto it = memo_.find(f->key());
        if (it != memo_.end()) return it->second;
        TruthVector tv = compute(f);
        return memo_.emplace(f->key(), std::move(tv)).first->second;
    }

    bool holds(const Formula& f, std::size_t pos = 0) { return truth(f).at(pos); }

private:
    std::size_t m() const { return run_.prefix.size(); }
    std::size_t L() const { return run_.period.size(); }

    TruthVector make(std::size_t p0, const std::function<bool(std::size_t)>& fn) {
        TruthVector tv;
        tv.p0 = p0;
        tv.L = L();
        tv.values.resize(p0 + L());
        for (std::size_t x = 0; x < tv.values.size(); ++x) tv.values[x] = fn(x);
        return tv;
    }

    TruthVector compute(const Formula& f) {
        switch (f->kind()) {
            case Kind::True: return make(m(), [](std::size_t) { return true; });
            case Kind::Atom:
                return make(m(), [&](std::size_t x) { return S_.labels(run_.state_at(x)).count(f->name()) > 0; });
            case Kind::Guard: {
                const auto& g = f->guard();
                std::size_t p0 = m() + guard_stabilization(S_, run_, g) * L();
                return make(p0, [&](std::size_t x) { return S_.eval(g.term, run_.at(S_, x).valuation) >= g.bound; });
            }
            case Kind::Not: {
                const TruthVector a = truth(f->operand());
                return make(a.p0, [&](std::size_t x) { return !a.at(x); });
            }
            case Kind::And: {
                const TruthVector a = truth(f->lhs());
                const TruthVector b = truth(f->rhs());
                return make(std::max(a.p0, b.p0), [&](std::size_t x) { return a.at(x) && b.at(x); });
            }
            case Kind::Next: {
                const TruthVector a = truth(f->operand());
                return make(a.p0, [&](std::size_t x) { return a.at(x + 1); });
            }
            case Kind::Until: return until(f);
            default: throw Error("unexpected formula kind in evaluation");
        }
    }

    TruthVector until(const Formula& f) {
        const TruthVector chi = truth(f->lhs());
        const TruthVector psi = truth(f->rhs());
        std::vector<std::pair<BigInt, TruthVector>> atoms;
        std::size_t p0 = std::max(chi.p0, psi.p0);
        for (const auto& mono : f->term()) {
            atoms.emplace_back(mono.coeff, truth(mono.atom));
            p0 = std::max(p0, atoms.back().second.p0);
        }
        auto contrib = [&](std::size_t x) {
            BigInt c = 0;
            for (const auto& [a, tv] : atoms)
                if (tv.at(x)) c += a;
            return c;
        };
        std::size_t W = p0 + (2 + extra_) * L();
        // Best witness value from W on. The future from W is periodic.
        bool chi_all = true, psi_any = false;
        BigInt E = 0;
        for (std::size_t x = W; x < W + L(); ++x) {
            chi_all = chi_all && chi.at(x);
            psi_any = psi_any || psi.at(x);
            E += contrib(x);
        }
        XInt best;
        if (chi_all && psi_any && E > 0) {
            best = XInt::pos_inf();
        } else {
            best = XInt::neg_inf();
            for (std::size_t x = W + L(); x-- > W;) best = step(best, x, chi, psi, contrib);
        }
        std::vector<XInt> table(W);
        for (std::size_t x = W; x-- > 0;) {
            best = step(best, x, chi, psi, contrib);
            table[x] = best;
        }
        const BigInt& b = f->bound();
        return make(p0, [&](std::size_t x) { return table[x].ge(b); });
    }

    template <class Contrib>
    static XInt step(const XInt& next, std::size_t x, const TruthVector& chi, const TruthVector& psi, Contrib& contrib) {
        bool c = chi.at(x), p = psi.at(x);
        if (!c && !p) return XInt::neg_inf();
        if (!c) return XInt::fin(0);
        XInt up = next.plus(contrib(x));
        return p ? xmax(up, XInt::fin(0)) : up;
    }

    const CounterSystem& S_;
    const LassoRun& run_;
    std::size_t extra_;
    std::map<std::string, TruthVector> memo_;
};

inline bool eval_cltl(const CounterSystem& S, const LassoRun& run, const Formula& phi, std::size_t extra_copies = 0) {
    CltlEvaluator ev(S, run, extra_copies);
    return ev.holds(phi, 0);
}

// ---- brute-force flat runs -------------------------------------------------------

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Block structure of an enumerated run: rows and loops with their iteration
// count (0 for the final loop).
struct RunShape {
    struct Block {
        std::vector<StateId> states;
        std::size_t iterations = 1;
        bool loop = false;
    };
    std::vector<Block> blocks;

    std::size_t schema_length() const {
        std::size_t n = 0;
        for (const auto& b : blocks) n += b.states.size();
        return n;
    }
};

struct EnumerationLimits {
    std::size_t max_schema_length = 6;
    std::size_t max_iterations = 8;
    std::size_t budget = 2'000'000;  // search nodes
};

namespace detail {

class FlatRunEnumerator {
public:
    using Visitor = std::function<bool(const LassoRun&, const RunShape&)>;

    FlatRunEnumerator(const CounterSystem& S, EnumerationLimits lim, Visitor visit)
        : S_(S), lim_(lim), visit_(std::move(visit)) {}

    // Returns true when the visitor asked to stop.
    bool run() {
        if (S_.num_states() > 8) throw Error("enumeration is limited to systems with at most 8 states");
        if (lim_.max_schema_length > 12) throw Error("enumeration is limited to schema length 12");
        LassoRun r;
        RunShape shape;
        return extend(r, shape, std::nullopt, 0);
    }

private:
    void tick() {
        if (++nodes_ > lim_.budget) throw BudgetExceeded("enumeration budget of " + std::to_string(lim_.budget) + " nodes exceeded");
    }

    // Appends one step into `to` via transition t; false when the guard fails.
    bool push(LassoRun& r, const std::optional<Configuration>& cur, TransitionId t, StateId to) const {
        if (!cur) {
            if (to != S_.initial()) return false;
            r.prefix.push_back({to, S_.zero_valuation()});
            return true;
        }
        const Transition& tr = S_.transition(t);
        if (tr.source != cur->state || tr.target != to) return false;
        Valuation v = S_.apply(tr, cur->valuation);
        if (!S_.guards_hold(tr, v)) return false;
        r.steps.push_back(t);
        r.prefix.push_back({to, std::move(v)});
        return true;
    }

    std::vector<std::pair<TransitionId, StateId>> moves(const std::optional<Configuration>& cur) const {
        std::vector<std::pair<TransitionId, StateId>> out;
        if (!cur) {
            out.push_back({0, S_.initial()});
            return out;
        }
        for (const auto& t : S_.transitions())
            if (t.source == cur->state) out.push_back({t.id, t.target});
        return out;
    }

    bool extend(LassoRun& r, RunShape& shape, std::optional<Configuration> cur, std::size_t used) {
        tick();
        std::size_t room = lim_.max_schema_length - used;
        if (room == 0) return false;
        // a row
        for (const auto& [t, s] : moves(cur)) {
            LassoRun r2 = r;
            if (!push(r2, cur, t, s)) continue;
            shape.blocks.push_back({{s}, 1, false});
            bool stop = extend(r2, shape, r2.prefix.back(), used + 1);
            shape.blocks.pop_back();
            if (stop) return true;
        }
        // loops whose body starts with a move from `cur`
        std::vector<std::pair<TransitionId, StateId>> body;
        for (const auto& first : moves(cur)) {
            body.assign(1, first);
            if (loop_bodies(r, shape, cur, used, body)) return true;
        }
        return false;
    }

    // body = (entry transition, state) pairs; tries every closing transition.
    bool loop_bodies(LassoRun& r, RunShape& shape, const std::optional<Configuration>& cur, std::size_t used,
                     std::vector<std::pair<TransitionId, StateId>>& body) {
        tick();
        StateId head = body.front().second, tail = body.back().second;
        for (const auto& t : S_.transitions()) {
            if (t.source != tail || t.target != head) continue;
            if (close_loop(r, shape, cur, used, body, t.id)) return true;
        }
        if (used + body.size() < lim_.max_schema_length) {
            for (const auto& t : S_.transitions()) {
                if (t.source != tail) continue;
                body.push_back({t.id, t.target});
                bool stop = loop_bodies(r, shape, cur, used, body);
                body.pop_back();
                if (stop) return true;
            }
        }
        return false;
    }

    bool close_loop(LassoRun& r, RunShape& shape, const std::optional<Configuration>& cur, std::size_t used,
                    const std::vector<std::pair<TransitionId, StateId>>& body, TransitionId back) {
        std::vector<StateId> states;
        for (const auto& [t, s] : body) states.push_back(s);
        // final loop, iterated forever
        {
            LassoRun r2 = r;
            std::optional<Configuration> c = cur;
            bool ok = true;
            for (const auto& [t, s] : body) {
                if (!push(r2, c, t, s)) {
                    ok = false;
                    break;
                }
                c = r2.prefix.back();
            }
            if (ok) {
                std::size_t start = r2.prefix.size() - body.size();
                LassoRun lasso;
                lasso.prefix.assign(r2.prefix.begin(), r2.prefix.begin() + static_cast<long>(start));
                lasso.period.assign(r2.prefix.begin() + static_cast<long>(start), r2.prefix.end());
                lasso.steps = r2.steps;
                lasso.steps.push_back(back);
                if (is_run(S_, lasso)) {
                    shape.blocks.push_back({states, 0, true});
                    bool stop = visit_(lasso, shape);
                    shape.blocks.pop_back();
                    if (stop) return true;
                }
            }
        }
        // non-final loop, k >= 2 iterations
        LassoRun r2 = r;
        std::optional<Configuration> c = cur;
        for (std::size_t k = 1; k <= lim_.max_iterations; ++k) {
            tick();
            bool ok = true;
            for (std::size_t q = 0; q < body.size(); ++q) {
                TransitionId t = (q == 0 && k > 1) ? back : body[q].first;
                if (!push(r2, c, t, body[q].second)) {
                    ok = false;
                    break;
                }
                c = r2.prefix.back();
            }
            if (!ok) break;
            if (k < 2) continue;
            shape.blocks.push_back({states, k, true});
            bool stop = extend(r2, shape, c, used + body.size());
            shape.blocks.pop_back();
            if (stop) return true;
        }
        return false;
    }

    const CounterSystem& S_;
    EnumerationLimits lim_;
    Visitor visit_;
    std::size_t nodes_ = 0;
};

}  // namespace detail

// Visits every lasso run u0 v0^k0 ... um vm^ω of S with |u0 v0 ... um vm| within
// the limits and 2 <= k_i <= max_iterations. Stops when the visitor returns true.
inline bool for_each_flat_run(const CounterSystem& S, EnumerationLimits lim,
                              const std::function<bool(const LassoRun&, const RunShape&)>& visit) {
    return detail::FlatRunEnumerator(S, lim, visit).run();
}

inline std::optional<LassoRun> enumerate_flat_witness(const CounterSystem& S, std::size_t max_schema_length,
                                                      std::size_t max_iterations, const Formula& phi,
                                                      std::size_t budget = 2'000'000) {
    Formula core = is_core_formula(phi) ? phi : desugar(phi);
    std::optional<LassoRun> found;
    EnumerationLimits lim{max_schema_length, max_iterations, budget};
    for_each_flat_run(S, lim, [&](const LassoRun& run, const RunShape&) {
        if (!eval_cltl(S, run, core)) return false;
        found = run;
        return true;
    });
    return found;
}

// ---- flat-approximation membership ------------------------------------------------

// Smallest schema cost of writing `w` as u0 v0^k0 ... (rows cost 1, a repeated
// block costs its length).
inline std::size_t decomposition_cost(const std::vector<StateId>& w) {
    std::size_t t = w.size();
    std::vector<std::size_t> dp(t + 1, 0);
    for (std::size_t j = 1; j <= t; ++j) {
        dp[j] = dp[j - 1] + 1;
        for (std::size_t len = 1; 2 * len <= j; ++len) {
            // v = w[j-len, j); count repetitions ending at j
            std::size_t k = 1;
            while ((k + 1) * len <= j) {
                bool same = true;
                for (std::size_t q = 0; q < len && same; ++q) same = w[j - (k + 1) * len + q] == w[j - len + q];
                if (!same) break;
                ++k;
                dp[j] = std::min(dp[j], dp[j - k * len] + len);
            }
        }
    }
    return dp[t];
}

// Whether prefix · period^ω lies in the flat approximation of depth n.
inline bool fa_member(const std::vector<StateId>& prefix, const std::vector<StateId>& period, std::size_t n) {
    if (period.empty()) return false;
    std::size_t L = period.size(), rho = L;
    for (std::size_t d = 1; d <= L; ++d) {
        if (L % d) continue;
        bool ok = true;
        for (std::size_t q = 0; q < L && ok; ++q) ok = period[q] == period[q % d];
        if (ok) {
            rho = d;
            break;
        }
    }
    std::vector<StateId> w = prefix;
    auto letter = [&](std::size_t x) { return x < prefix.size() ? prefix[x] : period[(x - prefix.size()) % L]; };
    std::size_t tmin = prefix.size();
    while (tmin > 0 && letter(tmin - 1) == letter(tmin - 1 + rho)) --tmin;
    if (rho > n) return false;
    for (std::size_t t = tmin; t <= tmin + (n + 1) * rho; ++t) {
        std::vector<StateId> x;
        for (std::size_t q = 0; q < t; ++q) x.push_back(letter(q));
        if (decomposition_cost(x) + rho <= n) return true;
    }
    return false;
}

inline bool fa_member(const LassoRun& run, std::size_t n) {
    std::vector<StateId> p, q;
    for (const auto& c : run.prefix) p.push_back(c.state);
    for (const auto& c : run.period) q.push_back(c.state);
    return fa_member(p, q, n);
}

}  // namespace flatcheck
