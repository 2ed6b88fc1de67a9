#pragma once

#include "flatcheck/witness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace flatcheck {

// Copy kinds of the unrolled schema: each non-last loop becomes a front row
// (first iteration), the loop body (middle iterations) and a rear row (last
// iteration).
enum class Copy { Row, Front, Body, Rear, Last };

inline const char* copy_name(Copy c) {
    switch (c) {
        case Copy::Row: return "row";
        case Copy::Front: return "front";
        case Copy::Body: return "body";
        case Copy::Rear: return "rear";
        case Copy::Last: return "last";
    }
    return "?";
}

struct UnrolledPosition {
    std::size_t position = 0;  // schema position
    Copy copy = Copy::Row;
};

inline Copy copy_of(const ApsModel& aps, std::size_t position, std::size_t iteration) {
    const LoopInterval* l = aps.loop_of(position);
    if (!l) return Copy::Row;
    if (l->is_last()) return Copy::Last;
    if (iteration == 0) return Copy::Front;
    if (BigInt(iteration) + 1 == l->iterations) return Copy::Rear;
    return Copy::Body;
}

// Positions of the unrolled schema in order; body copies appear once.
inline std::vector<UnrolledPosition> unroll(const ApsModel& aps) {
    std::vector<UnrolledPosition> out;
    for (std::size_t i = 0; i < aps.n;) {
        const LoopInterval* l = aps.loop_of(i);
        if (!l) {
            out.push_back({i, Copy::Row});
            ++i;
            continue;
        }
        if (l->is_last()) {
            for (std::size_t q = l->begin; q <= l->end; ++q) out.push_back({q, Copy::Last});
        } else {
            std::vector<Copy> copies{Copy::Front};
            if (l->iterations >= 3) copies.push_back(Copy::Body);
            if (l->iterations >= 2) copies.push_back(Copy::Rear);
            for (Copy c : copies)
                for (std::size_t q = l->begin; q <= l->end; ++q) out.push_back({q, c});
        }
        i = l->end + 1;
    }
    return out;
}

// Running value of a counting term from an anchor: values[0] = 0 and
// values[k+1] = values[k] + τ(labels at anchor + k).
struct BalanceTrace {
    std::size_t until = 0;   // closure index
    std::size_t anchor = 0;  // run position
    std::vector<BigInt> values;
};

struct ConsistencyEntry {
    std::size_t position = 0;  // schema position
    Copy copy = Copy::Row;
    std::size_t subformula = 0;
    std::string formula;
    bool labelled = false;
    bool pass = true;
    std::string clause;  // checked (or violated) condition
    std::string detail;
};

struct ConsistencyReport {
    std::vector<ConsistencyEntry> entries;

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
    std::vector<ConsistencyEntry> failures() const {
        std::vector<ConsistencyEntry> out;
        for (const auto& e : entries)
            if (!e.pass) out.push_back(e);
        return out;
    }
};

namespace detail {

class ConsistencyChecker {
public:
    explicit ConsistencyChecker(const ApsModel& aps) : aps_(aps), S_(aps.system), conc_(concretize_mapped(aps)) {
        pol_ = polarity(aps.phi);
        m_ = conc_.run.prefix.size();
        L_ = conc_.run.period.size();
    }

    const Concretization& concretization() const { return conc_; }

    bool label(std::size_t j, std::size_t x) const { return aps_.positions[conc_.position_at(x)].labels[j]; }

    BigInt contribution(const Formula& until, std::size_t x) const {
        BigInt c = 0;
        for (const auto& mono : until->term())
            if (label(aps_.closure.index_of(mono.atom), x)) c += mono.coeff;
        return c;
    }

    BalanceTrace balance_trace(std::size_t j, std::size_t anchor, std::size_t length) const {
        BalanceTrace t{j, anchor, {0}};
        for (std::size_t k = 0; k < length; ++k) t.values.push_back(t.values.back() + contribution(aps_.closure[j], anchor + k));
        return t;
    }

    ConsistencyReport run() {
        ConsistencyReport rep;
        auto unrolled = unroll(aps_);
        for (std::size_t j = 0; j < aps_.closure.size(); ++j) {
            const Formula& f = aps_.closure[j];
            unsigned pol = pol_.count(f->key()) ? pol_.at(f->key()) : (kPositive | kNegative);
            std::vector<XInt> best;
            bool limit = false;
            if (f->kind() == Kind::Until) best = until_table(j, limit);
            for (const auto& u : unrolled) {
                ConsistencyEntry e;
                e.position = u.position;
                e.copy = u.copy;
                e.subformula = j;
                e.formula = f->key();
                e.labelled = aps_.positions[u.position].labels[j];
                for (std::size_t x : occurrences(u)) {
                    check(e, j, f, pol, x, best, limit);
                    if (!e.pass) break;
                }
                rep.entries.push_back(std::move(e));
            }
        }
        return rep;
    }

private:
    // Base-run positions of an unrolled position.
    std::vector<std::size_t> occurrences(const UnrolledPosition& u) const {
        std::vector<std::size_t> out;
        for (std::size_t x = 0; x < conc_.position.size(); ++x)
            if (conc_.position[x] == u.position && copy_of(aps_, u.position, conc_.iteration[x]) == u.copy) out.push_back(x);
        return out;
    }

    void fail(ConsistencyEntry& e, const std::string& clause, const std::string& detail) const {
        e.pass = false;
        e.clause = clause;
        e.detail = detail;
    }

    void check(ConsistencyEntry& e, std::size_t j, const Formula& f, unsigned pol, std::size_t x,
               const std::vector<XInt>& best, bool limit) const {
        bool l = label(j, x);
        bool pos = pol & kPositive, neg = pol & kNegative;
        auto at = [&](std::size_t x0) { return " at run position " + std::to_string(x0); };
        switch (f->kind()) {
            case Kind::True:
                e.clause = "labels";
                if (!l) fail(e, "labels", "true is not labelled" + at(x));
                return;
            case Kind::Atom: {
                e.clause = "labels";
                bool want = S_.labels(conc_.run.state_at(x)).count(f->name()) > 0;
                if (l != want) fail(e, "labels", "proposition label differs from the origin" + at(x));
                return;
            }
            case Kind::Not: {
                e.clause = "B";
                bool a = label(aps_.closure.index_of(f->operand()), x);
                if ((pos && l && a) || (neg && !l && !a)) fail(e, "B", "negation labelled inconsistently" + at(x));
                return;
            }
            case Kind::And: {
                e.clause = "B";
                bool a = label(aps_.closure.index_of(f->lhs()), x), b = label(aps_.closure.index_of(f->rhs()), x);
                if ((pos && l && !(a && b)) || (neg && !l && a && b)) fail(e, "B", "conjunction labelled inconsistently" + at(x));
                return;
            }
            case Kind::Next: {
                e.clause = "B";
                bool a = label(aps_.closure.index_of(f->operand()), x + 1);
                if ((pos && l && !a) || (neg && !l && a)) fail(e, "B", "next labelled inconsistently" + at(x));
                return;
            }
            case Kind::Guard: {
                e.clause = "A";
                const auto& g = f->guard();
                // later copies of the last loop
                std::size_t copies = x >= m_ ? guard_stabilization(S_, conc_.run, g) + 1 : 1;
                for (std::size_t p = 0; p < copies; ++p) {
                    bool holds = S_.eval(g.term, conc_.run.at(S_, x + p * L_).valuation) >= g.bound;
                    if (pos && l && !holds) return fail(e, "A", "labelled guard fails" + at(x + p * L_));
                    if (neg && !l && holds) return fail(e, "A", "unlabelled guard holds" + at(x + p * L_));
                }
                return;
            }
            case Kind::Until: {
                const XInt& v = best[x];
                bool witnessed = v.ge(f->bound());
                e.clause = witnessed && v.kind == 1 && limit ? "D1" : (l ? "D2" : "C");
                if (pos && l && !witnessed)
                    fail(e, "D2", "best balance value " + xint_string(v) + " below " + f->bound().str() + at(x));
                if (neg && !l && witnessed)
                    fail(e, "C", "unlabelled until has a witness with balance " + xint_string(v) + at(x));
                return;
            }
            default: fail(e, "kind", "unexpected formula kind");
        }
    }

    // Best balance value over label-witnesses, per base-run position. From the
    // period start on the labelling repeats exactly.
    std::vector<XInt> until_table(std::size_t j, bool& limit) const {
        const Formula& f = aps_.closure[j];
        std::size_t chi = aps_.closure.index_of(f->lhs()), psi = aps_.closure.index_of(f->rhs());
        std::size_t W = m_ + L_;
        bool chi_all = true, psi_any = false;
        BigInt E = 0;
        for (std::size_t x = W; x < W + L_; ++x) {
            chi_all = chi_all && label(chi, x);
            psi_any = psi_any || label(psi, x);
            E += contribution(f, x);
        }
        auto step = [&](const XInt& next, std::size_t x) {
            bool c = label(chi, x), p = label(psi, x);
            if (!c && !p) return XInt::neg_inf();
            if (!c) return XInt::fin(0);
            XInt up = next.plus(contribution(f, x));
            return p ? xmax(up, XInt::fin(0)) : up;
        };
        XInt best;
        limit = chi_all && psi_any && E > 0;
        if (limit) {
            best = XInt::pos_inf();
        } else {
            for (std::size_t x = W + L_; x-- > W;) best = step(best, x);
        }
        std::vector<XInt> table(W);
        for (std::size_t x = W; x-- > 0;) {
            best = step(best, x);
            table[x] = best;
        }
        return table;
    }

    const ApsModel& aps_;
    const CounterSystem& S_;
    Concretization conc_;
    std::map<std::string, unsigned> pol_;
    std::size_t m_ = 0, L_ = 1;
};

}  // namespace detail

// Checks the labelling of the unrolled schema position by position. Labels are
// checked in the direction their polarity in Φ requires: positive occurrences
// must be justified when present, negative ones refuted when absent.
inline ConsistencyReport check_consistency(const ApsModel& aps) { return detail::ConsistencyChecker(aps).run(); }

inline BalanceTrace balance_trace(const ApsModel& aps, std::size_t until, std::size_t anchor, std::size_t length) {
    if (aps.closure[until]->kind() != Kind::Until) throw Error("balance traces exist only for until subformulae");
    return detail::ConsistencyChecker(aps).balance_trace(until, anchor, length);
}

inline nlohmann::json report_to_json(const ConsistencyReport& r, bool failures_only = false) {
    nlohmann::json j;
    j["all_pass"] = r.all_pass();
    j["entries"] = nlohmann::json::array();
    for (const auto& e : r.entries) {
        if (failures_only && e.pass) continue;
        nlohmann::json x = {{"position", e.position}, {"copy", copy_name(e.copy)}, {"formula", e.formula},
                            {"labelled", e.labelled}, {"pass", e.pass}, {"clause", e.clause}};
        if (!e.detail.empty()) x["detail"] = e.detail;
        j["entries"].push_back(x);
    }
    return j;
}

inline nlohmann::json witness_bundle(const ApsModel& aps, const LassoRun& run, const ConsistencyReport& report) {
    return {{"schema", aps_to_json(aps)}, {"run", lasso_to_json(aps.system, run)}, {"consistency", report_to_json(report, true)}};
}

}  // namespace flatcheck
