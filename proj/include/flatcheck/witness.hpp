#pragma once

#include "flatcheck/encoder.hpp"
#include "flatcheck/lasso.hpp"
#include "flatcheck/oracle.hpp"
#include "flatcheck/qpa.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace flatcheck {

struct ApsPosition {
    int type = kOutside;
    StateId origin = 0;
    std::vector<bool> labels;  // by closure index
    BigInt iterations = 1;     // 0: the last loop, iterated forever
    std::optional<TransitionId> forward;   // into this position, absent at 0
    std::optional<TransitionId> backward;  // loop begins only: closes the loop
    std::vector<BigInt> first, second;
    std::vector<XInt> last;
};

struct LoopInterval {
    std::size_t begin = 0, end = 0;
    BigInt iterations = 0;
    bool is_last() const { return iterations == 0; }
    std::size_t length() const { return end - begin + 1; }
};

struct ApsModel {
    CounterSystem system;
    Formula phi;
    Closure closure;
    std::size_t n = 0;
    std::vector<ApsPosition> positions;
    std::vector<LoopInterval> loops;

    // Loop containing position i, if any.
    const LoopInterval* loop_of(std::size_t i) const {
        for (const auto& l : loops)
            if (l.begin <= i && i <= l.end) return &l;
        return nullptr;
    }
    bool labelled(std::size_t i, const Formula& f) const { return positions.at(i).labels.at(closure.index_of(f)); }
};

class DecodeError : public Error {
public:
    DecodeError(std::size_t position, const std::string& family, const std::string& what)
        : Error("position " + std::to_string(position) + ": " + what + " (" + family + ")"),
          position_(position), family_(family) {}
    std::size_t position() const { return position_; }
    const std::string& family() const { return family_; }

private:
    std::size_t position_;
    std::string family_;
};

namespace detail {

inline const Value& model_value(const Model& m, const Expr& var) {
    auto it = m.find(var->name);
    if (it == m.end()) throw Error("model misses variable '" + var->name + "'");
    return it->second;
}

inline BigInt model_int(const Model& m, const Expr& var) {
    const Value& v = model_value(m, var);
    if (v.is_bool) throw Error("variable '" + var->name + "' is not an integer in the model");
    return v.number;
}

inline bool model_bool(const Model& m, const Expr& var) {
    const Value& v = model_value(m, var);
    if (!v.is_bool) throw Error("variable '" + var->name + "' is not a boolean in the model");
    return v.truth;
}

inline XInt model_ext(const Model& m, const ExtVar& x) {
    BigInt k = model_int(m, x.kind);
    if (k == 0) return XInt::fin(model_int(m, x.val));
    if (k == 1) return XInt::pos_inf();
    if (k == -1) return XInt::neg_inf();
    throw Error("extended integer '" + x.kind->name + "' has kind " + k.str());
}

}  // namespace detail

// Reads the schema out of a model of fmc(S, Φ, n). Any broken invariant is an
// encoder defect and raises DecodeError.
inline ApsModel decode(const Encoding& enc, const Model& model) {
    using detail::model_bool;
    using detail::model_int;
    const auto& S = enc.system;
    const auto& v = enc.vars;
    ApsModel aps;
    aps.system = S;
    aps.phi = enc.phi;
    aps.closure = enc.closure;
    aps.n = enc.n;
    std::size_t n = enc.n, C = S.counters().size();
    auto state = [&](std::size_t i, const Expr& e, const char* fam) {
        BigInt s = model_int(model, e);
        if (s < 0 || s >= BigInt(S.num_states())) throw DecodeError(i, fam, "state index " + s.str() + " out of range");
        return static_cast<StateId>(s);
    };
    auto trans = [&](std::size_t i, const Expr& e, const char* fam) {
        BigInt t = model_int(model, e);
        if (t < 0 || t >= BigInt(S.transitions().size()))
            throw DecodeError(i, fam, "transition index " + t.str() + " out of range");
        return static_cast<TransitionId>(t);
    };
    for (std::size_t i = 0; i < n; ++i) {
        ApsPosition p;
        BigInt t = model_int(model, v.typ[i]);
        if (t < 0 || t > 3) throw DecodeError(i, "aps.typ", "type " + t.str() + " out of range");
        p.type = static_cast<int>(t);
        p.origin = state(i, v.org[i], "aps.org");
        for (std::size_t j = 0; j < enc.closure.size(); ++j) p.labels.push_back(model_bool(model, v.lbl[i][j]));
        p.iterations = model_int(model, v.itr[i]);
        if (i > 0) p.forward = trans(i, v.tf[i], "aps.transitionsFwd");
        if (p.type == kBegin) p.backward = trans(i, v.tb[i], "aps.transitionsBwd");
        for (std::size_t c = 0; c < C; ++c) {
            p.first.push_back(model_int(model, v.valFst[i][c]));
            p.second.push_back(model_int(model, v.valSec[i][c]));
            p.last.push_back(detail::model_ext(model, v.valLst[i][c]));
        }
        aps.positions.push_back(std::move(p));
    }
    // type chain and loop intervals
    bool inside = false;
    std::size_t open = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int t = aps.positions[i].type;
        if (!inside && (t == kInside || t == kEnd)) throw DecodeError(i, "aps.typ", "loop not opened");
        if (inside && (t == kOutside || t == kBegin)) throw DecodeError(i, "aps.typ", "loop not closed");
        if (t == kBegin) {
            open = i;
            inside = true;
        }
        if (t == kEnd) {
            aps.loops.push_back({open, i, aps.positions[open].iterations});
            inside = false;
        }
    }
    if (inside || aps.positions[n - 1].type != kEnd) throw DecodeError(n - 1, "aps.typ", "loop not closed");
    // origins and propositional labels
    if (aps.positions[0].origin != S.initial()) throw DecodeError(0, "aps.org0", "origin is not the initial state");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < aps.closure.size(); ++j) {
            const Formula& f = aps.closure[j];
            bool want = f->kind() == Kind::True || (f->kind() == Kind::Atom && S.labels(aps.positions[i].origin).count(f->name()));
            if ((f->kind() == Kind::True || f->kind() == Kind::Atom) && aps.positions[i].labels[j] != want)
                throw DecodeError(i, "aps.labels", "label of '" + f->key() + "' does not match the origin");
        }
    // transitions
    for (std::size_t i = 1; i < n; ++i) {
        const Transition& t = S.transition(*aps.positions[i].forward);
        if (t.source != aps.positions[i - 1].origin || t.target != aps.positions[i].origin)
            throw DecodeError(i, "aps.transitionsFwd", "forward transition does not connect the origins");
    }
    for (const auto& l : aps.loops) {
        const Transition& t = S.transition(*aps.positions[l.begin].backward);
        if (t.source != aps.positions[l.end].origin || t.target != aps.positions[l.begin].origin)
            throw DecodeError(l.begin, "aps.transitionsBwd", "backward transition does not close the loop");
    }
    // iteration counts
    for (std::size_t i = 0; i < n; ++i)
        if (aps.positions[i].type == kOutside && aps.positions[i].iterations != 1)
            throw DecodeError(i, "run.itr", "row with iteration count " + aps.positions[i].iterations.str());
    for (std::size_t k = 0; k < aps.loops.size(); ++k) {
        const auto& l = aps.loops[k];
        for (std::size_t i = l.begin; i <= l.end; ++i)
            if (aps.positions[i].iterations != l.iterations)
                throw DecodeError(i, "run.itr", "iteration count differs inside a loop");
        bool last = k + 1 == aps.loops.size();
        if (last != l.is_last()) throw DecodeError(l.begin, "run.itr", last ? "last loop is not iterated forever" : "only the last loop may be iterated forever");
        if (!last && l.iterations < 1) throw DecodeError(l.begin, "run.itr", "negative iteration count");
    }
    return aps;
}

// Re-encodes to recover the variable layout; prefer the Encoding overload.
inline ApsModel decode(const Model& model, const CounterSystem& S, const Formula& phi, std::size_t n) {
    return decode(encode_fmc(S, phi, n), model);
}

// A lasso run together with the schema position (and loop iteration) that
// produced each of its base positions.
struct Concretization {
    LassoRun run;
    std::vector<std::size_t> position;
    std::vector<std::size_t> iteration;

    std::size_t position_at(std::size_t x) const {
        std::size_t m = run.prefix.size();
        return x < position.size() ? position[x] : position[m + (x - m) % run.period.size()];
    }
};

// Expands the schema: rows once, loops itr times, the last loop once as the
// period. Valuations are recomputed and compared with the model's values.
inline Concretization concretize_mapped(const ApsModel& aps) {
    const auto& S = aps.system;
    const std::size_t C = S.counters().size();
    Concretization out;
    std::vector<Configuration> all;
    std::vector<TransitionId> steps;
    auto mismatch = [&](std::size_t i, const char* which, std::size_t c, const std::string& got, const std::string& want) {
        throw DecodeError(i, "run.valuations", std::string(which) + " value of counter '" + S.counters()[c] + "' is " + got +
                                                   " in the model but " + want + " in the expansion");
    };
    auto step_to = [&](TransitionId t, StateId to, std::size_t i) {
        const Transition& tr = S.transition(t);
        Valuation v = S.apply(tr, all.back().valuation);
        if (!S.guards_hold(tr, v)) throw DecodeError(i, "run.guardsFwd", "guard violated during expansion");
        steps.push_back(t);
        all.push_back({to, std::move(v)});
    };
    std::size_t i = 0;
    std::size_t period_start = 0;
    while (i < aps.n) {
        const ApsPosition& p = aps.positions[i];
        if (p.type == kOutside) {
            if (i == 0) all.push_back({p.origin, S.zero_valuation()});
            else step_to(*p.forward, p.origin, i);
            out.position.push_back(i);
            out.iteration.push_back(0);
            for (std::size_t c = 0; c < C; ++c) {
                const BigInt& got = all.back().valuation[c];
                if (p.first[c] != got) mismatch(i, "first", c, p.first[c].str(), got.str());
                if (p.last[c].kind != 0 || p.last[c].v != got)
                    mismatch(i, "last", c, p.last[c].kind == 0 ? p.last[c].v.str() : "infinite", got.str());
            }
            ++i;
            continue;
        }
        const LoopInterval* l = aps.loop_of(i);
        std::size_t copies = l->is_last() ? 1 : static_cast<std::size_t>(l->iterations);
        if (l->is_last()) period_start = all.size();
        std::size_t start = all.size();
        for (std::size_t k = 0; k < copies; ++k)
            for (std::size_t q = l->begin; q <= l->end; ++q) {
                const ApsPosition& pq = aps.positions[q];
                if (q == 0 && k == 0) all.push_back({pq.origin, S.zero_valuation()});
                else if (q == l->begin && k > 0) step_to(*aps.positions[l->begin].backward, pq.origin, q);
                else step_to(*pq.forward, pq.origin, q);
                out.position.push_back(q);
                out.iteration.push_back(k);
            }
        // loop effect
        Valuation d(C, 0);
        for (std::size_t q = l->begin + 1; q <= l->end; ++q)
            for (std::size_t c = 0; c < C; ++c) d[c] += S.transition(*aps.positions[q].forward).update[c];
        for (std::size_t c = 0; c < C; ++c) d[c] += S.transition(*aps.positions[l->begin].backward).update[c];
        for (std::size_t q = l->begin; q <= l->end; ++q) {
            const ApsPosition& pq = aps.positions[q];
            const Valuation& f = all[start + (q - l->begin)].valuation;
            for (std::size_t c = 0; c < C; ++c) {
                if (pq.first[c] != f[c]) mismatch(q, "first", c, pq.first[c].str(), f[c].str());
                BigInt sec = f[c] + d[c];
                if (pq.second[c] != sec) mismatch(q, "second", c, pq.second[c].str(), sec.str());
                const XInt& lst = pq.last[c];
                if (l->is_last()) {
                    int want = d[c] > 0 ? 1 : (d[c] < 0 ? -1 : 0);
                    if (lst.kind != want || (want == 0 && lst.v != f[c]))
                        mismatch(q, "limit", c, lst.kind == 0 ? lst.v.str() : (lst.kind > 0 ? "+inf" : "-inf"),
                                 want == 0 ? f[c].str() : (want > 0 ? "+inf" : "-inf"));
                } else {
                    BigInt want = f[c] + d[c] * (l->iterations - 1);
                    if (lst.kind != 0 || lst.v != want)
                        mismatch(q, "last", c, lst.kind == 0 ? lst.v.str() : "infinite", want.str());
                }
            }
        }
        if (l->is_last()) steps.push_back(*aps.positions[l->begin].backward);
        i = l->end + 1;
    }
    out.run.prefix.assign(all.begin(), all.begin() + static_cast<long>(period_start));
    out.run.period.assign(all.begin() + static_cast<long>(period_start), all.end());
    out.run.steps = std::move(steps);
    std::string why;
    if (!is_run(S, out.run, &why)) throw DecodeError(aps.loops.back().begin, "run.guardsBwd", "expansion is not a run: " + why);
    return out;
}

inline LassoRun concretize(const ApsModel& aps) { return concretize_mapped(aps).run; }

// True iff `run` is a run of S and Φ holds at its first position.
inline bool validate_run(const CounterSystem& S, const LassoRun& run, const Formula& phi, std::string* why = nullptr) {
    std::string w;
    if (!is_run(S, run, &w)) {
        if (why) *why = "not a run: " + w;
        return false;
    }
    try {
        if (!eval_cltl(S, run, phi)) {
            if (why) *why = "formula does not hold at position 0";
            return false;
        }
    } catch (const Error& e) {
        if (why) *why = e.what();
        return false;
    }
    return true;
}

// ---- presentation ---------------------------------------------------------------

inline std::string xint_string(const XInt& x) {
    if (x.kind == 1) return "+inf";
    if (x.kind == -1) return "-inf";
    return x.v.str();
}

inline nlohmann::json aps_to_json(const ApsModel& aps) {
    const auto& S = aps.system;
    nlohmann::json j;
    j["n"] = aps.n;
    j["formula"] = aps.phi->key();
    j["closure"] = nlohmann::json::array();
    for (const auto& f : aps.closure) j["closure"].push_back(f->key());
    j["positions"] = nlohmann::json::array();
    for (std::size_t i = 0; i < aps.n; ++i) {
        const auto& p = aps.positions[i];
        nlohmann::json e;
        e["type"] = pos_type_name(p.type);
        e["origin"] = S.state_name(p.origin);
        e["iterations"] = p.iterations.str();
        nlohmann::json lbl = nlohmann::json::array();
        for (std::size_t k = 0; k < p.labels.size(); ++k)
            if (p.labels[k]) lbl.push_back(aps.closure[k]->key());
        e["labels"] = lbl;
        if (p.forward) e["forward"] = *p.forward;
        if (p.backward) e["backward"] = *p.backward;
        nlohmann::json vals = nlohmann::json::object();
        for (std::size_t c = 0; c < S.counters().size(); ++c)
            vals[S.counters()[c]] = {{"first", p.first[c].str()}, {"second", p.second[c].str()}, {"last", xint_string(p.last[c])}};
        e["valuations"] = vals;
        j["positions"].push_back(e);
    }
    j["loops"] = nlohmann::json::array();
    for (const auto& l : aps.loops)
        j["loops"].push_back({{"begin", l.begin}, {"end", l.end}, {"iterations", l.iterations.str()}});
    return j;
}

// Human-readable rendering of a witness bundle (the JSON form is canonical).
inline void print_trace(std::ostream& os, const nlohmann::json& bundle) {
    if (bundle.contains("schema")) {
        const auto& sch = bundle["schema"];
        os << "schema (n = " << sch["n"].get<std::size_t>() << ")\n";
        std::size_t i = 0;
        for (const auto& p : sch["positions"]) {
            os << "  " << i++ << "  " << p["type"].get<std::string>() << "  " << p["origin"].get<std::string>();
            if (p["type"] == "begin") os << "  x" << (p["iterations"] == "0" ? std::string("inf") : p["iterations"].get<std::string>());
            os << "  {";
            bool first = true;
            for (const auto& l : p["labels"]) {
                os << (first ? "" : ", ") << l.get<std::string>();
                first = false;
            }
            os << "}\n";
        }
    }
    const auto& run = bundle["run"];
    auto conf = [&](const nlohmann::json& c) {
        os << c["state"].get<std::string>();
        if (!c["valuation"].empty()) {
            os << " (";
            bool first = true;
            for (auto it = c["valuation"].begin(); it != c["valuation"].end(); ++it) {
                os << (first ? "" : ", ") << it.key() << "=" << it.value().get<std::string>();
                first = false;
            }
            os << ")";
        }
    };
    os << "run\n";
    std::size_t x = 0;
    for (const auto& c : run["prefix"]) {
        os << "  " << x++ << "  ";
        conf(c);
        os << '\n';
    }
    os << "  loop forever:\n";
    for (const auto& c : run["period"]) {
        os << "  " << x++ << "  ";
        conf(c);
        os << '\n';
    }
}

}  // namespace flatcheck
