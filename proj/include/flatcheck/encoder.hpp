#pragma once

#include "flatcheck/counter_system.hpp"
#include "flatcheck/formula.hpp"
#include "flatcheck/qpa.hpp"

#include <map>
#include <string>
#include <vector>

namespace flatcheck {

// Position types of a schema.
enum PosType : int { kOutside = 0, kBegin = 1, kInside = 2, kEnd = 3 };

inline const char* pos_type_name(int t) {
    switch (t) {
        case kOutside: return "row";
        case kBegin: return "begin";
        case kInside: return "inside";
        case kEnd: return "end";
    }
    return "?";
}

// Z ∪ {-inf, +inf} as a (kind, payload) pair; kind is -1, 0 or +1.
struct ExtVar {
    Expr kind;
    Expr val;
};

namespace ext {

using namespace qpa;

inline Expr is_fin(const ExtVar& x) { return eq(x.kind, lit(0)); }
inline Expr is_pos_inf(const ExtVar& x) { return eq(x.kind, lit(1)); }
inline Expr is_neg_inf(const ExtVar& x) { return eq(x.kind, lit(-1)); }

inline Expr ge(const ExtVar& x, const BigInt& b) { return or_(is_pos_inf(x), and_(is_fin(x), qpa::ge(x.val, lit(b)))); }
inline Expr gt(const ExtVar& x, const BigInt& b) { return ge(x, b + 1); }

// x = y + d where d is a finite integer expression.
inline Expr eq_plus(const ExtVar& x, const ExtVar& y, const Expr& d) {
    return and_(eq(x.kind, y.kind), implies(is_fin(y), eq(x.val, add(y.val, d))));
}
inline Expr eq(const ExtVar& x, const ExtVar& y) { return eq_plus(x, y, lit(0)); }
inline Expr eq_fin(const ExtVar& x, const Expr& e) { return and_(is_fin(x), qpa::eq(x.val, e)); }
inline Expr eq_neg_inf(const ExtVar& x) { return is_neg_inf(x); }

// x = max(y, 0)
inline Expr eq_max0(const ExtVar& x, const ExtVar& y) { return ite(gt(y, 0), eq(x, y), eq_fin(x, lit(0))); }

inline Expr in_range(const ExtVar& x) { return and_(qpa::ge(x.kind, lit(-1)), qpa::le(x.kind, lit(1))); }

}  // namespace ext

struct UntilVars {
    std::size_t index = 0;  // closure index of the until
    std::vector<Expr> acc, prpg, glob, sumEff;
    Expr onLast;
    std::vector<ExtVar> maxFst, maxLst, maxAux, maxAuxAtBeg, updFst, updLst, updAux;
    std::vector<std::vector<Expr>> eff;  // eff[i][k]
};

// Deterministic variable layout of fmc(S, Φ, n).
struct VarTable {
    std::size_t n = 0;
    std::vector<Expr> typ, org, orgAtEnd, tf, tb, itr;
    std::vector<std::vector<Expr>> lbl;                 // lbl[i][closure index]
    std::vector<std::map<std::size_t, Expr>> lblAtBeg;  // per X argument
    std::vector<std::vector<Expr>> valFst, valSec, valFstAtEnd, lUpd;
    std::vector<std::vector<ExtVar>> valLst;
    std::map<std::size_t, UntilVars> untils;
};

struct Encoding {
    CounterSystem system;
    Formula phi;  // core form
    Closure closure;
    std::size_t n = 0;
    VarTable vars;
    QpaScript script;
};

inline std::string var_name(const std::string& family, std::size_t i) { return family + "_" + std::to_string(i); }
inline std::string var_name(const std::string& family, std::size_t i, std::size_t j) {
    return family + "_" + std::to_string(i) + "_" + std::to_string(j);
}

class FmcEncoder {
public:
    FmcEncoder(const CounterSystem& S, const Formula& phi, std::size_t n) {
        if (n < 2) throw Error("depth must be at least 2");
        S.validate();
        enc_.system = S;
        enc_.phi = is_core_formula(phi) ? phi : desugar(phi);
        enc_.closure = Closure(enc_.phi);
        enc_.n = n;
        for (const auto& c : guard_counters(enc_.phi)) {
            auto& cs = S.counters();
            if (std::find(cs.begin(), cs.end(), c) == cs.end())
                throw Error("formula mentions undeclared counter '" + c + "'");
        }
        pol_ = polarity(enc_.phi);
        declare_all();
    }

    void encode_aps() {
        auto& s = enc_.script;
        const auto& S = enc_.system;
        std::size_t n = enc_.n;
        auto& v = enc_.vars;
        using namespace qpa;
        s.assert_("aps.org0", qpa::eq(v.org[0], qpa::lit(static_cast<long long>(S.initial()))));
        // typ
        s.assert_("aps.typ", or_(is(0, kOutside), is(0, kBegin)));
        for (std::size_t i = 1; i < n; ++i)
            s.assert_("aps.typ", qpa::ite(or_(is(i - 1, kEnd), is(i - 1, kOutside)), or_(is(i, kOutside), is(i, kBegin)),
                                          or_(is(i, kInside), is(i, kEnd))));
        s.assert_("aps.typ", is(n - 1, kEnd));
        // labels
        for (std::size_t j = 0; j < enc_.closure.size(); ++j) {
            const Formula& f = enc_.closure[j];
            if (f->kind() == Kind::True) {
                for (std::size_t i = 0; i < n; ++i) s.assert_("aps.labels", v.lbl[i][j]);
            } else if (f->kind() == Kind::Atom) {
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<Expr> states;
                    for (StateId st = 0; st < S.num_states(); ++st)
                        if (S.labels(st).count(f->name())) states.push_back(org_is(i, st));
                    s.assert_("aps.labels", qpa::iff(v.lbl[i][j], or_(states)));
                }
            }
        }
        // orgAtEnd
        s.assert_("aps.orgAtEnd", qpa::eq(v.orgAtEnd[n - 1], v.org[n - 1]));
        for (std::size_t i = 0; i + 1 < n; ++i)
            s.assert_("aps.orgAtEnd", qpa::ite(is(i, kEnd), qpa::eq(v.orgAtEnd[i], v.org[i]),
                                               qpa::eq(v.orgAtEnd[i], v.orgAtEnd[i + 1])));
        // transitions
        for (std::size_t i = 1; i < n; ++i)
            for (const auto& t : S.transitions())
                s.assert_("aps.transitionsFwd",
                          implies(tf_is(i, t.id), and_(org_is(i - 1, t.source), org_is(i, t.target))));
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& t : S.transitions())
                s.assert_("aps.transitionsBwd",
                          implies(and_(is(i, kBegin), tb_is(i, t.id)),
                                  and_(qpa::eq(v.orgAtEnd[i], state_lit(t.source)), org_is(i, t.target))));
    }

    void encode_run() {
        auto& s = enc_.script;
        const auto& S = enc_.system;
        std::size_t n = enc_.n, C = S.counters().size();
        auto& v = enc_.vars;
        using namespace qpa;
        // itr
        s.assert_("run.itr", eq(v.itr[n - 1], lit(0)));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            s.assert_("run.itr", implies(is(i, kOutside), eq(v.itr[i], lit(1))));
            s.assert_("run.itr", implies(or_(is(i, kBegin), is(i, kInside)), eq(v.itr[i], v.itr[i + 1])));
            s.assert_("run.itr", implies(is(i, kEnd), ge(v.itr[i], lit(3))));
        }
        // initial valuation
        for (std::size_t c = 0; c < C; ++c) s.assert_("run.valuations", eq(v.valFst[0][c], lit(0)));
        {
            std::vector<Expr> row0;
            for (std::size_t c = 0; c < C; ++c) {
                row0.push_back(eq(v.valSec[0][c], lit(0)));
                row0.push_back(ext::eq_fin(v.valLst[0][c], lit(0)));
            }
            s.assert_("run.valRow", implies(is(0, kOutside), and_(row0)));
        }
        // rows, loop interiors and loop entries along forward transitions
        for (std::size_t i = 1; i < n; ++i) {
            for (const auto& t : S.transitions()) {
                std::vector<Expr> row, loop, begin;
                for (std::size_t c = 0; c < C; ++c) {
                    Expr mu = lit(t.update[c]);
                    Expr prev = add(v.valLst[i - 1][c].val, mu);
                    row.push_back(eq(v.valFst[i][c], prev));
                    row.push_back(eq(v.valSec[i][c], prev));
                    row.push_back(ext::eq_plus(v.valLst[i][c], v.valLst[i - 1][c], mu));
                    loop.push_back(eq(v.valFst[i][c], add(v.valFst[i - 1][c], mu)));
                    loop.push_back(eq(v.valSec[i][c], add(v.valSec[i - 1][c], mu)));
                    loop.push_back(ext::eq_plus(v.valLst[i][c], v.valLst[i - 1][c], mu));
                    begin.push_back(eq(v.valFst[i][c], prev));
                }
                Expr sel = tf_is(i, t.id);
                s.assert_("run.valRow", implies(and_(is(i, kOutside), sel), and_(row)));
                s.assert_("run.valLoop", implies(and_(or_(is(i, kInside), is(i, kEnd)), sel), and_(loop)));
                s.assert_("run.valFstSecItr", implies(and_(is(i, kBegin), sel), and_(begin)));
            }
        }
        // second iteration along the backward transition
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& t : S.transitions()) {
                std::vector<Expr> sec;
                for (std::size_t c = 0; c < C; ++c)
                    sec.push_back(eq(v.valSec[i][c], add(v.valFstAtEnd[i][c], lit(t.update[c]))));
                s.assert_("run.valFstSecItr", implies(and_(is(i, kBegin), tb_is(i, t.id)), and_(sec)));
            }
        // valFstAtEnd propagation
        for (std::size_t c = 0; c < C; ++c) {
            s.assert_("run.valPropagation", eq(v.valFstAtEnd[n - 1][c], v.valFst[n - 1][c]));
            for (std::size_t i = 0; i + 1 < n; ++i)
                s.assert_("run.valPropagation", ite(is(i, kEnd), eq(v.valFstAtEnd[i][c], v.valFst[i][c]),
                                                    eq(v.valFstAtEnd[i][c], v.valFstAtEnd[i + 1][c])));
        }
        // loop updates: lUpd accumulates update * (itr - 1) along a loop
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& t : S.transitions()) {
                auto term = [&](std::size_t c) { return sub(mul(t.update[c], v.itr[i]), lit(t.update[c])); };
                std::vector<Expr> end, inside, begin;
                for (std::size_t c = 0; c < C; ++c) {
                    end.push_back(eq(v.lUpd[i][c], term(c)));
                    if (i + 1 < n) {
                        inside.push_back(eq(v.lUpd[i][c], add(term(c), v.lUpd[i + 1][c])));
                        begin.push_back(eq(v.lUpd[i][c], add(term(c), v.lUpd[i + 1][c])));
                    }
                }
                if (i >= 1) {
                    s.assert_("run.loopUpdate", implies(and_(is(i, kEnd), tf_is(i, t.id)), and_(end)));
                    if (i + 1 < n)
                        s.assert_("run.loopUpdate", implies(and_(is(i, kInside), tf_is(i, t.id)), and_(inside)));
                }
                if (i + 1 < n)
                    s.assert_("run.loopUpdate", implies(and_(is(i, kBegin), tb_is(i, t.id)), and_(begin)));
            }
        // last iteration
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Expr> finite, limit;
            for (std::size_t c = 0; c < C; ++c) {
                const Expr &f = v.valFst[i][c], &sc = v.valSec[i][c];
                const ExtVar& l = v.valLst[i][c];
                finite.push_back(ext::eq_fin(l, add(f, v.lUpd[i][c])));
                limit.push_back(or_({and_(eq(f, sc), ext::eq_fin(l, f)), and_(gt(f, sc), ext::is_neg_inf(l)),
                                     and_(lt(f, sc), ext::is_pos_inf(l))}));
            }
            s.assert_("run.valLastItr", implies(is(i, kBegin), ite(gt(v.itr[i], lit(0)), and_(finite), and_(limit))));
            for (std::size_t c = 0; c < C; ++c)
                s.assert_("run.valLastItr", implies(not_(eq(v.itr[i], lit(0))), ext::is_fin(v.valLst[i][c])));
        }
        // guards
        for (std::size_t i = 1; i < n; ++i)
            for (const auto& t : S.transitions()) {
                if (t.guards.empty()) continue;
                std::vector<Expr> gs;
                for (const auto& g : t.guards) {
                    gs.push_back(fst_ge(g, i));
                    gs.push_back(implies(not_(is(i, kBegin)), lst_ge(g, i)));
                }
                s.assert_("run.guardsFwd", implies(tf_is(i, t.id), and_(gs)));
            }
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& t : S.transitions()) {
                if (t.guards.empty()) continue;
                std::vector<Expr> gs;
                for (const auto& g : t.guards) {
                    gs.push_back(ge(counter_term(g.term, v.valSec[i]), lit(g.bound)));
                    gs.push_back(lst_ge(g, i));
                }
                s.assert_("run.guardsBwd", implies(and_(is(i, kBegin), tb_is(i, t.id)), and_(gs)));
            }
    }

    void encode_consistency() {
        for (std::size_t j = 0; j < enc_.closure.size(); ++j) {
            const Formula& f = enc_.closure[j];
            switch (f->kind()) {
                case Kind::Not: consistency_neg(j); break;
                case Kind::And: consistency_and(j); break;
                case Kind::Guard: consistency_cstr(j); break;
                case Kind::Next: consistency_x(j); break;
                case Kind::Until: encode_until(j); break;
                default: break;
            }
        }
    }

    void encode_until(std::size_t j) {
        using namespace qpa;
        auto& s = enc_.script;
        const Formula& f = enc_.closure[j];
        std::size_t n = enc_.n;
        const auto& v = enc_.vars;
        const UntilVars& u = v.untils.at(j);
        std::size_t chi = enc_.closure.index_of(f->lhs()), psi = enc_.closure.index_of(f->rhs());
        const std::string fam = "consistencyU:" + std::to_string(j);
        auto tau_lbl = [&](std::size_t i) { return label_term(f->term(), i); };

        // glob
        s.assert_(fam + ".glob", iff(u.prpg[n - 1], v.lbl[n - 1][chi]));
        for (std::size_t i = 0; i + 1 < n; ++i)
            s.assert_(fam + ".glob", iff(u.prpg[i], and_(u.prpg[i + 1], v.lbl[i][chi])));
        s.assert_(fam + ".glob", iff(u.glob[0], u.prpg[0]));
        for (std::size_t i = 1; i < n; ++i)
            s.assert_(fam + ".glob", iff(u.glob[i], ite(or_(is(i, kOutside), is(i, kBegin)), u.prpg[i], u.glob[i - 1])));
        // accu
        s.assert_(fam + ".accu", eq(u.acc[n - 1], tau_lbl(n - 1)));
        for (std::size_t i = 0; i + 1 < n; ++i)
            s.assert_(fam + ".accu", ite(eq(v.itr[i], lit(0)), eq(u.acc[i], add(u.acc[i + 1], tau_lbl(i))),
                                         eq(u.acc[i], u.acc[i + 1])));
        // fin
        {
            std::vector<Expr> on;
            for (std::size_t i = 0; i < n; ++i) on.push_back(and_(eq(v.itr[i], lit(0)), v.lbl[i][psi]));
            s.assert_(fam + ".fin", iff(u.onLast, or_(on)));
        }
        // selectMax
        for (std::size_t i = 0; i < n; ++i) {
            Expr c = v.lbl[i][chi], p = v.lbl[i][psi];
            s.assert_(fam + ".selectMax",
                      implies(and_(not_(c), not_(p)), and_({ext::eq_neg_inf(u.maxFst[i]), ext::eq_neg_inf(u.maxAux[i]),
                                                            ext::eq_neg_inf(u.maxLst[i])})));
            s.assert_(fam + ".selectMax",
                      implies(and_(not_(c), p), and_({ext::eq_fin(u.maxFst[i], lit(0)), ext::eq_fin(u.maxAux[i], lit(0)),
                                                      ext::eq_fin(u.maxLst[i], lit(0))})));
            s.assert_(fam + ".selectMax",
                      implies(and_(c, not_(p)), and_({ext::eq(u.maxFst[i], u.updFst[i]), ext::eq(u.maxAux[i], u.updAux[i]),
                                                      ext::eq(u.maxLst[i], u.updLst[i])})));
            s.assert_(fam + ".selectMax",
                      implies(and_(c, p), and_({ext::eq_max0(u.maxLst[i], u.updLst[i]), ext::eq_max0(u.maxAux[i], u.updAux[i]),
                                                ext::eq_max0(u.maxFst[i], u.updFst[i])})));
        }
        // loopEffect: eff_i = tau[lbl_i] * (itr_i - 2), monomial-wise
        const auto& mons = f->term().monomials();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < mons.size(); ++k) {
                std::size_t a = enc_.closure.index_of(mons[k].atom);
                Expr prev = k == 0 ? lit(0) : u.eff[i][k - 1];
                Expr contrib = sub(mul(mons[k].coeff, v.itr[i]), lit(BigInt(2 * mons[k].coeff)));
                s.assert_(fam + ".loopEffect", ite(v.lbl[i][a], eq(u.eff[i][k], add(prev, contrib)), eq(u.eff[i][k], prev)));
            }
            Expr eff = mons.empty() ? lit(0) : u.eff[i].back();
            s.assert_(fam + ".loopEffect", implies(is(i, kBegin), eq(u.sumEff[i], eff)));
            if (i >= 1)
                s.assert_(fam + ".loopEffect",
                          implies(or_(is(i, kInside), is(i, kEnd)), eq(u.sumEff[i], add(u.sumEff[i - 1], eff))));
        }
        // calcUpdated
        for (std::size_t i = 0; i + 1 < n; ++i) {
            Expr t = tau_lbl(i);
            s.assert_(fam + ".calcUpdated",
                      implies(is(i, kOutside), and_(ext::eq_plus(u.updFst[i], u.maxFst[i + 1], t),
                                                    ext::eq_plus(u.updLst[i], u.maxFst[i + 1], t))));
            s.assert_(fam + ".calcUpdated",
                      implies(is(i, kEnd), and_({ext::eq_plus(u.updLst[i], u.maxFst[i + 1], t),
                                                 ext::eq_plus(u.updFst[i], u.maxAuxAtBeg[i], t),
                                                 ext::eq_plus(u.updAux[i], u.maxLst[i], u.sumEff[i])})));
            s.assert_(fam + ".calcUpdated",
                      implies(or_(is(i, kBegin), is(i, kInside)), and_({ext::eq_plus(u.updLst[i], u.maxLst[i + 1], t),
                                                                        ext::eq_plus(u.updFst[i], u.maxFst[i + 1], t),
                                                                        ext::eq_plus(u.updAux[i], u.maxAux[i + 1], t)})));
        }
        s.assert_(fam + ".calcUpdated",
                  ite(v.lbl[n - 1][psi], ext::eq_fin(u.updAux[n - 1], lit(0)), ext::eq_neg_inf(u.updAux[n - 1])));
        s.assert_(fam + ".calcUpdated", ext::eq_plus(u.updFst[n - 1], u.maxAuxAtBeg[n - 1], tau_lbl(n - 1)));
        s.assert_(fam + ".calcUpdated", ext::eq(u.updLst[n - 1], u.maxLst[n - 1]));
        s.assert_(fam + ".calcUpdated", ext::eq(u.maxAuxAtBeg[0], u.maxAux[0]));
        for (std::size_t i = 1; i < n; ++i)
            s.assert_(fam + ".calcUpdated", ite(is(i, kBegin), ext::eq(u.maxAuxAtBeg[i], u.maxAux[i]),
                                                ext::eq(u.maxAuxAtBeg[i], u.maxAuxAtBeg[i - 1])));
        // labels: the last loop's positive effect (D1) decides when it applies,
        // otherwise the best witness value (D2) does, at the first and at the last visit.
        Expr d1 = and_(gt(u.acc[0], lit(0)), u.onLast);
        for (std::size_t i = 0; i < n; ++i) {
            Expr front = ite(and_(d1, u.glob[i]), tru(), ext::ge(u.maxFst[i], f->bound()));
            Expr rear = ite(and_(d1, u.prpg[i]), tru(), ext::ge(u.maxLst[i], f->bound()));
            s.assert_(fam + ".label", iff(v.lbl[i][j], front));
            s.assert_(fam + ".label", implies(not_(eq(v.itr[i], lit(0))), iff(v.lbl[i][j], rear)));
        }
    }

    void encode_goal() {
        std::size_t root = enc_.closure.index_of(enc_.phi);
        enc_.script.assert_("goal", enc_.vars.lbl[0][root]);
    }

    Encoding finish() {
        encode_aps();
        encode_run();
        encode_consistency();
        encode_goal();
        auto& meta = enc_.script.metadata();
        meta["n"] = std::to_string(enc_.n);
        meta["formula"] = enc_.phi->key();
        std::string order;
        for (const auto& f : enc_.closure) order += (order.empty() ? "" : " ; ") + f->key();
        meta["closure"] = order;
        return std::move(enc_);
    }

private:
    Expr is(std::size_t i, int t) const { return qpa::eq(enc_.vars.typ[i], qpa::lit(t)); }
    Expr state_lit(StateId s) const { return qpa::lit(static_cast<long long>(s)); }
    Expr org_is(std::size_t i, StateId s) const { return qpa::eq(enc_.vars.org[i], state_lit(s)); }
    Expr tf_is(std::size_t i, TransitionId t) const {
        return qpa::eq(enc_.vars.tf[i], qpa::lit(static_cast<long long>(t)));
    }
    Expr tb_is(std::size_t i, TransitionId t) const {
        return qpa::eq(enc_.vars.tb[i], qpa::lit(static_cast<long long>(t)));
    }

    Expr counter_term(const CounterTerm& t, const std::vector<Expr>& vals) const {
        std::vector<Expr> xs;
        for (const auto& m : t) xs.push_back(qpa::mul(m.coeff, vals[enc_.system.counter_index(m.atom)]));
        return qpa::add(xs);
    }
    Expr counter_term_lst(const CounterTerm& t, std::size_t i) const {
        std::vector<Expr> xs;
        for (const auto& m : t)
            xs.push_back(qpa::mul(m.coeff, enc_.vars.valLst[i][enc_.system.counter_index(m.atom)].val));
        return qpa::add(xs);
    }
    Expr drift(const CounterTerm& t, std::size_t i) const {
        return qpa::sub(counter_term(t, enc_.vars.valSec[i]), counter_term(t, enc_.vars.valFst[i]));
    }

    Expr fst_ge(const CounterConstraint& g, std::size_t i) const {
        return qpa::ge(counter_term(g.term, enc_.vars.valFst[i]), qpa::lit(g.bound));
    }

    // τ[valLst_i] >= b. On the last loop the limit of τ is decided by its drift,
    // which also covers sums of counters diverging in opposite directions.
    Expr lst_ge(const CounterConstraint& g, std::size_t i) const {
        using namespace qpa;
        Expr d = drift(g.term, i);
        return ite(eq(enc_.vars.itr[i], lit(0)), or_(gt(d, lit(0)), and_(eq(d, lit(0)), fst_ge(g, i))),
                   ge(counter_term_lst(g.term, i), lit(g.bound)));
    }

    Expr label_term(const FormulaTerm& t, std::size_t i) const {
        std::vector<Expr> xs;
        for (const auto& m : t)
            xs.push_back(qpa::mul(m.coeff, qpa::ite(enc_.vars.lbl[i][enc_.closure.index_of(m.atom)], qpa::lit(1), qpa::lit(0))));
        return qpa::add(xs);
    }

    void consistency_neg(std::size_t j) {
        std::size_t a = enc_.closure.index_of(enc_.closure[j]->operand());
        for (std::size_t i = 0; i < enc_.n; ++i)
            enc_.script.assert_("consistencyNeg:" + std::to_string(j),
                                qpa::iff(enc_.vars.lbl[i][j], qpa::not_(enc_.vars.lbl[i][a])));
    }

    void consistency_and(std::size_t j) {
        std::size_t a = enc_.closure.index_of(enc_.closure[j]->lhs()), b = enc_.closure.index_of(enc_.closure[j]->rhs());
        for (std::size_t i = 0; i < enc_.n; ++i)
            enc_.script.assert_("consistencyAnd:" + std::to_string(j),
                                qpa::iff(enc_.vars.lbl[i][j], qpa::and_(enc_.vars.lbl[i][a], enc_.vars.lbl[i][b])));
    }

    // A guard label stands for every visit of the position. Visits of a loop
    // position see affinely changing values, so the truth can differ between
    // iterations; occurrences of one polarity only need the label on the safe side.
    void consistency_cstr(std::size_t j) {
        using namespace qpa;
        const Formula& f = enc_.closure[j];
        const CounterConstraint& g = f->guard();
        unsigned pol = pol_.count(f->key()) ? pol_.at(f->key()) : kPositive;
        const std::string fam = "consistencyCstr:" + std::to_string(j);
        for (std::size_t i = 0; i < enc_.n; ++i) {
            Expr first = fst_ge(g, i);
            Expr d = drift(g.term, i);
            Expr last_val = counter_term_lst(g.term, i);
            Expr last_loop = eq(enc_.vars.itr[i], lit(0));
            Expr all_hold = and_(first, ite(last_loop, ge(d, lit(0)), ge(last_val, lit(g.bound))));
            Expr none_hold = and_(not_(first), ite(last_loop, le(d, lit(0)), lt(last_val, lit(g.bound))));
            const Expr& l = enc_.vars.lbl[i][j];
            if (pol == kPositive) {
                enc_.script.assert_(fam, iff(l, all_hold));
            } else if (pol == kNegative) {
                enc_.script.assert_(fam, iff(l, not_(none_hold)));
            } else {
                enc_.script.assert_(fam, implies(l, all_hold));
                enc_.script.assert_(fam, implies(not_(l), none_hold));
            }
        }
    }

    void consistency_x(std::size_t j) {
        using namespace qpa;
        std::size_t a = enc_.closure.index_of(enc_.closure[j]->operand());
        const auto& v = enc_.vars;
        std::size_t n = enc_.n;
        const std::string fam = "consistencyX:" + std::to_string(j);
        const Expr& beg0 = v.lblAtBeg[0].at(a);
        enc_.script.assert_(fam + ".propagateX", iff(beg0, v.lbl[0][a]));
        for (std::size_t i = 1; i < n; ++i)
            enc_.script.assert_(fam + ".propagateX", ite(is(i, kBegin), iff(v.lblAtBeg[i].at(a), v.lbl[i][a]),
                                                         iff(v.lblAtBeg[i].at(a), v.lblAtBeg[i - 1].at(a))));
        enc_.script.assert_(fam, iff(v.lbl[n - 1][j], v.lblAtBeg[n - 1].at(a)));
        for (std::size_t i = 0; i + 1 < n; ++i)
            enc_.script.assert_(fam, ite(v.lbl[i][j], and_(v.lbl[i + 1][a], implies(is(i, kEnd), v.lblAtBeg[i].at(a))),
                                         and_(not_(v.lbl[i + 1][a]), implies(is(i, kEnd), not_(v.lblAtBeg[i].at(a))))));
    }

    ExtVar ext_var(const std::string& base) {
        ExtVar x{enc_.script.int_var(base + ".k"), enc_.script.int_var(base + ".v")};
        enc_.script.assert_("ranges", ext::in_range(x));
        return x;
    }

    Expr bounded_int(const std::string& name, long long lo, long long hi) {
        Expr x = enc_.script.int_var(name);
        enc_.script.assert_("ranges", qpa::and_(qpa::ge(x, qpa::lit(lo)), qpa::le(x, qpa::lit(hi))));
        return x;
    }

    void declare_all() {
        auto& s = enc_.script;
        auto& v = enc_.vars;
        const auto& S = enc_.system;
        std::size_t n = enc_.n, C = S.counters().size(), K = enc_.closure.size();
        long long ns = static_cast<long long>(S.num_states()), nt = static_cast<long long>(S.transitions().size());
        v.n = n;
        std::vector<std::size_t> xargs;
        for (std::size_t j = 0; j < K; ++j)
            if (enc_.closure[j]->kind() == Kind::Next) xargs.push_back(enc_.closure.index_of(enc_.closure[j]->operand()));
        v.lblAtBeg.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            v.typ.push_back(bounded_int(var_name("typ", i), 0, 3));
            v.org.push_back(bounded_int(var_name("org", i), 0, ns - 1));
            v.orgAtEnd.push_back(bounded_int(var_name("orgAtEnd", i), 0, ns - 1));
            v.tf.push_back(i == 0 ? nullptr : bounded_int(var_name("tf", i), 0, nt - 1));
            v.tb.push_back(bounded_int(var_name("tb", i), 0, nt - 1));
            Expr it = s.int_var(var_name("itr", i));
            s.assert_("ranges", qpa::ge(it, qpa::lit(0)));
            v.itr.push_back(it);
            std::vector<Expr> lbl;
            for (std::size_t j = 0; j < K; ++j) lbl.push_back(s.bool_var(var_name("lbl", i, j)));
            v.lbl.push_back(std::move(lbl));
            for (std::size_t a : xargs)
                if (!v.lblAtBeg[i].count(a)) v.lblAtBeg[i][a] = s.bool_var(var_name("lblAtBeg", i, a));
            std::vector<Expr> fst, sec, fae, lu;
            std::vector<ExtVar> lst;
            for (std::size_t c = 0; c < C; ++c) {
                fst.push_back(s.int_var(var_name("valFst", i, c)));
                sec.push_back(s.int_var(var_name("valSec", i, c)));
                lst.push_back(ext_var(var_name("valLst", i, c)));
                fae.push_back(s.int_var(var_name("valFstAtEnd", i, c)));
                lu.push_back(s.int_var(var_name("lUpd", i, c)));
            }
            v.valFst.push_back(std::move(fst));
            v.valSec.push_back(std::move(sec));
            v.valLst.push_back(std::move(lst));
            v.valFstAtEnd.push_back(std::move(fae));
            v.lUpd.push_back(std::move(lu));
        }
        for (std::size_t j = 0; j < K; ++j) {
            const Formula& f = enc_.closure[j];
            if (f->kind() != Kind::Until) continue;
            UntilVars u;
            u.index = j;
            std::string tag = "u" + std::to_string(j);
            u.onLast = s.bool_var("onLast_" + tag);
            for (std::size_t i = 0; i < n; ++i) {
                std::string at = tag + "_" + std::to_string(i);
                u.acc.push_back(s.int_var("acc_" + at));
                u.prpg.push_back(s.bool_var("prpg_" + at));
                u.glob.push_back(s.bool_var("glob_" + at));
                u.maxFst.push_back(ext_var("maxFst_" + at));
                u.maxLst.push_back(ext_var("maxLst_" + at));
                u.maxAux.push_back(ext_var("maxAux_" + at));
                u.maxAuxAtBeg.push_back(ext_var("maxAuxAtBeg_" + at));
                u.updFst.push_back(ext_var("updFst_" + at));
                u.updLst.push_back(ext_var("updLst_" + at));
                u.updAux.push_back(ext_var("updAux_" + at));
                u.sumEff.push_back(s.int_var("sumEff_" + at));
                std::vector<Expr> eff;
                for (std::size_t k = 0; k < f->term().size(); ++k)
                    eff.push_back(s.int_var("eff_" + at + "_" + std::to_string(k)));
                u.eff.push_back(std::move(eff));
            }
            v.untils.emplace(j, std::move(u));
        }
    }

    Encoding enc_;
    std::map<std::string, unsigned> pol_;
};

inline Encoding encode_fmc(const CounterSystem& S, const Formula& phi, std::size_t n) {
    return FmcEncoder(S, phi, n).finish();
}

// Closed-form declaration count of encode_fmc.
inline std::size_t predicted_declarations(const CounterSystem& S, const Formula& phi, std::size_t n) {
    Formula core = is_core_formula(phi) ? phi : desugar(phi);
    Closure cl(core);
    std::size_t C = S.counters().size(), K = cl.size();
    std::set<std::size_t> xargs;
    std::size_t until_cost = 0, untils = 0;
    for (const auto& f : cl) {
        if (f->kind() == Kind::Next) xargs.insert(cl.index_of(f->operand()));
        if (f->kind() == Kind::Until) {
            ++untils;
            until_cost += 3 + 7 * 2 + 1 + f->term().size();  // acc prpg glob, 7 ExtendedInt, sumEff, eff
        }
    }
    std::size_t per_pos = 5 + 1 + K + xargs.size() + C * (1 + 1 + 2 + 1 + 1) + until_cost;
    return n * per_pos - 1 + untils;  // tf_0 is not declared; one onLast per until
}

}  // namespace flatcheck
