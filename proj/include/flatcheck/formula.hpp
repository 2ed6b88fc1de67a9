#pragma once

#include "flatcheck/common.hpp"
#include "flatcheck/lexer.hpp"
#include "flatcheck/linear_term.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace flatcheck {

// Core kinds come first; everything from False on is surface sugar removed by desugar().
enum class Kind {
    True,
    Atom,
    Guard,
    And,
    Not,
    Next,
    Until,
    False,
    Or,
    Implies,
    Finally,
    Globally,
    FreqUntil,
};

inline bool is_core(Kind k) { return k <= Kind::Until; }

class FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;
using FormulaTerm = LinearTerm<Formula>;

// Immutable CLTL syntax tree node. Structural identity is the canonical text `key()`.
class FormulaNode {
public:
    Kind kind() const { return kind_; }
    const std::string& key() const { return key_; }

    const std::string& name() const { return name_; }                    // Atom
    const CounterConstraint& guard() const { return guard_; }            // Guard
    const Formula& lhs() const { return lhs_; }                          // And/Or/Implies/Until/FreqUntil, Not/Next/Finally/Globally operand
    const Formula& rhs() const { return rhs_; }                          // And/Or/Implies/Until/FreqUntil
    const FormulaTerm& term() const { return term_; }                    // Until/Finally
    const BigInt& bound() const { return bound_; }                       // Until/Finally
    const BigInt& numerator() const { return num_; }                     // FreqUntil a
    const BigInt& denominator() const { return den_; }                   // FreqUntil b
    const Formula& operand() const { return lhs_; }

    bool is_unary() const {
        return kind_ == Kind::Not || kind_ == Kind::Next || kind_ == Kind::Finally || kind_ == Kind::Globally;
    }

private:
    friend struct FormulaBuilder;
    Kind kind_ = Kind::True;
    std::string name_;
    CounterConstraint guard_;
    Formula lhs_, rhs_;
    FormulaTerm term_;
    BigInt bound_, num_, den_;
    std::string key_;
};

inline bool same(const Formula& a, const Formula& b) { return a->key() == b->key(); }

inline std::string formula_key(const Formula& f) { return f->key(); }

inline std::string term_atom_text(const Formula& f) {
    switch (f->kind()) {
        case Kind::True:
        case Kind::False:
        case Kind::Atom: return f->key();
        default: break;
    }
    if (!f->key().empty() && f->key().front() == '(') return f->key();
    return "(" + f->key() + ")";
}

inline std::string print_term(const FormulaTerm& t) { return t.print(term_atom_text); }

struct FormulaBuilder {
    static Formula make(FormulaNode n) {
        n.key_ = compute_key(n);
        return std::make_shared<const FormulaNode>(std::move(n));
    }
    static FormulaNode node(Kind k) {
        FormulaNode n;
        n.kind_ = k;
        return n;
    }
    static std::string compute_key(const FormulaNode& n) {
        switch (n.kind_) {
            case Kind::True: return "true";
            case Kind::False: return "false";
            case Kind::Atom: return n.name_;
            case Kind::Guard: return "(" + print_counter_constraint(n.guard_) + ")";
            case Kind::Not: return "!" + n.lhs_->key();
            case Kind::Next: return "X " + n.lhs_->key();
            case Kind::Globally: return "G " + n.lhs_->key();
            case Kind::Finally:
                return "F[" + print_term(n.term_) + " >= " + n.bound_.str() + "] " + n.lhs_->key();
            case Kind::And: return "(" + n.lhs_->key() + " & " + n.rhs_->key() + ")";
            case Kind::Or: return "(" + n.lhs_->key() + " | " + n.rhs_->key() + ")";
            case Kind::Implies: return "(" + n.lhs_->key() + " -> " + n.rhs_->key() + ")";
            case Kind::Until:
                return "(" + n.lhs_->key() + " U[" + print_term(n.term_) + " >= " + n.bound_.str() + "] " +
                       n.rhs_->key() + ")";
            case Kind::FreqUntil:
                return "(" + n.lhs_->key() + " U{" + n.num_.str() + "/" + n.den_.str() + "} " + n.rhs_->key() + ")";
        }
        return {};
    }
    static void set_name(FormulaNode& n, std::string s) { n.name_ = std::move(s); }
    static void set_guard(FormulaNode& n, CounterConstraint g) { n.guard_ = std::move(g); }
    static void set_children(FormulaNode& n, Formula l, Formula r) {
        n.lhs_ = std::move(l);
        n.rhs_ = std::move(r);
    }
    static void set_term(FormulaNode& n, FormulaTerm t, BigInt b) {
        n.term_ = std::move(t);
        n.bound_ = std::move(b);
    }
    static void set_ratio(FormulaNode& n, BigInt a, BigInt b) {
        n.num_ = std::move(a);
        n.den_ = std::move(b);
    }
};

// ---- constructors -------------------------------------------------------

inline Formula f_true() { return FormulaBuilder::make(FormulaBuilder::node(Kind::True)); }
inline Formula f_false() { return FormulaBuilder::make(FormulaBuilder::node(Kind::False)); }

inline Formula f_atom(std::string name) {
    auto n = FormulaBuilder::node(Kind::Atom);
    FormulaBuilder::set_name(n, std::move(name));
    return FormulaBuilder::make(std::move(n));
}

inline Formula f_guard(CounterConstraint g) {
    auto n = FormulaBuilder::node(Kind::Guard);
    g.term = g.term.normalized([](const std::string& s) { return s; });
    FormulaBuilder::set_guard(n, std::move(g));
    return FormulaBuilder::make(std::move(n));
}

inline Formula f_unary(Kind k, Formula a) {
    auto n = FormulaBuilder::node(k);
    FormulaBuilder::set_children(n, std::move(a), nullptr);
    return FormulaBuilder::make(std::move(n));
}

inline Formula f_binary(Kind k, Formula a, Formula b) {
    auto n = FormulaBuilder::node(k);
    FormulaBuilder::set_children(n, std::move(a), std::move(b));
    return FormulaBuilder::make(std::move(n));
}

inline Formula f_not(Formula a) { return f_unary(Kind::Not, std::move(a)); }
inline Formula f_next(Formula a) { return f_unary(Kind::Next, std::move(a)); }
inline Formula f_and(Formula a, Formula b) { return f_binary(Kind::And, std::move(a), std::move(b)); }
inline Formula f_or(Formula a, Formula b) { return f_binary(Kind::Or, std::move(a), std::move(b)); }
inline Formula f_implies(Formula a, Formula b) { return f_binary(Kind::Implies, std::move(a), std::move(b)); }
inline Formula f_globally(Formula a) { return f_unary(Kind::Globally, std::move(a)); }

inline FormulaTerm default_term() {
    FormulaTerm t;
    t.add(1, f_true());
    return t;
}

inline Formula f_until(Formula l, FormulaTerm term, BigInt bound, Formula r) {
    auto n = FormulaBuilder::node(Kind::Until);
    FormulaBuilder::set_children(n, std::move(l), std::move(r));
    FormulaBuilder::set_term(n, term.normalized(formula_key), std::move(bound));
    return FormulaBuilder::make(std::move(n));
}

// Plain `l U r`, i.e. l U[1*true >= 0] r.
inline Formula f_until(Formula l, Formula r) { return f_until(std::move(l), default_term(), 0, std::move(r)); }

inline Formula f_finally(FormulaTerm term, BigInt bound, Formula a) {
    auto n = FormulaBuilder::node(Kind::Finally);
    FormulaBuilder::set_children(n, std::move(a), nullptr);
    FormulaBuilder::set_term(n, term.normalized(formula_key), std::move(bound));
    return FormulaBuilder::make(std::move(n));
}

inline Formula f_finally(Formula a) { return f_finally(default_term(), 0, std::move(a)); }

inline Formula f_freq_until(Formula l, BigInt a, BigInt b, Formula r) {
    auto n = FormulaBuilder::node(Kind::FreqUntil);
    FormulaBuilder::set_children(n, std::move(l), std::move(r));
    FormulaBuilder::set_ratio(n, std::move(a), std::move(b));
    return FormulaBuilder::make(std::move(n));
}

inline std::string print(const Formula& f) { return f->key(); }

// ---- parsing --------------------------------------------------------------

namespace detail {

inline bool is_reserved(const std::string& s) {
    return s == "X" || s == "U" || s == "F" || s == "G" || s == "true" || s == "false";
}

inline std::optional<Relation> accept_relation(TokenStream& ts) {
    if (ts.accept(Tok::Ge)) return Relation::Ge;
    if (ts.accept(Tok::Gt)) return Relation::Gt;
    if (ts.accept(Tok::Le)) return Relation::Le;
    if (ts.accept(Tok::Lt)) return Relation::Lt;
    return std::nullopt;
}

inline BigInt parse_signed_int(TokenStream& ts) {
    bool neg = false;
    while (ts.at(Tok::Minus) || ts.at(Tok::Plus)) {
        if (ts.next().kind == Tok::Minus) neg = !neg;
    }
    BigInt v(ts.expect(Tok::Int, "integer").text);
    return neg ? BigInt(-v) : v;
}

// term := ['-'] mono (('+'|'-') mono)* ; mono := INT '*' atom | INT | atom
// Bare integer monomials are returned separately as a constant offset.
template <class Atom, class AtomParser>
LinearTerm<Atom> parse_linear_term(TokenStream& ts, AtomParser atom, BigInt& constant) {
    LinearTerm<Atom> term;
    constant = 0;
    bool negate = false;
    if (ts.accept(Tok::Minus)) negate = true;
    else ts.accept(Tok::Plus);
    while (true) {
        if (ts.at(Tok::Int)) {
            BigInt c(ts.next().text);
            if (negate) c = -c;
            if (ts.accept(Tok::Star)) {
                term.add(c, atom(ts));
            } else {
                constant += c;
            }
        } else {
            term.add(negate ? BigInt(-1) : BigInt(1), atom(ts));
        }
        if (ts.accept(Tok::Plus)) negate = false;
        else if (ts.accept(Tok::Minus)) negate = true;
        else break;
    }
    return term;
}

template <class Atom, class AtomParser>
Constraint<Atom> parse_constraint(TokenStream& ts, AtomParser atom) {
    BigInt constant;
    LinearTerm<Atom> term = parse_linear_term<Atom>(ts, atom, constant);
    auto rel = accept_relation(ts);
    if (!rel) ts.fail("expected comparison operator");
    BigInt rhs = parse_signed_int(ts);
    return normalize_relation(std::move(term), *rel, rhs - constant);
}

class FormulaParser {
public:
    FormulaParser(TokenStream& ts, const std::set<std::string>* counters) : ts_(ts), counters_(counters) {}

    Formula parse_until() {
        Formula left = parse_implies();
        if (ts_.at_ident("U")) {
            ts_.next();
            if (ts_.accept(Tok::LBracket)) {
                auto c = parse_constraint<Formula>(ts_, [this](TokenStream&) { return parse_term_atom(); });
                ts_.expect(Tok::RBracket, "']'");
                Formula right = parse_until();
                return f_until(left, c.term, c.bound, right);
            }
            if (ts_.accept(Tok::LBrace)) {
                BigInt a(ts_.expect(Tok::Int, "frequency numerator").text);
                ts_.expect(Tok::Slash, "'/'");
                Token den = ts_.expect(Tok::Int, "frequency denominator");
                BigInt b(den.text);
                if (b == 0 || a > b) throw ParseError("frequency a/b requires 0 <= a <= b, b > 0", den.line, den.column);
                ts_.expect(Tok::RBrace, "'}'");
                Formula right = parse_until();
                return f_freq_until(left, a, b, right);
            }
            Formula right = parse_until();
            return f_until(left, right);
        }
        return left;
    }

private:
    Formula parse_implies() {
        Formula left = parse_or();
        if (ts_.accept(Tok::Arrow)) return f_implies(left, parse_implies());
        return left;
    }
    Formula parse_or() {
        Formula left = parse_and();
        while (ts_.accept(Tok::Pipe)) left = f_or(left, parse_and());
        return left;
    }
    Formula parse_and() {
        Formula left = parse_unary();
        while (ts_.accept(Tok::Amp)) left = f_and(left, parse_unary());
        return left;
    }
    Formula parse_unary() {
        if (ts_.accept(Tok::Bang)) return f_not(parse_unary());
        if (ts_.at_ident("X")) {
            ts_.next();
            return f_next(parse_unary());
        }
        if (ts_.at_ident("G")) {
            ts_.next();
            return f_globally(parse_unary());
        }
        if (ts_.at_ident("F")) {
            ts_.next();
            if (ts_.accept(Tok::LBracket)) {
                auto c = parse_constraint<Formula>(ts_, [this](TokenStream&) { return parse_term_atom(); });
                ts_.expect(Tok::RBracket, "']'");
                return f_finally(c.term, c.bound, parse_unary());
            }
            return f_finally(parse_unary());
        }
        return parse_primary();
    }

    std::string parse_counter_name(TokenStream& ts) {
        if (!ts.at(Tok::Ident) || is_reserved(ts.peek().text)) ts.fail("expected counter name");
        Token t = ts.next();
        if (counters_ && !counters_->count(t.text))
            throw ParseError("unknown counter '" + t.text + "'", t.line, t.column);
        return t.text;
    }

    // A counter guard is recognized by a comparison operator following a linear term.
    std::optional<Formula> try_guard() {
        std::size_t start = ts_.position();
        bool plausible = ts_.at(Tok::Int) || ts_.at(Tok::Minus) ||
                         (ts_.at(Tok::Ident) && !is_reserved(ts_.peek().text));
        if (!plausible) return std::nullopt;
        // Scan ahead without consuming: tokens of a linear term then a relation.
        std::size_t k = 0;
        while (true) {
            Tok t = ts_.peek(k).kind;
            if (t == Tok::Int || t == Tok::Star || t == Tok::Plus || t == Tok::Minus ||
                (t == Tok::Ident && !is_reserved(ts_.peek(k).text))) {
                ++k;
                continue;
            }
            break;
        }
        Tok after = ts_.peek(k).kind;
        if (after != Tok::Ge && after != Tok::Gt && after != Tok::Le && after != Tok::Lt) return std::nullopt;
        ts_.rewind(start);
        auto c = parse_constraint<std::string>(ts_, [this](TokenStream& s) { return parse_counter_name(s); });
        return f_guard(std::move(c));
    }

    Formula parse_primary() {
        if (auto g = try_guard()) return *g;
        if (ts_.at_ident("true")) {
            ts_.next();
            return f_true();
        }
        if (ts_.at_ident("false")) {
            ts_.next();
            return f_false();
        }
        if (ts_.at(Tok::Ident) && !is_reserved(ts_.peek().text)) return f_atom(ts_.next().text);
        if (ts_.accept(Tok::LParen)) {
            Formula f = parse_until();
            ts_.expect(Tok::RParen, "')'");
            return f;
        }
        ts_.fail("expected formula");
    }

    Formula parse_term_atom() {
        if (ts_.at_ident("true")) {
            ts_.next();
            return f_true();
        }
        if (ts_.at_ident("false")) {
            ts_.next();
            return f_false();
        }
        if (ts_.at(Tok::Ident) && !is_reserved(ts_.peek().text)) return f_atom(ts_.next().text);
        if (ts_.accept(Tok::LParen)) {
            Formula f = parse_until();
            ts_.expect(Tok::RParen, "')'");
            return f;
        }
        ts_.fail("expected counted formula");
    }

    TokenStream& ts_;
    const std::set<std::string>* counters_;
};

}  // namespace detail

// Parses the surface syntax (sugar is preserved; see desugar()). When
// `counters` is given, counter guards may only mention those names.
inline Formula parse_formula(std::string_view text, const std::set<std::string>* counters = nullptr) {
    TokenStream ts(tokenize(text));
    detail::FormulaParser p(ts, counters);
    Formula f = p.parse_until();
    if (!ts.at(Tok::End)) ts.fail("unexpected trailing input");
    return f;
}

// Parses `term REL int` over counter names, e.g. "c - 2*d >= 0".
inline CounterConstraint parse_counter_constraint(std::string_view text) {
    TokenStream ts(tokenize(text));
    auto c = detail::parse_constraint<std::string>(ts, [](TokenStream& s) {
        if (!s.at(Tok::Ident) || detail::is_reserved(s.peek().text)) s.fail("expected counter name");
        return s.next().text;
    });
    if (!ts.at(Tok::End)) ts.fail("unexpected trailing input");
    c.term = c.term.normalized([](const std::string& s) { return s; });
    return c;
}

// ---- desugaring -----------------------------------------------------------

inline FormulaTerm desugar_term(const FormulaTerm& t);

inline Formula desugar(const Formula& f) {
    switch (f->kind()) {
        case Kind::True:
        case Kind::Atom:
        case Kind::Guard: return f;
        case Kind::False: return f_not(f_true());
        case Kind::Not: return f_not(desugar(f->operand()));
        case Kind::Next: return f_next(desugar(f->operand()));
        case Kind::And: return f_and(desugar(f->lhs()), desugar(f->rhs()));
        case Kind::Or: return f_not(f_and(f_not(desugar(f->lhs())), f_not(desugar(f->rhs()))));
        case Kind::Implies: return f_not(f_and(desugar(f->lhs()), f_not(desugar(f->rhs()))));
        case Kind::Until: return f_until(desugar(f->lhs()), desugar_term(f->term()), f->bound(), desugar(f->rhs()));
        case Kind::Finally: return f_until(f_true(), desugar_term(f->term()), f->bound(), desugar(f->operand()));
        case Kind::Globally: return f_not(f_until(f_true(), default_term(), 0, f_not(desugar(f->operand()))));
        case Kind::FreqUntil: {
            FormulaTerm t;
            t.add(f->denominator(), desugar(f->lhs()));
            t.add(-f->numerator(), f_true());
            return f_until(f_true(), t, 0, desugar(f->rhs()));
        }
    }
    return f;
}

inline FormulaTerm desugar_term(const FormulaTerm& t) {
    FormulaTerm out;
    for (const auto& m : t) out.add(m.coeff, desugar(m.atom));
    return out.normalized(formula_key);
}

inline bool is_core_formula(const Formula& f) {
    if (!is_core(f->kind())) return false;
    switch (f->kind()) {
        case Kind::Not:
        case Kind::Next: return is_core_formula(f->operand());
        case Kind::And: return is_core_formula(f->lhs()) && is_core_formula(f->rhs());
        case Kind::Until:
            for (const auto& m : f->term())
                if (!is_core_formula(m.atom)) return false;
            return is_core_formula(f->lhs()) && is_core_formula(f->rhs());
        default: return true;
    }
}

// Parse followed by desugar.
inline Formula parse_core_formula(std::string_view text, const std::set<std::string>* counters = nullptr) {
    return desugar(parse_formula(text, counters));
}

// ---- closure ---------------------------------------------------------------

// sub(f) in bottom-up order: every strict subformula precedes its parents.
class Closure {
public:
    Closure() = default;
    explicit Closure(const Formula& root) { visit(root); }

    const std::vector<Formula>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    const Formula& operator[](std::size_t i) const { return items_[i]; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    bool contains(const Formula& f) const { return index_.count(f->key()) > 0; }
    std::size_t index_of(const Formula& f) const {
        auto it = index_.find(f->key());
        if (it == index_.end()) throw Error("formula not in closure: " + f->key());
        return it->second;
    }

private:
    void visit(const Formula& f) {
        if (index_.count(f->key())) return;
        switch (f->kind()) {
            case Kind::Finally:
                for (const auto& m : f->term()) visit(m.atom);
                visit(f->operand());
                break;
            case Kind::Not:
            case Kind::Next:
            case Kind::Globally: visit(f->operand()); break;
            case Kind::And:
            case Kind::Or:
            case Kind::Implies:
            case Kind::FreqUntil:
                visit(f->lhs());
                visit(f->rhs());
                break;
            case Kind::Until:
                visit(f->lhs());
                for (const auto& m : f->term()) visit(m.atom);
                visit(f->rhs());
                break;
            default: break;
        }
        index_.emplace(f->key(), items_.size());
        items_.push_back(f);
    }

    std::vector<Formula> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<Formula> subformulae(const Formula& f) { return Closure(f).items(); }

// Occurrence polarity of each subformula (bit 1: positive, bit 2: negative).
// Counted atoms inherit the sign of their coefficient.
enum : unsigned { kPositive = 1u, kNegative = 2u };

inline std::map<std::string, unsigned> polarity(const Formula& root) {
    std::map<std::string, unsigned> out;
    std::vector<std::pair<Formula, unsigned>> stack{{root, kPositive}};
    auto flip = [](unsigned p) { return ((p & kPositive) ? kNegative : 0u) | ((p & kNegative) ? kPositive : 0u); };
    while (!stack.empty()) {
        auto [f, pol] = stack.back();
        stack.pop_back();
        unsigned& have = out[f->key()];
        if ((have | pol) == have && have != 0) continue;
        have |= pol;
        switch (f->kind()) {
            case Kind::Not: stack.push_back({f->operand(), flip(pol)}); break;
            case Kind::Next: stack.push_back({f->operand(), pol}); break;
            case Kind::And:
                stack.push_back({f->lhs(), pol});
                stack.push_back({f->rhs(), pol});
                break;
            case Kind::Until:
                stack.push_back({f->lhs(), pol});
                stack.push_back({f->rhs(), pol});
                for (const auto& m : f->term()) {
                    if (m.coeff > 0) stack.push_back({m.atom, pol});
                    else if (m.coeff < 0) stack.push_back({m.atom, flip(pol)});
                }
                break;
            default:
                if (!is_core(f->kind())) throw Error("polarity() expects a desugared formula");
                break;
        }
    }
    return out;
}

// ---- counting --------------------------------------------------------------

// Label -> occurrence count. Keys are formula keys (propositions use their name).
using CountFunction = std::map<std::string, BigInt>;

inline BigInt term_eval(const FormulaTerm& t, const CountFunction& counts) {
    return t.evaluate([&](const Formula& atom) -> const BigInt& {
        auto it = counts.find(atom->key());
        if (it == counts.end()) throw Error("no count for term atom '" + atom->key() + "'");
        return it->second;
    });
}

// Counter names mentioned in guards anywhere inside f.
inline std::set<std::string> guard_counters(const Formula& f) {
    std::set<std::string> out;
    for (const auto& g : subformulae(f))
        if (g->kind() == Kind::Guard)
            for (const auto& m : g->guard().term) out.insert(m.atom);
    return out;
}

}  // namespace flatcheck
