#pragma once

#include "flatcheck/common.hpp"

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace flatcheck {

enum class Sort { Int, Bool };

enum class Op { IntConst, BoolConst, Var, Add, Mul, Eq, Ge, Gt, Le, Lt, Not, And, Or, Implies, Iff, Ite };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

// Quantifier-free linear integer/boolean term. Mul is always (constant * expr).
struct ExprNode {
    Op op;
    Sort sort;
    BigInt value;      // IntConst; the factor of Mul
    bool truth = false;  // BoolConst
    std::string name;  // Var
    std::vector<Expr> args;
};

namespace qpa {

inline Expr mk(Op op, Sort sort, std::vector<Expr> args = {}) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->sort = sort;
    n->args = std::move(args);
    return n;
}

inline Expr lit(const BigInt& v) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::IntConst;
    n->sort = Sort::Int;
    n->value = v;
    return n;
}

inline Expr lit(long long v) { return lit(BigInt(v)); }

inline Expr boolean(bool b) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::BoolConst;
    n->sort = Sort::Bool;
    n->truth = b;
    return n;
}

inline Expr tru() { return boolean(true); }
inline Expr fls() { return boolean(false); }

inline bool is_int_const(const Expr& e) { return e->op == Op::IntConst; }
inline bool is_true(const Expr& e) { return e->op == Op::BoolConst && e->truth; }
inline bool is_false(const Expr& e) { return e->op == Op::BoolConst && !e->truth; }

inline Expr var(const std::string& name, Sort sort) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Var;
    n->sort = sort;
    n->name = name;
    return n;
}

inline void require(const Expr& e, Sort s, const char* where) {
    if (e->sort != s) throw Error(std::string("sort mismatch in ") + where);
}

inline Expr add(const std::vector<Expr>& xs) {
    std::vector<Expr> kept;
    BigInt c = 0;
    for (const auto& x : xs) {
        require(x, Sort::Int, "+");
        if (is_int_const(x)) c += x->value;
        else if (x->op == Op::Add)
            for (const auto& y : x->args) {
                if (is_int_const(y)) c += y->value;
                else kept.push_back(y);
            }
        else kept.push_back(x);
    }
    if (c != 0 || kept.empty()) kept.push_back(lit(c));
    if (kept.size() == 1) return kept.front();
    return mk(Op::Add, Sort::Int, std::move(kept));
}

inline Expr add(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, b}); }

inline Expr mul(const BigInt& k, const Expr& e) {
    require(e, Sort::Int, "*");
    if (k == 0) return lit(0);
    if (k == 1) return e;
    if (is_int_const(e)) return lit(k * e->value);
    if (e->op == Op::Mul) return mul(k * e->value, e->args[0]);
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Mul;
    n->sort = Sort::Int;
    n->value = k;
    n->args = {e};
    return n;
}

inline Expr neg(const Expr& e) { return mul(-1, e); }
inline Expr sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }

inline Expr cmp(Op op, const Expr& a, const Expr& b) {
    require(a, Sort::Int, "comparison");
    require(b, Sort::Int, "comparison");
    if (is_int_const(a) && is_int_const(b)) {
        const BigInt &x = a->value, &y = b->value;
        switch (op) {
            case Op::Eq: return boolean(x == y);
            case Op::Ge: return boolean(x >= y);
            case Op::Gt: return boolean(x > y);
            case Op::Le: return boolean(x <= y);
            case Op::Lt: return boolean(x < y);
            default: break;
        }
    }
    return mk(op, Sort::Bool, {a, b});
}

inline Expr eq(const Expr& a, const Expr& b) {
    if (a->sort == Sort::Bool) {
        require(b, Sort::Bool, "=");
        if (a->op == Op::BoolConst && b->op == Op::BoolConst) return boolean(a->truth == b->truth);
        return mk(Op::Iff, Sort::Bool, {a, b});
    }
    return cmp(Op::Eq, a, b);
}
inline Expr ge(const Expr& a, const Expr& b) { return cmp(Op::Ge, a, b); }
inline Expr gt(const Expr& a, const Expr& b) { return cmp(Op::Gt, a, b); }
inline Expr le(const Expr& a, const Expr& b) { return cmp(Op::Le, a, b); }
inline Expr lt(const Expr& a, const Expr& b) { return cmp(Op::Lt, a, b); }

inline Expr not_(const Expr& a) {
    require(a, Sort::Bool, "not");
    if (a->op == Op::BoolConst) return boolean(!a->truth);
    if (a->op == Op::Not) return a->args[0];
    return mk(Op::Not, Sort::Bool, {a});
}

inline Expr and_(const std::vector<Expr>& xs) {
    std::vector<Expr> kept;
    for (const auto& x : xs) {
        require(x, Sort::Bool, "and");
        if (is_false(x)) return fls();
        if (is_true(x)) continue;
        if (x->op == Op::And) kept.insert(kept.end(), x->args.begin(), x->args.end());
        else kept.push_back(x);
    }
    if (kept.empty()) return tru();
    if (kept.size() == 1) return kept.front();
    return mk(Op::And, Sort::Bool, std::move(kept));
}

inline Expr or_(const std::vector<Expr>& xs) {
    std::vector<Expr> kept;
    for (const auto& x : xs) {
        require(x, Sort::Bool, "or");
        if (is_true(x)) return tru();
        if (is_false(x)) continue;
        if (x->op == Op::Or) kept.insert(kept.end(), x->args.begin(), x->args.end());
        else kept.push_back(x);
    }
    if (kept.empty()) return fls();
    if (kept.size() == 1) return kept.front();
    return mk(Op::Or, Sort::Bool, std::move(kept));
}

inline Expr and_(const Expr& a, const Expr& b) { return and_(std::vector<Expr>{a, b}); }
inline Expr or_(const Expr& a, const Expr& b) { return or_(std::vector<Expr>{a, b}); }

inline Expr implies(const Expr& a, const Expr& b) {
    require(a, Sort::Bool, "=>");
    require(b, Sort::Bool, "=>");
    if (is_false(a) || is_true(b)) return tru();
    if (is_true(a)) return b;
    if (is_false(b)) return not_(a);
    return mk(Op::Implies, Sort::Bool, {a, b});
}

inline Expr iff(const Expr& a, const Expr& b) {
    require(a, Sort::Bool, "iff");
    require(b, Sort::Bool, "iff");
    if (is_true(a)) return b;
    if (is_true(b)) return a;
    if (is_false(a)) return not_(b);
    if (is_false(b)) return not_(a);
    return mk(Op::Iff, Sort::Bool, {a, b});
}

inline Expr ite(const Expr& c, const Expr& a, const Expr& b) {
    require(c, Sort::Bool, "ite");
    if (a->sort != b->sort) throw Error("sort mismatch in ite branches");
    if (is_true(c)) return a;
    if (is_false(c)) return b;
    if (a->sort == Sort::Bool) {
        if (is_true(a) && is_false(b)) return c;
        if (is_false(a) && is_true(b)) return not_(c);
        if (is_false(b)) return and_(c, a);
        if (is_true(b)) return implies(c, a);
        if (is_false(a)) return and_(not_(c), b);
        if (is_true(a)) return or_(c, b);
    }
    return mk(Op::Ite, a->sort, {c, a, b});
}

}  // namespace qpa

struct Declaration {
    std::string name;
    Sort sort;
};

struct Assertion {
    std::string family;
    Expr expr;
};

struct Value {
    bool is_bool = false;
    bool truth = false;
    BigInt number;

    static Value of(bool b) {
        Value v;
        v.is_bool = true;
        v.truth = b;
        return v;
    }
    static Value of(BigInt n) {
        Value v;
        v.number = std::move(n);
        return v;
    }
    bool operator==(const Value& o) const {
        return is_bool == o.is_bool && (is_bool ? truth == o.truth : number == o.number);
    }
};

using Model = std::unordered_map<std::string, Value>;

// Solver-agnostic list of declarations and assertions.
class QpaScript {
public:
    Expr declare(const std::string& name, Sort sort) {
        if (index_.count(name)) throw Error("duplicate declaration '" + name + "'");
        index_.emplace(name, decls_.size());
        decls_.push_back({name, sort});
        return qpa::var(name, sort);
    }
    Expr int_var(const std::string& name) { return declare(name, Sort::Int); }
    Expr bool_var(const std::string& name) { return declare(name, Sort::Bool); }

    bool declared(const std::string& name) const { return index_.count(name) > 0; }
    Expr ref(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("undeclared variable '" + name + "'");
        return qpa::var(name, decls_[it->second].sort);
    }
    Sort sort_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("undeclared variable '" + name + "'");
        return decls_[it->second].sort;
    }

    void assert_(const std::string& family, const Expr& e) {
        qpa::require(e, Sort::Bool, "assertion");
        if (qpa::is_true(e)) return;
        assertions_.push_back({family, e});
    }

    const std::vector<Declaration>& declarations() const { return decls_; }
    const std::vector<Assertion>& assertions() const { return assertions_; }

    std::map<std::string, std::string>& metadata() { return meta_; }
    const std::map<std::string, std::string>& metadata() const { return meta_; }

private:
    std::vector<Declaration> decls_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Assertion> assertions_;
    std::map<std::string, std::string> meta_;
};

inline Value evaluate(const Expr& e, const Model& m) {
    auto num = [&](const Expr& x) { return evaluate(x, m).number; };
    auto tv = [&](const Expr& x) { return evaluate(x, m).truth; };
    switch (e->op) {
        case Op::IntConst: return Value::of(e->value);
        case Op::BoolConst: return Value::of(e->truth);
        case Op::Var: {
            auto it = m.find(e->name);
            if (it == m.end()) throw Error("model has no value for '" + e->name + "'");
            return it->second;
        }
        case Op::Add: {
            BigInt s = 0;
            for (const auto& a : e->args) s += num(a);
            return Value::of(s);
        }
        case Op::Mul: return Value::of(BigInt(e->value * num(e->args[0])));
        case Op::Eq: return Value::of(num(e->args[0]) == num(e->args[1]));
        case Op::Ge: return Value::of(num(e->args[0]) >= num(e->args[1]));
        case Op::Gt: return Value::of(num(e->args[0]) > num(e->args[1]));
        case Op::Le: return Value::of(num(e->args[0]) <= num(e->args[1]));
        case Op::Lt: return Value::of(num(e->args[0]) < num(e->args[1]));
        case Op::Not: return Value::of(!tv(e->args[0]));
        case Op::And:
            for (const auto& a : e->args)
                if (!tv(a)) return Value::of(false);
            return Value::of(true);
        case Op::Or:
            for (const auto& a : e->args)
                if (tv(a)) return Value::of(true);
            return Value::of(false);
        case Op::Implies: return Value::of(!tv(e->args[0]) || tv(e->args[1]));
        case Op::Iff: return Value::of(tv(e->args[0]) == tv(e->args[1]));
        case Op::Ite: return tv(e->args[0]) ? evaluate(e->args[1], m) : evaluate(e->args[2], m);
    }
    throw Error("bad expression");
}

// Families of assertions the model violates (empty when the model satisfies the script).
inline std::vector<std::string> violated(const QpaScript& s, const Model& m) {
    std::vector<std::string> out;
    for (const auto& a : s.assertions())
        if (!evaluate(a.expr, m).truth) out.push_back(a.family);
    return out;
}

struct ScriptSize {
    std::size_t declarations = 0;
    std::size_t nodes = 0;
    std::size_t total() const { return declarations + nodes; }
};

inline std::size_t node_count(const Expr& e, std::unordered_map<const ExprNode*, std::size_t>& memo) {
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    std::size_t n = 1;
    for (const auto& a : e->args) n += node_count(a, memo);
    memo.emplace(e.get(), n);
    return n;
}

// Nodes are counted per occurrence, i.e. the size of the printed tree.
inline ScriptSize script_size(const QpaScript& s) {
    std::unordered_map<const ExprNode*, std::size_t> memo;
    ScriptSize z;
    z.declarations = s.declarations().size();
    for (const auto& a : s.assertions()) z.nodes += node_count(a.expr, memo);
    return z;
}

// True when no product of two non-constant terms occurs anywhere.
inline bool is_linear(const Expr& e) {
    if (e->op == Op::Mul && (e->args.size() != 1 || e->args[0]->sort != Sort::Int)) return false;
    for (const auto& a : e->args)
        if (!is_linear(a)) return false;
    return true;
}

inline void collect_vars(const Expr& e, std::vector<std::string>& out) {
    if (e->op == Op::Var) out.push_back(e->name);
    for (const auto& a : e->args) collect_vars(a, out);
}

}  // namespace flatcheck
