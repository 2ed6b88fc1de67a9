#pragma once

#include "flatcheck/qpa.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace flatcheck {

inline void write_smt(std::ostream& os, const Expr& e) {
    auto nary = [&](const char* op) {
        os << '(' << op;
        for (const auto& a : e->args) {
            os << ' ';
            write_smt(os, a);
        }
        os << ')';
    };
    switch (e->op) {
        case Op::IntConst:
            if (e->value < 0) os << "(- " << BigInt(-e->value).str() << ')';
            else os << e->value.str();
            return;
        case Op::BoolConst: os << (e->truth ? "true" : "false"); return;
        case Op::Var: os << e->name; return;
        case Op::Add: nary("+"); return;
        case Op::Mul:
            os << "(* ";
            write_smt(os, qpa::lit(e->value));
            os << ' ';
            write_smt(os, e->args[0]);
            os << ')';
            return;
        case Op::Eq: nary("="); return;
        case Op::Ge: nary(">="); return;
        case Op::Gt: nary(">"); return;
        case Op::Le: nary("<="); return;
        case Op::Lt: nary("<"); return;
        case Op::Not: nary("not"); return;
        case Op::And: nary("and"); return;
        case Op::Or: nary("or"); return;
        case Op::Implies: nary("=>"); return;
        case Op::Iff: nary("="); return;
        case Op::Ite: nary("ite"); return;
    }
}

inline std::string to_smt(const Expr& e) {
    std::ostringstream os;
    write_smt(os, e);
    return os.str();
}

// SMT-LIB 2 text: QF_LIA, declarations, assertions grouped by family comments,
// then (check-sat) and (get-model).
inline void emit_smtlib(std::ostream& os, const QpaScript& s) {
    os << "(set-option :produce-models true)\n(set-logic QF_LIA)\n";
    for (const auto& [k, v] : s.metadata()) os << "; " << k << ": " << v << '\n';
    for (const auto& d : s.declarations())
        os << "(declare-fun " << d.name << " () " << (d.sort == Sort::Int ? "Int" : "Bool") << ")\n";
    std::string last;
    for (const auto& a : s.assertions()) {
        if (a.family != last) {
            os << "; " << a.family << '\n';
            last = a.family;
        }
        os << "(assert ";
        write_smt(os, a.expr);
        os << ")\n";
    }
    os << "(check-sat)\n";
    if (!s.declarations().empty()) os << "(get-model)\n";
}

inline std::string emit_smtlib(const QpaScript& s) {
    std::ostringstream os;
    emit_smtlib(os, s);
    return os.str();
}

// ---- S-expressions -----------------------------------------------------------

struct SExpr {
    bool is_atom = true;
    std::string atom;
    std::vector<SExpr> list;
};

class SExprReader {
public:
    explicit SExprReader(std::string_view text) : t_(text) {}

    bool at_end() {
        skip();
        return i_ >= t_.size();
    }

    SExpr read() {
        skip();
        if (i_ >= t_.size()) throw Error("unexpected end of solver output");
        char c = t_[i_];
        if (c == '(') {
            ++i_;
            SExpr e;
            e.is_atom = false;
            while (true) {
                skip();
                if (i_ >= t_.size()) throw Error("unbalanced parenthesis in solver output");
                if (t_[i_] == ')') {
                    ++i_;
                    return e;
                }
                e.list.push_back(read());
            }
        }
        if (c == ')') throw Error("unexpected ')' in solver output");
        SExpr e;
        if (c == '|') {
            std::size_t j = t_.find('|', i_ + 1);
            if (j == std::string_view::npos) throw Error("unterminated quoted symbol");
            e.atom = std::string(t_.substr(i_ + 1, j - i_ - 1));
            i_ = j + 1;
            return e;
        }
        if (c == '"') {
            std::size_t j = i_ + 1;
            while (j < t_.size()) {
                if (t_[j] == '"') {
                    if (j + 1 < t_.size() && t_[j + 1] == '"') {
                        j += 2;
                        continue;
                    }
                    break;
                }
                ++j;
            }
            e.atom = std::string(t_.substr(i_, j + 1 - i_));
            i_ = j + 1;
            return e;
        }
        std::size_t j = i_;
        while (j < t_.size() && !std::isspace(static_cast<unsigned char>(t_[j])) && t_[j] != '(' && t_[j] != ')') ++j;
        e.atom = std::string(t_.substr(i_, j - i_));
        i_ = j;
        return e;
    }

private:
    void skip() {
        while (i_ < t_.size()) {
            if (std::isspace(static_cast<unsigned char>(t_[i_]))) {
                ++i_;
            } else if (t_[i_] == ';') {
                while (i_ < t_.size() && t_[i_] != '\n') ++i_;
            } else {
                break;
            }
        }
    }
    std::string_view t_;
    std::size_t i_ = 0;
};

// Integer or boolean literal, including (- k).
inline Value parse_value(const SExpr& e) {
    if (e.is_atom) {
        if (e.atom == "true") return Value::of(true);
        if (e.atom == "false") return Value::of(false);
        if (!e.atom.empty() && std::all_of(e.atom.begin(), e.atom.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return Value::of(BigInt(e.atom));
        throw Error("unparseable value '" + e.atom + "'");
    }
    if (e.list.size() == 2 && e.list[0].is_atom && e.list[0].atom == "-") {
        Value v = parse_value(e.list[1]);
        if (v.is_bool) throw Error("unparseable value: negated boolean");
        return Value::of(BigInt(-v.number));
    }
    throw Error("unparseable value expression");
}

struct ParsedModel {
    Model model;
    std::vector<std::string> warnings;
};

// Accepts `(get-model)` output (define-fun entries, optionally wrapped in
// `model`) and `(get-value)` output (pairs). Every declaration must be assigned.
inline ParsedModel parse_model(std::string_view text, const QpaScript& script) {
    ParsedModel out;
    SExprReader r(text);
    auto take = [&](const std::string& name, const Value& v) {
        if (!script.declared(name)) {
            out.warnings.push_back("ignoring unknown model entry '" + name + "'");
            return;
        }
        Sort s = script.sort_of(name);
        if ((s == Sort::Bool) != v.is_bool) throw Error("value of '" + name + "' has the wrong sort");
        out.model[name] = v;
    };
    while (!r.at_end()) {
        SExpr top = r.read();
        if (top.is_atom) continue;  // e.g. a stray "sat"
        for (const auto& entry : top.list) {
            if (entry.is_atom) continue;  // "model" keyword
            const auto& L = entry.list;
            if (L.size() == 5 && L[0].is_atom && L[0].atom == "define-fun") {
                if (!L[2].is_atom && !L[2].list.empty()) continue;  // function with arguments
                take(L[1].atom, parse_value(L[4]));
            } else if (L.size() == 2 && L[0].is_atom) {
                take(L[0].atom, parse_value(L[1]));
            } else {
                throw Error("unexpected model entry");
            }
        }
    }
    for (const auto& d : script.declarations())
        if (!out.model.count(d.name)) throw Error("model misses variable '" + d.name + "'");
    return out;
}

}  // namespace flatcheck
