#pragma once

#include "flatcheck/common.hpp"
#include "flatcheck/formula.hpp"
#include "flatcheck/linear_term.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flatcheck {

using StateId = std::size_t;
using TransitionId = std::size_t;
using Valuation = std::vector<BigInt>;

struct Transition {
    TransitionId id = 0;
    StateId source = 0;
    StateId target = 0;
    Valuation update;  // one entry per declared counter
    std::vector<CounterConstraint> guards;
};

struct Configuration {
    StateId state = 0;
    Valuation valuation;

    bool operator==(const Configuration&) const = default;
};

class CounterSystem {
public:
    StateId add_state(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        StateId id = names_.size();
        names_.push_back(name);
        labels_.emplace_back();
        index_.emplace(name, id);
        return id;
    }

    void set_initial(StateId s) { initial_ = s; }
    void add_label(StateId s, const std::string& prop) { labels_.at(s).insert(prop); }

    std::size_t add_counter(const std::string& name) {
        auto it = std::find(counters_.begin(), counters_.end(), name);
        if (it != counters_.end()) return static_cast<std::size_t>(it - counters_.begin());
        counters_.push_back(name);
        for (auto& t : transitions_) t.update.push_back(0);
        return counters_.size() - 1;
    }

    // Unmentioned counters get update 0. Counter names must already be declared.
    TransitionId add_transition(StateId src, StateId tgt, const std::map<std::string, BigInt>& update = {},
                                std::vector<CounterConstraint> guards = {}) {
        Transition t;
        t.id = transitions_.size();
        t.source = src;
        t.target = tgt;
        t.update.assign(counters_.size(), 0);
        for (const auto& [name, k] : update) t.update.at(counter_index(name)) += k;
        for (auto& g : guards) {
            for (const auto& m : g.term) counter_index(m.atom);
            g.term = g.term.normalized([](const std::string& s) { return s; });
        }
        t.guards = std::move(guards);
        transitions_.push_back(std::move(t));
        return transitions_.back().id;
    }

    std::size_t num_states() const { return names_.size(); }
    const std::string& state_name(StateId s) const { return names_.at(s); }
    const std::vector<std::string>& state_names() const { return names_; }
    StateId initial() const {
        if (!initial_) throw Error("no initial state");
        return *initial_;
    }
    bool has_initial() const { return initial_.has_value(); }
    const std::set<std::string>& labels(StateId s) const { return labels_.at(s); }
    const std::vector<std::string>& counters() const { return counters_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const Transition& transition(TransitionId t) const { return transitions_.at(t); }

    StateId state_index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("unknown state '" + name + "'");
        return it->second;
    }
    bool has_state(const std::string& name) const { return index_.count(name) > 0; }

    std::size_t counter_index(const std::string& name) const {
        auto it = std::find(counters_.begin(), counters_.end(), name);
        if (it == counters_.end()) throw Error("undeclared counter '" + name + "'");
        return static_cast<std::size_t>(it - counters_.begin());
    }

    std::set<std::string> propositions() const {
        std::set<std::string> out;
        for (const auto& l : labels_) out.insert(l.begin(), l.end());
        return out;
    }

    std::vector<TransitionId> outgoing(StateId s) const {
        std::vector<TransitionId> out;
        for (const auto& t : transitions_)
            if (t.source == s) out.push_back(t.id);
        return out;
    }

    void validate() const {
        if (!initial_) throw Error("no initial state");
        if (*initial_ >= names_.size()) throw Error("initial state out of range");
        for (const auto& t : transitions_) {
            if (t.source >= names_.size() || t.target >= names_.size())
                throw Error("transition " + std::to_string(t.id) + " has a dangling endpoint");
            if (t.update.size() != counters_.size())
                throw Error("transition " + std::to_string(t.id) + " update is not total");
            for (const auto& g : t.guards)
                for (const auto& m : g.term) counter_index(m.atom);
        }
    }

    Valuation zero_valuation() const { return Valuation(counters_.size(), 0); }

    BigInt eval(const CounterTerm& term, const Valuation& v) const {
        return term.evaluate([&](const std::string& c) -> const BigInt& { return v.at(counter_index(c)); });
    }

    bool guards_hold(const Transition& t, const Valuation& v) const {
        for (const auto& g : t.guards)
            if (eval(g.term, v) < g.bound) return false;
        return true;
    }

    Valuation apply(const Transition& t, const Valuation& v) const {
        Valuation out = v;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += t.update[c];
        return out;
    }

    // One run step: target state matches, valuation' = valuation + update and
    // the guards hold on valuation'.
    bool is_step(const Configuration& from, const Transition& t, const Configuration& to) const {
        if (t.source != from.state || t.target != to.state) return false;
        Valuation v = apply(t, from.valuation);
        return v == to.valuation && guards_hold(t, v);
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, StateId> index_;
    std::optional<StateId> initial_;
    std::vector<std::set<std::string>> labels_;
    std::vector<std::string> counters_;
    std::vector<Transition> transitions_;
};

// ---- graph utilities ---------------------------------------------------------

inline std::set<StateId> successors(const CounterSystem& S, StateId s) {
    if (s >= S.num_states()) throw Error("unknown state " + std::to_string(s));
    std::set<StateId> out;
    for (const auto& t : S.transitions())
        if (t.source == s) out.insert(t.target);
    return out;
}

inline std::set<StateId> suc_star(const CounterSystem& S, StateId s) {
    if (s >= S.num_states()) throw Error("unknown state " + std::to_string(s));
    std::set<StateId> seen{s};
    std::vector<StateId> todo{s};
    while (!todo.empty()) {
        StateId u = todo.back();
        todo.pop_back();
        for (StateId v : successors(S, u))
            if (seen.insert(v).second) todo.push_back(v);
    }
    return seen;
}

// Loops are compared as transition sequences, so two parallel self-loops with
// different updates count as two loops.
struct SimpleLoop {
    std::vector<StateId> states;           // s0 ... s_{k-1}, closing back to s0
    std::vector<TransitionId> transitions;  // transitions[i] : states[i] -> states[i+1 mod k]
};

struct FlatVerdict {
    bool flat = true;
    std::optional<StateId> state;
    SimpleLoop first, second;
};

inline std::vector<std::size_t> scc_ids(const CounterSystem& S) {
    // Tarjan, iterative.
    std::size_t n = S.num_states();
    std::vector<std::vector<StateId>> adj(n);
    for (const auto& t : S.transitions()) adj[t.source].push_back(t.target);
    std::vector<long> idx(n, -1), low(n, 0);
    std::vector<bool> on(n, false);
    std::vector<std::size_t> comp(n, 0);
    std::vector<StateId> stack;
    long counter = 0;
    std::size_t ncomp = 0;
    for (StateId root = 0; root < n; ++root) {
        if (idx[root] >= 0) continue;
        std::vector<std::pair<StateId, std::size_t>> call{{root, 0}};
        idx[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = true;
        while (!call.empty()) {
            auto& [u, k] = call.back();
            if (k < adj[u].size()) {
                StateId v = adj[u][k++];
                if (idx[v] < 0) {
                    idx[v] = low[v] = counter++;
                    stack.push_back(v);
                    on[v] = true;
                    call.push_back({v, 0});
                } else if (on[v]) {
                    low[u] = std::min(low[u], idx[v]);
                }
                continue;
            }
            if (low[u] == idx[u]) {
                while (true) {
                    StateId w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                    if (w == u) break;
                }
                ++ncomp;
            }
            StateId done = u;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

// Shortest transition path from `from` to `to` staying inside component `c`.
inline std::optional<std::vector<TransitionId>> path_within(const CounterSystem& S, const std::vector<std::size_t>& comp,
                                                            StateId from, StateId to) {
    if (from == to) return std::vector<TransitionId>{};
    std::vector<std::optional<TransitionId>> via(S.num_states());
    std::vector<bool> seen(S.num_states(), false);
    std::deque<StateId> q{from};
    seen[from] = true;
    while (!q.empty()) {
        StateId u = q.front();
        q.pop_front();
        for (const auto& t : S.transitions()) {
            if (t.source != u || comp[t.target] != comp[from] || seen[t.target]) continue;
            seen[t.target] = true;
            via[t.target] = t.id;
            if (t.target == to) {
                std::vector<TransitionId> path;
                StateId cur = to;
                while (cur != from) {
                    path.push_back(*via[cur]);
                    cur = S.transition(*via[cur]).source;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            q.push_back(t.target);
        }
    }
    return std::nullopt;
}

inline SimpleLoop make_loop(const CounterSystem& S, std::vector<TransitionId> ts) {
    SimpleLoop l;
    for (TransitionId t : ts) l.states.push_back(S.transition(t).source);
    l.transitions = std::move(ts);
    return l;
}

// Flat iff every non-trivial SCC is a single simple cycle.
inline FlatVerdict is_flat(const CounterSystem& S) {
    auto comp = scc_ids(S);
    std::map<std::size_t, std::size_t> states_in, edges_in;
    for (StateId s = 0; s < S.num_states(); ++s) ++states_in[comp[s]];
    for (const auto& t : S.transitions())
        if (comp[t.source] == comp[t.target]) ++edges_in[comp[t.source]];
    for (const auto& [c, e] : edges_in) {
        if (e <= states_in[c]) continue;
        // Some state has two internal outgoing transitions.
        for (StateId v = 0; v < S.num_states(); ++v) {
            if (comp[v] != c) continue;
            std::vector<TransitionId> out;
            for (const auto& t : S.transitions())
                if (t.source == v && comp[t.target] == c) out.push_back(t.id);
            if (out.size() < 2) continue;
            FlatVerdict r;
            r.flat = false;
            r.state = v;
            SimpleLoop* slots[2] = {&r.first, &r.second};
            for (int k = 0; k < 2; ++k) {
                std::vector<TransitionId> ts{out[k]};
                auto back = path_within(S, comp, S.transition(out[k]).target, v);
                ts.insert(ts.end(), back->begin(), back->end());
                *slots[k] = make_loop(S, std::move(ts));
            }
            return r;
        }
    }
    return {};
}

// Per-label occurrence counts along `path`. Without `state_labels` a state is
// labelled by its propositions plus `true`. In strict mode consecutive states
// must be connected by a transition.
inline CountFunction label_accumulate(const CounterSystem& S, const std::vector<StateId>& path,
                                      const std::vector<std::string>& labels,
                                      const std::function<bool(std::size_t pos, const std::string&)>& has = nullptr,
                                      bool strict = false) {
    CountFunction out;
    for (const auto& l : labels) out[l] = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] >= S.num_states()) throw Error("unknown state " + std::to_string(path[i]));
        if (strict && i + 1 < path.size() && !successors(S, path[i]).count(path[i + 1]))
            throw Error("not a path: no transition " + S.state_name(path[i]) + " -> " + S.state_name(path[i + 1]));
        for (const auto& l : labels) {
            bool in = has ? has(i, l) : (l == "true" || S.labels(path[i]).count(l) > 0);
            if (in) ++out[l];
        }
    }
    return out;
}

// ---- DOT dialect ---------------------------------------------------------------

namespace dot {

struct Tok {
    enum Kind { End, Id, LBrace, RBrace, LBracket, RBracket, Arrow, Equal, Semi, Comma } kind = End;
    std::string text;
    std::size_t line = 1, column = 1;
};

inline std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    std::size_t i = 0, line = 1, col = 1;
    auto step = [&] {
        if (s[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            step();
            continue;
        }
        if (c == '#' && (col == 1)) {
            while (i < s.size() && s[i] != '\n') step();
            continue;
        }
        if (s.substr(i, 2) == "//") {
            while (i < s.size() && s[i] != '\n') step();
            continue;
        }
        if (s.substr(i, 2) == "/*") {
            std::size_t l0 = line, c0 = col;
            step();
            step();
            while (i < s.size() && s.substr(i, 2) != "*/") step();
            if (i >= s.size()) throw ParseError("unterminated comment", l0, c0);
            step();
            step();
            continue;
        }
        Tok t;
        t.line = line;
        t.column = col;
        if (c == '"') {
            step();
            while (i < s.size() && s[i] != '"') {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    step();
                    if (s[i] != '"' && s[i] != '\\') t.text += '\\';
                }
                t.text += s[i];
                step();
            }
            if (i >= s.size()) throw ParseError("unterminated string", t.line, t.column);
            step();
            t.kind = Tok::Id;
            out.push_back(t);
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
            if (s.substr(i, 2) == "->") {
                step();
                step();
                t.kind = Tok::Arrow;
                out.push_back(t);
                continue;
            }
            while (i < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '.' ||
                    (s[i] == '-' && s.substr(i, 2) != "->")))
                t.text += s[i], step();
            t.kind = Tok::Id;
            out.push_back(t);
            continue;
        }
        switch (c) {
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case '[': t.kind = Tok::LBracket; break;
            case ']': t.kind = Tok::RBracket; break;
            case '=': t.kind = Tok::Equal; break;
            case ';': t.kind = Tok::Semi; break;
            case ',': t.kind = Tok::Comma; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
        step();
        out.push_back(t);
    }
    Tok end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

using Attrs = std::vector<std::pair<std::string, Tok>>;

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto b = cur.find_first_not_of(" \t\r\n");
        auto e = cur.find_last_not_of(" \t\r\n");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : s) {
        if (c == sep) flush();
        else cur += c;
    }
    flush();
    return out;
}

// "c+=1; d-=2" (also "c=c+3" / "c=c-3").
inline std::map<std::string, BigInt> parse_update(const Tok& at) {
    std::map<std::string, BigInt> out;
    for (const auto& part : split(at.text, ';')) {
        TokenStream ts(tokenize(part));
        try {
            Token name = ts.expect(flatcheck::Tok::Ident, "counter name");
            BigInt k;
            if (ts.accept(flatcheck::Tok::PlusAssign)) {
                k = detail::parse_signed_int(ts);
            } else if (ts.accept(flatcheck::Tok::MinusAssign)) {
                k = -detail::parse_signed_int(ts);
            } else {
                ts.expect(flatcheck::Tok::Assign, "'+=', '-=' or '='");
                Token again = ts.expect(flatcheck::Tok::Ident, "counter name");
                if (again.text != name.text) ts.fail("update must have the form c=c+k");
                bool neg = false;
                if (ts.accept(flatcheck::Tok::Minus)) neg = true;
                else ts.expect(flatcheck::Tok::Plus, "'+' or '-'");
                k = detail::parse_signed_int(ts);
                if (neg) k = -k;
            }
            if (!ts.at(flatcheck::Tok::End)) ts.fail("unexpected trailing input in update");
            out[name.text] += k;
        } catch (const ParseError& e) {
            throw ParseError(std::string("bad update \"") + part + "\": " + e.what(), at.line, at.column);
        }
    }
    return out;
}

inline std::vector<CounterConstraint> parse_guards(const Tok& at) {
    std::vector<CounterConstraint> out;
    for (const auto& part : split(at.text, ';')) {
        try {
            out.push_back(parse_counter_constraint(part));
        } catch (const ParseError& e) {
            throw ParseError(std::string("bad guard \"") + part + "\": " + e.what(), at.line, at.column);
        }
    }
    return out;
}

inline bool truthy(const std::string& s) { return s == "true" || s == "1" || s == "yes"; }

}  // namespace dot

// Reads the DOT dialect: node attributes `props="p,q"` and `init="true"`,
// edge attributes `update="c+=1; d-=2"` and `guard="c-2*d>=0; d<3"`, optional
// graph attribute `counters="c,d"`. Other attributes are ignored.
inline CounterSystem parse_dot(std::string_view text) {
    using dot::Tok;
    auto toks = dot::lex(text);
    std::size_t p = 0;
    auto peek = [&](std::size_t k = 0) -> const Tok& { return toks[std::min(p + k, toks.size() - 1)]; };
    auto fail = [&](const std::string& msg) -> void {
        const Tok& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + (t.text.empty() ? std::string("symbol") : t.text) + "'";
        throw ParseError(msg + ", found " + found, t.line, t.column);
    };
    auto accept = [&](Tok::Kind k) {
        if (peek().kind != k) return false;
        ++p;
        return true;
    };
    auto expect = [&](Tok::Kind k, const std::string& what) {
        if (peek().kind != k) fail("expected " + what);
        return toks[p++];
    };
    auto keyword = [&](const char* w) { return peek().kind == Tok::Id && peek().text == w; };

    if (keyword("strict")) ++p;
    if (!keyword("digraph")) fail("expected 'digraph'");
    ++p;
    if (peek().kind == Tok::Id) ++p;
    expect(Tok::LBrace, "'{'");

    struct PendingNode {
        std::string name;
        dot::Attrs attrs;
    };
    struct PendingEdge {
        std::string src, tgt;
        dot::Attrs attrs;
        Tok at;
    };
    std::vector<std::string> order;
    std::vector<PendingNode> nodes;
    std::vector<PendingEdge> edges;
    std::vector<std::string> declared_counters;
    bool counters_attr = false;
    dot::Attrs node_defaults, edge_defaults;
    // explicit attributes replace defaults with the same key
    auto with_defaults = [](const dot::Attrs& defaults, dot::Attrs own) {
        dot::Attrs out;
        for (const auto& kv : defaults)
            if (std::none_of(own.begin(), own.end(), [&](const auto& x) { return x.first == kv.first; })) out.push_back(kv);
        out.insert(out.end(), std::make_move_iterator(own.begin()), std::make_move_iterator(own.end()));
        return out;
    };

    auto parse_attrs = [&]() {
        dot::Attrs a;
        while (accept(Tok::LBracket)) {
            while (!accept(Tok::RBracket)) {
                Tok key = expect(Tok::Id, "attribute name");
                expect(Tok::Equal, "'='");
                Tok val = expect(Tok::Id, "attribute value");
                a.emplace_back(key.text, val);
                if (!accept(Tok::Comma)) accept(Tok::Semi);
            }
        }
        return a;
    };
    auto graph_attr = [&](const std::string& key, const Tok& val) {
        if (key == "counters") {
            counters_attr = true;
            for (const auto& c : dot::split(val.text, ',')) declared_counters.push_back(c);
        }
    };

    while (!accept(Tok::RBrace)) {
        if (peek().kind == Tok::End) fail("expected '}'");
        if (accept(Tok::Semi)) continue;
        if (keyword("graph") && peek(1).kind == Tok::LBracket) {
            ++p;
            for (const auto& [k, v] : parse_attrs()) graph_attr(k, v);
            continue;
        }
        if ((keyword("node") || keyword("edge")) && peek(1).kind == Tok::LBracket) {
            bool node = keyword("node");
            ++p;
            for (auto& kv : parse_attrs()) {
                dot::Attrs& d = node ? node_defaults : edge_defaults;
                std::erase_if(d, [&](const auto& x) { return x.first == kv.first; });
                d.push_back(std::move(kv));
            }
            continue;
        }
        Tok first = expect(Tok::Id, "node name");
        if (accept(Tok::Equal)) {
            graph_attr(first.text, expect(Tok::Id, "attribute value"));
            continue;
        }
        std::vector<Tok> chain{first};
        while (accept(Tok::Arrow)) chain.push_back(expect(Tok::Id, "node name"));
        dot::Attrs attrs = parse_attrs();
        for (const auto& t : chain) {
            bool fresh = std::find(order.begin(), order.end(), t.text) == order.end();
            order.push_back(t.text);
            if (chain.size() == 1) nodes.push_back({t.text, fresh ? with_defaults(node_defaults, attrs) : attrs});
            else if (fresh) nodes.push_back({t.text, node_defaults});
        }
        if (chain.size() > 1) {
            for (std::size_t k = 0; k + 1 < chain.size(); ++k)
                edges.push_back({chain[k].text, chain[k + 1].text, with_defaults(edge_defaults, attrs), chain[k]});
        }
    }
    if (peek().kind != Tok::End) fail("unexpected input after graph");

    CounterSystem S;
    for (const auto& c : declared_counters) S.add_counter(c);
    std::vector<std::pair<std::map<std::string, BigInt>, std::vector<CounterConstraint>>> parsed;
    for (const auto& e : edges) {
        std::map<std::string, BigInt> upd;
        std::vector<CounterConstraint> gs;
        for (const auto& [k, v] : e.attrs) {
            if (k == "update") {
                for (const auto& [c, d] : dot::parse_update(v)) upd[c] += d;
            } else if (k == "guard") {
                auto more = dot::parse_guards(v);
                gs.insert(gs.end(), more.begin(), more.end());
            }
        }
        auto check = [&](const std::string& c) {
            if (counters_attr && std::find(declared_counters.begin(), declared_counters.end(), c) == declared_counters.end())
                throw ParseError("undeclared counter '" + c + "'", e.at.line, e.at.column);
            S.add_counter(c);
        };
        for (const auto& [c, d] : upd) check(c);
        for (const auto& g : gs)
            for (const auto& m : g.term) check(m.atom);
        parsed.emplace_back(std::move(upd), std::move(gs));
    }
    for (const auto& name : order) S.add_state(name);
    std::optional<StateId> init;
    for (const auto& nd : nodes) {
        StateId s = S.state_index(nd.name);
        for (const auto& [k, v] : nd.attrs) {
            if (k == "props") {
                for (const auto& prop : dot::split(v.text, ',')) {
                    if (prop == "true" || prop == "false" || detail::is_reserved(prop))
                        throw ParseError("reserved proposition name '" + prop + "'", v.line, v.column);
                    S.add_label(s, prop);
                }
            } else if (k == "init" && dot::truthy(v.text)) {
                if (init && *init != s) throw ParseError("more than one initial state", v.line, v.column);
                init = s;
            }
        }
    }
    if (!init) throw Error("no initial state");
    S.set_initial(*init);
    for (std::size_t k = 0; k < edges.size(); ++k)
        S.add_transition(S.state_index(edges[k].src), S.state_index(edges[k].tgt), parsed[k].first, parsed[k].second);
    S.validate();
    return S;
}

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

inline std::string print_dot(const CounterSystem& S) {
    std::ostringstream os;
    os << "digraph S {\n";
    if (!S.counters().empty()) {
        std::string cs;
        for (const auto& c : S.counters()) cs += (cs.empty() ? "" : ",") + c;
        os << "  counters=" << dot_quote(cs) << ";\n";
    }
    for (StateId s = 0; s < S.num_states(); ++s) {
        os << "  " << dot_quote(S.state_name(s));
        std::vector<std::string> attrs;
        if (!S.labels(s).empty()) {
            std::string ps;
            for (const auto& p : S.labels(s)) ps += (ps.empty() ? "" : ",") + p;
            attrs.push_back("props=" + dot_quote(ps));
        }
        if (S.has_initial() && S.initial() == s) attrs.push_back("init=\"true\"");
        if (!attrs.empty()) {
            os << " [";
            for (std::size_t k = 0; k < attrs.size(); ++k) os << (k ? ", " : "") << attrs[k];
            os << "]";
        }
        os << ";\n";
    }
    for (const auto& t : S.transitions()) {
        os << "  " << dot_quote(S.state_name(t.source)) << " -> " << dot_quote(S.state_name(t.target));
        std::vector<std::string> attrs;
        std::string upd;
        for (std::size_t c = 0; c < S.counters().size(); ++c) {
            if (t.update[c] == 0) continue;
            if (!upd.empty()) upd += "; ";
            upd += S.counters()[c] + (t.update[c] > 0 ? "+=" : "-=") + BigInt(abs(t.update[c])).str();
        }
        if (!upd.empty()) attrs.push_back("update=" + dot_quote(upd));
        std::string gs;
        for (const auto& g : t.guards) gs += (gs.empty() ? "" : "; ") + print_counter_constraint(g);
        if (!gs.empty()) attrs.push_back("guard=" + dot_quote(gs));
        if (!attrs.empty()) {
            os << " [";
            for (std::size_t k = 0; k < attrs.size(); ++k) os << (k ? ", " : "") << attrs[k];
            os << "]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

inline nlohmann::json system_to_json(const CounterSystem& S) {
    nlohmann::json j;
    j["counters"] = S.counters();
    j["initial"] = S.has_initial() ? S.state_name(S.initial()) : "";
    j["states"] = nlohmann::json::array();
    for (StateId s = 0; s < S.num_states(); ++s)
        j["states"].push_back({{"name", S.state_name(s)}, {"props", S.labels(s)}});
    j["transitions"] = nlohmann::json::array();
    for (const auto& t : S.transitions()) {
        nlohmann::json upd = nlohmann::json::object();
        for (std::size_t c = 0; c < S.counters().size(); ++c) upd[S.counters()[c]] = t.update[c].str();
        std::vector<std::string> gs;
        for (const auto& g : t.guards) gs.push_back(print_counter_constraint(g));
        j["transitions"].push_back({{"id", t.id},
                                    {"source", S.state_name(t.source)},
                                    {"target", S.state_name(t.target)},
                                    {"update", upd},
                                    {"guards", gs}});
    }
    return j;
}

}  // namespace flatcheck
