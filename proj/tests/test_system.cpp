#include "flatcheck/counter_system.hpp"
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

}  // namespace

TEST(DotParse, SysA) {
    CounterSystem S = load("sys_a.dot");
    ASSERT_EQ(S.num_states(), 1u);
    EXPECT_EQ(S.initial(), 0u);
    EXPECT_EQ(S.labels(0), (std::set<std::string>{"p"}));
    ASSERT_EQ(S.counters(), std::vector<std::string>{"c"});
    ASSERT_EQ(S.transitions().size(), 1u);
    EXPECT_EQ(S.transition(0).update, Valuation{1});
}

TEST(DotParse, AttributesAndGuards) {
    CounterSystem S = parse_dot(R"(
        digraph g {
          counters = "c, d";
          node [props="p"];
          a [init=true];
          b [props="q"];   // q only
          a -> b -> a [update="c+=2; d-=1", guard="c - 2*d >= 0; d < 3"];
          /* a block comment */
          b -> b [update="c=c+1"];
        })");
    ASSERT_EQ(S.num_states(), 2u);
    EXPECT_EQ(S.labels(S.state_index("a")), (std::set<std::string>{"p"}));
    EXPECT_EQ(S.labels(S.state_index("b")), (std::set<std::string>{"q"}));
    ASSERT_EQ(S.transitions().size(), 3u);
    const Transition& t = S.transition(0);
    EXPECT_EQ(t.update, (Valuation{2, -1}));
    ASSERT_EQ(t.guards.size(), 2u);
    EXPECT_EQ(print_counter_constraint(t.guards[0]), "1*c - 2*d >= 0");
    EXPECT_EQ(print_counter_constraint(t.guards[1]), "-1*d >= -2");
    EXPECT_EQ(S.transition(2).update, (Valuation{1, 0}));
}

TEST(DotParse, Errors) {
    EXPECT_THROW(parse_dot("digraph { a; b; a -> b; }"), Error);                       // no initial state
    EXPECT_THROW(parse_dot("digraph { a [init=1]; b [init=1]; }"), Error);            // two initial states
    EXPECT_THROW(parse_dot("digraph { a [init=1, props=\"X\"]; }"), Error);           // reserved name
    EXPECT_THROW(parse_dot("digraph { counters=\"c\"; a [init=1]; a -> a [update=\"e+=1\"]; }"), Error);
    EXPECT_THROW(parse_dot("digraph { a [init=1] a -> }"), ParseError);
    try {
        parse_dot("digraph {\n  a [init=1];\n  a -> ;\n}");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(DotPrint, RoundTrip) {
    fctest::Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        CounterSystem S = fctest::random_system(rng);
        CounterSystem T = parse_dot(print_dot(S));
        EXPECT_EQ(print_dot(T), print_dot(S));
        EXPECT_EQ(system_to_json(T), system_to_json(S));
    }
}

TEST(Semantics, StepsApplyUpdatesThenCheckGuards) {
    CounterSystem S = parse_dot(R"(digraph { a [init=1]; a -> a [update="c+=1", guard="c >= 2"]; })");
    const Transition& t = S.transition(0);
    EXPECT_FALSE(S.is_step({0, {0}}, t, {0, {1}}));  // c = 1 after the update
    EXPECT_TRUE(S.is_step({0, {1}}, t, {0, {2}}));
    EXPECT_FALSE(S.is_step({0, {1}}, t, {0, {3}}));
}

TEST(Graph, SuccessorsAndReachability) {
    CounterSystem S = load("sys_b.dot");
    StateId s0 = S.state_index("s0"), s1 = S.state_index("s1");
    EXPECT_EQ(successors(S, s0), (std::set<StateId>{s0, s1}));
    EXPECT_EQ(suc_star(S, s1), (std::set<StateId>{s1}));
    EXPECT_EQ(suc_star(S, s0), (std::set<StateId>{s0, s1}));
}

TEST(Flatness, ExamplesAreFlat) {
    for (const char* f : {"sys_a.dot", "sys_b.dot", "two_loops.dot"}) EXPECT_TRUE(is_flat(load(f)).flat) << f;
}

TEST(Flatness, TwoLoopsThroughOneStateAreReported) {
    CounterSystem S = parse_dot("digraph { a [init=1]; b; a -> b; b -> a; a -> a; }");
    FlatVerdict v = is_flat(S);
    ASSERT_FALSE(v.flat);
    ASSERT_TRUE(v.state.has_value());
    for (const SimpleLoop* l : {&v.first, &v.second}) {
        ASSERT_FALSE(l->states.empty());
        EXPECT_EQ(l->states.front(), *v.state);
        for (std::size_t k = 0; k < l->transitions.size(); ++k) {
            const Transition& t = S.transition(l->transitions[k]);
            EXPECT_EQ(t.source, l->states[k]);
            EXPECT_EQ(t.target, l->states[(k + 1) % l->states.size()]);
        }
    }
    EXPECT_NE(v.first.transitions, v.second.transitions);
}

TEST(Flatness, ParallelSelfLoopsAreTwoLoops) {
    CounterSystem S = parse_dot(R"(digraph { a [init=1]; a -> a [update="c+=1"]; a -> a [update="c-=1"]; })");
    EXPECT_FALSE(is_flat(S).flat);
}

// Independent check: a system is flat iff no state lies on two distinct simple
// cycles. Enumerate simple cycles by brute force on small graphs.
TEST(Flatness, AgreesWithCycleEnumeration) {
    fctest::Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        fctest::SystemShape shape;
        shape.max_states = 5;
        shape.guard_probability = 0;
        CounterSystem S = fctest::random_system(rng, shape);
        std::size_t n = S.num_states();
        std::vector<std::size_t> on_cycles(n, 0);
        // simple cycles as transition sequences starting at their minimal state
        std::function<void(StateId, StateId, std::vector<TransitionId>&, std::vector<bool>&)> dfs =
            [&](StateId start, StateId cur, std::vector<TransitionId>& path, std::vector<bool>& used) {
                for (const auto& t : S.transitions()) {
                    if (t.source != cur || t.target < start) continue;
                    if (t.target == start) {
                        on_cycles[start]++;
                        for (auto id : path) on_cycles[S.transition(id).target]++;
                        continue;
                    }
                    if (used[t.target]) continue;
                    used[t.target] = true;
                    path.push_back(t.id);
                    dfs(start, t.target, path, used);
                    path.pop_back();
                    used[t.target] = false;
                }
            };
        for (StateId s = 0; s < n; ++s) {
            std::vector<TransitionId> path;
            std::vector<bool> used(n, false);
            used[s] = true;
            dfs(s, s, path, used);
        }
        bool flat = std::all_of(on_cycles.begin(), on_cycles.end(), [](std::size_t c) { return c <= 1; });
        EXPECT_EQ(is_flat(S).flat, flat) << print_dot(S);
    }
}

TEST(LabelAccumulate, CountsPropositionsAndTrue) {
    CounterSystem S = load("sys_b.dot");
    StateId s0 = S.state_index("s0"), s1 = S.state_index("s1");
    auto counts = label_accumulate(S, {s0, s0, s1, s1, s1}, {"p", "q", "true"});
    EXPECT_EQ(counts.at("p"), 2);
    EXPECT_EQ(counts.at("q"), 3);
    EXPECT_EQ(counts.at("true"), 5);
    EXPECT_THROW(label_accumulate(S, {s1, s0}, {"p"}, nullptr, true), Error);
}
