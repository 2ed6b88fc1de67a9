#include "flatcheck/checker.hpp"
#include "support/random_gen.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
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

CheckConfig config(const std::string& sys, const std::string& phi, std::size_t start, std::size_t max) {
    CheckConfig c;
    c.system = load(sys);
    c.formula = parse_formula(phi);
    c.start = start;
    c.max = max;
    return c;
}

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult cli(const std::string& args) {
    std::string cmd = std::string(FLATCHECK_CLI) + " " + args + " 2>&1";
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::size_t k = fread(buf, 1, sizeof buf, p)) r.out.append(buf, k);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string data(const std::string& f) { return std::string(FLATCHECK_DATA_DIR) + "/" + f; }

}  // namespace

TEST(Schedule, DoublesAndIncludesMax) {
    CheckConfig c = config("sys_a.dot", "p", 2, 64);
    EXPECT_EQ(c.schedule(), (std::vector<std::size_t>{2, 4, 8, 16, 32, 64}));
    c.max = 20;
    EXPECT_EQ(c.schedule(), (std::vector<std::size_t>{2, 4, 8, 16, 20}));
    c.single_depth = true;
    c.start = 7;
    EXPECT_EQ(c.schedule(), std::vector<std::size_t>{7});
    c.start = 1;
    EXPECT_THROW(c.check_invariants(), Error);
}

TEST(RunCheck, SysAIsSatAtFour) {
    CheckOutcome o = run_check(config("sys_a.dot", "F (c >= 3)", 2, 8));
    ASSERT_EQ(o.verdict, Verdict::SatAtDepth) << o.details;
    EXPECT_EQ(o.depth, 4u);
    EXPECT_TRUE(o.validated);
    ASSERT_EQ(o.depths.size(), 2u);
    EXPECT_EQ(o.depths[0].status, Status::Unsat);
    EXPECT_EQ(o.witness["depth"], 4);
    EXPECT_EQ(exit_code(o), 0);

    CheckConfig m = config("sys_a.dot", "F (c >= 3)", 2, 8);
    m.minimize_depth = true;
    CheckOutcome om = run_check(m);
    EXPECT_EQ(om.depth, 4u);
    EXPECT_EQ(om.depths.back().n, 3u);
    EXPECT_EQ(om.depths.back().status, Status::Unsat);
}

TEST(RunCheck, UnreachablePropositionIsUnsat) {
    CheckOutcome o = run_check(config("sys_a.dot", "F q", 2, 16));
    EXPECT_EQ(o.verdict, Verdict::UnsatUpTo);
    EXPECT_EQ(o.depth, 16u);
    EXPECT_EQ(o.depths.size(), 4u);
    EXPECT_TRUE(o.witness.is_null());
    EXPECT_EQ(exit_code(o), 1);
}

TEST(RunCheck, NegationSearchesCounterexamples) {
    CheckOutcome holds = negate_and_check(config("sys_b.dot", "p", 2, 8));
    EXPECT_TRUE(holds.negated);
    EXPECT_EQ(holds.verdict, Verdict::UnsatUpTo);
    CheckOutcome cex = negate_and_check(config("sys_b.dot", "G p", 2, 8));
    ASSERT_EQ(cex.verdict, Verdict::SatAtDepth);
    EXPECT_TRUE(cex.validated);
    CheckConfig c = config("sys_b.dot", "G p", 2, 8);
    c.formula = f_not(c.formula);
    std::string why;
    LassoRun run = lasso_from_json(c.system, cex.witness["run"]);
    EXPECT_TRUE(validate_run(c.system, run, c.formula, &why)) << why;
}

TEST(RunCheck, SolverUnknownIsReported) {
    CheckConfig c = config("sys_a.dot", "F (c >= 3)", 2, 4);
    c.solver.command = {"sh", "-c", "echo unknown"};
    CheckOutcome o = run_check(c);
    EXPECT_EQ(o.verdict, Verdict::Unknown);
    EXPECT_EQ(exit_code(o), 2);
    for (const auto& d : o.depths) EXPECT_EQ(d.reason, "solver-reported");
}

TEST(RunCheck, ParallelMatchesSequential) {
    for (const char* phi : {"F (c >= 3)", "F q", "G p"}) {
        CheckConfig c = config("sys_a.dot", phi, 2, 16);
        CheckOutcome a = run_check(c);
        c.parallel = true;
        CheckOutcome b = run_check(c);
        EXPECT_EQ(a.verdict, b.verdict) << phi;
        EXPECT_EQ(a.depth, b.depth) << phi;
    }
}

TEST(OutcomeJson, RoundTrip) {
    CheckOutcome o = run_check(config("sys_b.dot", "F q", 2, 8));
    nlohmann::json j = outcome_to_json(o);
    EXPECT_EQ(j["verdict"], "sat");
    CheckOutcome back = outcome_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(outcome_to_json(back), j);
    CheckOutcome u = run_check(config("sys_a.dot", "F q", 2, 4));
    EXPECT_EQ(outcome_to_json(outcome_from_json(outcome_to_json(u))), outcome_to_json(u));
}

TEST(Cli, ExitCodes) {
    CliResult sat = cli("--system " + data("sys_a.dot") + " --formula 'F (c >= 3)' --search 2:8 --validate");
    EXPECT_EQ(sat.code, 0) << sat.out;
    EXPECT_NE(sat.out.find("sat at depth 4"), std::string::npos) << sat.out;
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula 'F q' --search 2:16").code, 1);
    EXPECT_EQ(cli("--system /nonexistent.dot --formula p --depth 3").code, 3);
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula 'F (' --depth 3").code, 3);
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula p --depth 3 --search 2:4").code, 3);
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula p --depth 3 --solver 'sh -c \"echo unknown\"'").code, 2);
    CliResult neg = cli("--system " + data("sys_b.dot") + " --formula 'G p' --negate --search 2:8");
    EXPECT_EQ(neg.code, 0) << neg.out;
}

TEST(Cli, JsonSmtAndTrace) {
    CliResult j = cli("--system " + data("sys_b.dot") + " --formula 'F q' --search 2:8 --json -");
    ASSERT_EQ(j.code, 0);
    auto brace = j.out.find('{');
    ASSERT_NE(brace, std::string::npos);
    nlohmann::json parsed = nlohmann::json::parse(j.out.substr(brace));
    EXPECT_EQ(parsed["verdict"], "sat");

    CliResult smt = cli("--system " + data("sys_a.dot") + " --formula 'F (c >= 3)' --depth 4 --emit-smt -");
    EXPECT_EQ(smt.code, 0);
    EXPECT_NE(smt.out.find("(set-logic QF_LIA)"), std::string::npos);
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula p --emit-smt -").code, 3);

    CliResult tr = cli("--system " + data("sys_a.dot") + " --formula 'F (c >= 3)' --depth 4 --trace");
    EXPECT_NE(tr.out.find("loop forever:"), std::string::npos) << tr.out;
}

TEST(Cli, FormulaFromFileAndUnreadableInput) {
    std::string path = ::testing::TempDir() + "/phi.cltl";
    std::ofstream(path) << "F (c >= 3)\n";
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula @" + path + " --depth 4").code, 0);
    std::string noread = ::testing::TempDir() + "/noread.dot";
    std::ofstream(noread) << "digraph { a [init=1]; a -> a; }";
    std::remove(noread.c_str());
    EXPECT_EQ(cli("--system " + noread + " --formula p --depth 2").code, 3);
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula @/nonexistent --depth 2").code, 3);
}

TEST(Cli, OracleMode) {
    CliResult r = cli("--system " + data("sys_a.dot") + " --formula 'F (c >= 3)' --oracle 4:8");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(cli("--system " + data("sys_a.dot") + " --formula 'F q' --oracle 4:4").code, 1);
}
