#include "flatcheck/flatcheck.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace flatcheck;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s, const char* what) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw Error(std::string(what) + " expects <a>:<b>, got '" + s + "'");
    try {
        return {std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw Error(std::string(what) + " expects two non-negative integers, got '" + s + "'");
    }
}

void print_summary(std::ostream& os, const CheckOutcome& o) {
    switch (o.verdict) {
        case Verdict::SatAtDepth:
            os << (o.negated ? "counterexample" : "sat") << " at depth " << o.depth
               << (o.validated ? " (validated)" : "") << '\n';
            break;
        case Verdict::UnsatUpTo:
            os << (o.negated ? "no counterexample" : "unsat") << " up to depth " << o.depth << '\n';
            break;
        case Verdict::Unknown: os << "unknown: " << o.details << '\n'; break;
    }
    for (const auto& d : o.depths)
        os << "  n=" << d.n << "  " << status_name(d.status) << (d.reason.empty() ? "" : " (" + d.reason + ")")
           << "  decls=" << d.declarations << "  encode=" << d.encode_seconds << "s  solve=" << d.solve_seconds << "s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flat model checker for Counting LTL over counter systems"};
    std::string system_path, formula_arg, search, solver_cmd, json_path, smt_path, oracle;
    std::size_t depth = 0;
    double timeout = 60;
    bool validate = false, minimize = false, negate = false, parallel = false, trace = false;
    app.add_option("--system", system_path, "counter system in DOT")->required();
    app.add_option("--formula", formula_arg, "CLTL formula, or @path to read it from a file")->required();
    auto* depth_opt = app.add_option("--depth", depth, "single depth");
    app.add_option("--search", search, "depth schedule <start>:<max>, doubling")->excludes(depth_opt);
    app.add_option("--solver", solver_cmd, "solver command; the script path is appended (env FLATCHECK_SOLVER)");
    app.add_option("--timeout", timeout, "seconds per depth");
    app.add_flag("--validate", validate, "validate witnesses with the built-in evaluator");
    app.add_flag("--minimize-depth", minimize, "refine a Sat depth downward");
    app.add_flag("--negate", negate, "search a counterexample to the formula");
    app.add_flag("--parallel", parallel, "probe all depths concurrently");
    app.add_flag("--trace", trace, "print the witness trace");
    app.add_option("--json", json_path, "write the outcome as JSON (- for stdout)");
    app.add_option("--emit-smt", smt_path, "write the SMT-LIB script for --depth and exit (- for stdout)");
    app.add_option("--oracle", oracle, "brute-force search <schema length>:<iterations> instead of the solver");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    CheckConfig cfg;
    try {
        cfg.system = parse_dot(read_file(system_path));
        std::string text = formula_arg.rfind('@', 0) == 0 ? read_file(formula_arg.substr(1)) : formula_arg;
        std::set<std::string> counters(cfg.system.counters().begin(), cfg.system.counters().end());
        cfg.formula = parse_formula(text, &counters);
        if (negate) cfg.formula = f_not(cfg.formula);
        if (depth) {
            cfg.start = cfg.max = depth;
            cfg.single_depth = true;
        } else if (!search.empty()) {
            std::tie(cfg.start, cfg.max) = parse_range(search, "--search");
        }
        if (!solver_cmd.empty()) cfg.solver.command = split_command(solver_cmd);
        cfg.solver.timeout_seconds = timeout;
        cfg.validate = validate;
        cfg.minimize_depth = minimize;
        cfg.parallel = parallel;
        cfg.check_invariants();

        if (!smt_path.empty()) {
            if (!depth) throw Error("--emit-smt needs --depth");
            write_output(smt_path, emit_smtlib(encode_fmc(cfg.system, cfg.formula, depth).script));
            return 0;
        }
        if (!oracle.empty()) {
            auto [len, iters] = parse_range(oracle, "--oracle");
            auto run = enumerate_flat_witness(cfg.system, len, iters, cfg.formula);
            if (!run) {
                std::cout << "oracle: no run within schema length " << len << " and " << iters << " iterations\n";
                return 1;
            }
            nlohmann::json bundle = {{"run", lasso_to_json(cfg.system, *run)}};
            std::cout << "oracle: run found\n";
            print_trace(std::cout, bundle);
            if (!json_path.empty()) write_output(json_path, bundle.dump(2) + "\n");
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    CheckOutcome o;
    try {
        o = run_check(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    o.negated = negate;
    print_summary(std::cout, o);
    if (trace && o.verdict == Verdict::SatAtDepth) print_trace(std::cout, o.witness);
    if (!json_path.empty()) {
        try {
            write_output(json_path, outcome_to_json(o).dump(2) + "\n");
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 3;
        }
    }
    return exit_code(o);
}
