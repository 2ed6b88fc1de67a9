// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// An optional argument restricts the run to criteria whose name contains it.

#include "flatcheck/flatcheck.hpp"
#include "support/random_gen.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace flatcheck;

namespace {

// pinned thresholds
constexpr int kSoundnessTrials = 500;
constexpr int kCompletenessCases = 100;
constexpr int kNegativeCases = 100;
constexpr int kCoherenceCases = 200;
constexpr double kRatioLow = 1.8, kRatioHigh = 2.2;
constexpr double kPerfEncodeSeconds = 5.0;
constexpr double kPerfSizeTolerance = 0.10;
constexpr double kPerfBudgetSeconds = 120.0;
constexpr double kDepthTimeout = 120.0;

struct Result {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int prec = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << x;
    return os.str();
}

CounterSystem load(const std::string& name) {
    std::ifstream f(std::string(FLATCHECK_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_dot(ss.str());
}

SolverConfig solver() {
    SolverConfig c;
    c.timeout_seconds = kDepthTimeout;
    return c;
}

// Flat by construction: a chain s0 -> s1 -> ... with disjoint short back
// edges and a self-loop at the end.
CounterSystem chain_system(fctest::Rng& rng, std::size_t k, std::size_t C) {
    CounterSystem S;
    for (std::size_t c = 0; c < C; ++c) S.add_counter(fctest::counter_name(c));
    for (std::size_t s = 0; s < k; ++s) {
        StateId id = S.add_state("s" + std::to_string(s));
        if (fctest::coin(rng)) S.add_label(id, "p");
        if (fctest::coin(rng, 0.4)) S.add_label(id, "q");
    }
    S.set_initial(0);
    auto upd = [&] {
        std::map<std::string, BigInt> u;
        for (std::size_t c = 0; c < C; ++c) u[fctest::counter_name(c)] = fctest::uniform(rng, -2, 2);
        return u;
    };
    for (StateId s = 0; s + 1 < k; ++s) S.add_transition(s, s + 1, upd());
    for (StateId s = 0; s + 1 < k;) {
        std::size_t len = static_cast<std::size_t>(fctest::uniform(rng, 0, 3));
        if (len > 0 && s + len < k - 1 && fctest::coin(rng, 0.5)) {
            S.add_transition(static_cast<StateId>(s + len), s, upd());
            s += len + 1;
        } else {
            ++s;
        }
    }
    S.add_transition(static_cast<StateId>(k - 1), static_cast<StateId>(k - 1), upd());
    return S;
}

std::size_t size_of(const CounterSystem& S, const Formula& phi, std::size_t n) {
    return script_size(encode_fmc(S, phi, n).script).total();
}

// Full witness pipeline on one Sat model; empty string when everything holds.
std::string witness_defect(const Encoding& e, const Model& m, const CounterSystem& S, const Formula& phi) {
    try {
        ApsModel aps = decode(e, m);
        Concretization c = concretize_mapped(aps);
        ConsistencyReport rep = check_consistency(aps);
        if (!rep.all_pass()) return "consistency: " + report_to_json(rep, true).dump();
        std::string why;
        if (!validate_run(S, c.run, phi, &why)) return "validation: " + why;
        if (!fa_member(c.run, e.n)) return "run outside the flat approximation";
    } catch (const Error& err) {
        return std::string("decode: ") + err.what();
    }
    return "";
}

Result soundness() {
    fctest::Rng rng(1001);
    int sat = 0, unsat = 0, unknown = 0;
    std::vector<std::string> defects;
    for (int k = 0; k < kSoundnessTrials; ++k) {
        CounterSystem S = fctest::random_system(rng, {6, 2, 2, 0.3, 0.2});
        Formula phi = fctest::random_formula(rng, fctest::shape_for(S));
        std::size_t n = static_cast<std::size_t>(fctest::uniform(rng, 2, 12));
        Encoding e = encode_fmc(S, phi, n);
        SolverVerdict v = check(e.script, solver());
        if (v.status == Status::Unknown) {
            ++unknown;
            continue;
        }
        if (v.status == Status::Unsat) {
            ++unsat;
            continue;
        }
        ++sat;
        std::string d = witness_defect(e, v.model, S, phi);
        if (!d.empty()) defects.push_back("trial " + std::to_string(k) + " n=" + std::to_string(n) + " " + phi->key() + ": " + d);
    }
    for (const auto& d : defects) std::cerr << "  soundness defect: " << d << "\n";
    return {defects.empty() && sat > 0, std::to_string(kSoundnessTrials) + " trials, " + std::to_string(sat) + " sat, " +
                                             std::to_string(unsat) + " unsat, " + std::to_string(unknown) + " unknown, " +
                                             std::to_string(defects.size()) + " defective witnesses"};
}

Result completeness() {
    fctest::Rng rng(1002);
    int cases = 0, misses = 0, skipped = 0, attempts = 0;
    while (cases < kCompletenessCases && attempts < 20 * kCompletenessCases) {
        ++attempts;
        CounterSystem S = fctest::random_flat_system(rng, {5, 2, 2, 0.25, 0.2});
        fctest::FormulaShape shape = fctest::shape_for(S);
        shape.depth = 3;
        Formula phi = fctest::random_formula(rng, shape);
        std::optional<LassoRun> w;
        try {
            w = enumerate_flat_witness(S, 8, 8, phi);
        } catch (const BudgetExceeded&) {
            ++skipped;
            continue;
        }
        if (!w) continue;
        ++cases;
        CheckConfig cfg;
        cfg.system = S;
        cfg.formula = phi;
        cfg.start = 2;
        cfg.max = 64;
        cfg.solver = solver();
        CheckOutcome o = run_check(cfg);
        if (o.verdict != Verdict::SatAtDepth || !o.validated) {
            ++misses;
            std::cerr << "  completeness miss: " << phi->key() << " -> " << verdict_name(o.verdict) << " " << o.details << "\n"
                      << print_dot(S);
        }
    }
    return {cases >= kCompletenessCases && misses == 0,
            std::to_string(cases) + " flat cases with an enumerated witness, " + std::to_string(misses) + " not found by the search (" +
                std::to_string(skipped) + " skipped over enumeration budget)"};
}

Result negative_agreement() {
    fctest::Rng rng(1003);
    int cases = 0, wrong = 0, refuted = 0, unconfirmed = 0, attempts = 0;
    while (cases < kNegativeCases && attempts < 50 * kNegativeCases) {
        ++attempts;
        CounterSystem S = fctest::random_flat_system(rng, {4, 2, 2, 0.25, 0.2});
        fctest::FormulaShape shape = fctest::shape_for(S);
        shape.depth = 3;
        Formula phi = fctest::random_formula(rng, shape);
        try {
            if (enumerate_flat_witness(S, 6, 10, phi)) continue;
            // larger iteration counts on the same shapes
            if (enumerate_flat_witness(S, 6, 16, phi, 4'000'000)) continue;
        } catch (const BudgetExceeded&) {
            ++unconfirmed;
            continue;
        }
        bool premise_refuted = false, bad = false;
        for (std::size_t n = 2; n <= 6 && !premise_refuted && !bad; ++n) {
            Encoding e = encode_fmc(S, phi, n);
            SolverVerdict v = check(e.script, solver());
            if (v.status == Status::Unsat) continue;
            if (v.status == Status::Sat && witness_defect(e, v.model, S, phi).empty()) {
                // a validated run: enumeration missed a real witness
                premise_refuted = true;
                std::cerr << "  negative premise refuted at n=" << n << ": " << phi->key() << "\n";
            } else {
                bad = true;
                std::cerr << "  negative disagreement at n=" << n << ": " << phi->key() << " status " << status_name(v.status) << "\n";
            }
        }
        if (premise_refuted) {
            ++refuted;
            continue;
        }
        ++cases;
        wrong += bad;
    }
    return {cases >= kNegativeCases && wrong == 0,
            std::to_string(cases) + " cases without an enumerated witness, " + std::to_string(wrong) + " not unsat at every depth <= 6 (" +
                std::to_string(refuted) + " excluded: validated witness beyond the enumeration, " + std::to_string(unconfirmed) +
                " over budget)"};
}

// Eight-subformula property with counting and a guard.
Formula linearity_formula() { return parse_formula("(p U[1*p - 1*q >= 2] X q) & F (c >= 1)"); }

std::size_t closure_size(const CounterSystem& S, const Formula& phi) { return encode_fmc(S, phi, 2).closure.size(); }

// k states in a chain, each with a self-loop.
CounterSystem ladder_system(std::size_t k) {
    CounterSystem S;
    S.add_counter("c");
    for (std::size_t s = 0; s < k; ++s) {
        StateId id = S.add_state("s" + std::to_string(s));
        S.add_label(id, s % 2 ? "q" : "p");
        S.add_transition(id, id, {{"c", 1}});
        if (s > 0) S.add_transition(id - 1, id, {{"c", -1}});
    }
    S.set_initial(0);
    return S;
}

Result linearity() {
    fctest::Rng rng(1004);
    Formula phi = linearity_formula();
    CounterSystem S = chain_system(rng, 20, 1);
    std::size_t subs = closure_size(S, phi);
    std::ostringstream d;
    bool ok = subs == 8 || (d << "closure has " << subs << " entries; ", false);
    d << "depth ratios";
    for (std::size_t n : {16, 32, 64}) {
        double r = double(size_of(S, phi, 2 * n)) / double(size_of(S, phi, n));
        d << " " << fmt(r, 3);
        ok = ok && r >= kRatioLow && r <= kRatioHigh;
    }
    // growth in |S|: the state-dependent part doubles with the state count
    d << "; state increment ratios";
    std::vector<std::size_t> sizes;
    for (std::size_t k : {10, 20, 40, 80}) sizes.push_back(size_of(ladder_system(k), phi, 32));
    for (std::size_t i = 1; i + 1 < sizes.size(); ++i) {
        double r = double(sizes[i + 1] - sizes[i]) / double(sizes[i] - sizes[i - 1]);
        d << " " << fmt(r, 3);
        ok = ok && r >= kRatioLow && r <= kRatioHigh;
    }
    return {ok, d.str()};
}

Result coherence() {
    fctest::Rng rng(1006);
    int differ = 0, sat = 0;
    fctest::FormulaShape shape;
    shape.depth = 2;
    shape.counters = {"c"};
    for (int k = 0; k < kCoherenceCases; ++k) {
        CounterSystem S = fctest::random_system(rng, {4, 1, 2, 0.35, 0.1});
        long long den = fctest::uniform(rng, 1, 4), num = fctest::uniform(rng, 0, den);
        Formula a = fctest::random_formula(rng, shape), b = fctest::random_formula(rng, shape);
        Formula sugar = f_freq_until(a, num, den, b);
        FormulaTerm t;
        t.add(den, a);
        t.add(-num, f_true());
        Formula plain = f_until(f_true(), t, 0, b);
        if (desugar(sugar)->key() != desugar(plain)->key()) {
            ++differ;
            continue;
        }
        CheckConfig cfg;
        cfg.system = S;
        cfg.start = 2;
        cfg.max = 8;
        cfg.solver = solver();
        cfg.formula = sugar;
        CheckOutcome x = run_check(cfg);
        cfg.formula = plain;
        CheckOutcome y = run_check(cfg);
        if (x.verdict != y.verdict || x.depth != y.depth) ++differ;
        sat += x.verdict == Verdict::SatAtDepth;
    }
    return {differ == 0, std::to_string(kCoherenceCases) + " cases (" + std::to_string(sat) + " sat), " + std::to_string(differ) +
                             " with differing verdicts"};
}

Result sys_a_regression() {
    CounterSystem S = load("sys_a.dot");
    CheckConfig cfg;
    cfg.system = S;
    cfg.formula = parse_formula("F (c >= 3)");
    cfg.solver = solver();
    auto t0 = Clock::now();
    DepthResult r2 = probe_depth(cfg, 2), r3 = probe_depth(cfg, 3), r4 = probe_depth(cfg, 4);
    bool ok = r2.record.status == Status::Unsat && r3.record.status == Status::Unsat && r4.record.status == Status::Sat && r4.validated;
    bool counts = false;
    if (ok) {
        LassoRun run = lasso_from_json(S, r4.witness["run"]);
        counts = true;
        for (std::size_t x = 0; x < 10; ++x) counts = counts && run.at(S, x).valuation[0] == BigInt(x);
    }
    double secs = since(t0);
    return {ok && counts && secs < 10,
            std::string("n=2 ") + status_name(r2.record.status) + ", n=3 " + status_name(r3.record.status) + ", n=4 " +
                status_name(r4.record.status) + (r4.validated ? " validated" : "") + (counts ? ", c = 0,1,2,..." : "") + " (" +
                fmt(secs) + " s)"};
}

Result sys_b_regression() {
    CounterSystem S = load("sys_b.dot");
    CheckConfig cfg;
    cfg.system = S;
    cfg.formula = parse_formula("!q U[1*p >= 3] q");
    cfg.solver = solver();
    auto t0 = Clock::now();
    DepthResult r4 = probe_depth(cfg, 4);
    bool ok = r4.record.status == Status::Sat && r4.validated;
    std::string shape;
    if (ok) {
        // iterations of the s0 loop in the witness schema
        for (const auto& l : r4.witness["schema"]["loops"])
            if (l["iterations"] != "0") shape = ", s0 loop iterated " + l["iterations"].get<std::string>() + " times";
    }
    // first depth that does work, for the record
    std::size_t first = 0;
    for (std::size_t n = 4; n <= 8 && !first; ++n)
        if (probe_depth(cfg, n).record.status == Status::Sat) first = n;
    double secs = since(t0);
    return {ok && secs < 10, std::string("n=4 ") + status_name(r4.record.status) + shape + "; earliest sat depth " +
                                 (first ? std::to_string(first) : std::string("none <= 8")) + " (" + fmt(secs) + " s)"};
}

Result performance() {
    fctest::Rng rng(1007);
    CounterSystem S = chain_system(rng, 50, 2);
    Formula phi = parse_formula("(p U[2*p - 1*q >= 1] X q) & F ((c >= 2) & X p)");
    std::size_t subs = closure_size(S, phi);
    auto t0 = Clock::now();
    Encoding e = encode_fmc(S, phi, 64);
    std::string text = emit_smtlib(e.script);
    double enc = since(t0);
    double s16 = double(size_of(S, phi, 16)), s32 = double(size_of(S, phi, 32));
    double predicted = s32 + 2 * (s32 - s16);
    double actual = double(script_size(e.script).total());
    double err = std::abs(actual - predicted) / predicted;
    SolverConfig sc;
    sc.timeout_seconds = kPerfBudgetSeconds;
    auto t1 = Clock::now();
    SolverVerdict v = check(e.script, sc);
    double solve = since(t1);
    bool clean = v.status != Status::Unknown || v.reason == "timeout";
    bool ok = subs == 10 && enc < kPerfEncodeSeconds && err <= kPerfSizeTolerance && clean && solve < kPerfBudgetSeconds + 10;
    return {ok, std::to_string(subs) + " subformulae, encode " + fmt(enc) + " s, size " + std::to_string(std::size_t(actual)) +
                    " vs predicted " + std::to_string(std::size_t(predicted)) + " (" + fmt(100 * err, 1) + "% off), solver " +
                    status_name(v.status) + (v.reason.empty() ? "" : " " + v.reason) + " in " + fmt(solve) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string only = argc > 1 ? argv[1] : "";
    std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"soundness", soundness},
        {"relative-completeness", completeness},
        {"negative-agreement", negative_agreement},
        {"encoding-linearity", linearity},
        {"fltl-coherence", coherence},
        {"regression-sys-a", sys_a_regression},
        {"regression-sys-b", sys_b_regression},
        {"performance-smoke", performance},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && name.find(only) == std::string::npos) continue;
        auto t0 = Clock::now();
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << " [" << fmt(since(t0), 1) << " s]" << std::endl;
    }
    return failed ? 1 : 0;
}
