#pragma once

#include "flatcheck/consistency.hpp"
#include "flatcheck/encoder.hpp"
#include "flatcheck/solver.hpp"
#include "flatcheck/witness.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace flatcheck {

struct CheckConfig {
    CounterSystem system;
    Formula formula;
    std::size_t start = 2;
    std::size_t max = 64;
    std::size_t growth = 2;       // depth multiplier between probes
    bool single_depth = false;    // probe only `start`
    SolverConfig solver;
    bool validate = true;
    bool minimize_depth = false;
    bool parallel = false;

    void check_invariants() const {
        if (start < 2) throw Error("start depth must be at least 2");
        if (max < start) throw Error("max depth must not be below the start depth");
        if (growth < 2 && !single_depth) throw Error("depth growth factor must be at least 2");
        if (!(solver.timeout_seconds > 0)) throw Error("timeout must be positive");
        if (!formula) throw Error("no formula");
    }

    std::vector<std::size_t> schedule() const {
        if (single_depth) return {start};
        std::vector<std::size_t> out;
        for (std::size_t n = start; n < max; n *= growth) out.push_back(n);
        out.push_back(max);
        return out;
    }
};

enum class Verdict { SatAtDepth, UnsatUpTo, Unknown };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::SatAtDepth: return "sat";
        case Verdict::UnsatUpTo: return "unsat";
        case Verdict::Unknown: return "unknown";
    }
    return "?";
}

struct DepthRecord {
    std::size_t n = 0;
    Status status = Status::Unknown;
    std::string reason;
    double encode_seconds = 0, solve_seconds = 0;
    std::size_t declarations = 0, nodes = 0;

    bool operator==(const DepthRecord&) const = default;
};

struct CheckOutcome {
    Verdict verdict = Verdict::Unknown;
    std::size_t depth = 0;  // Sat depth, or the largest depth probed
    bool negated = false;   // Sat witnesses are counterexamples
    bool validated = false;
    nlohmann::json witness;  // null unless Sat
    std::string details;
    std::vector<DepthRecord> depths;

    bool operator==(const CheckOutcome&) const = default;
};

inline int exit_code(const CheckOutcome& o) {
    switch (o.verdict) {
        case Verdict::SatAtDepth: return 0;
        case Verdict::UnsatUpTo: return 1;
        case Verdict::Unknown: return 2;
    }
    return 2;
}

inline nlohmann::json outcome_to_json(const CheckOutcome& o) {
    nlohmann::json j;
    j["verdict"] = verdict_name(o.verdict);
    j["depth"] = o.depth;
    j["negated"] = o.negated;
    j["validated"] = o.validated;
    j["witness"] = o.witness;
    j["details"] = o.details;
    j["depths"] = nlohmann::json::array();
    for (const auto& d : o.depths)
        j["depths"].push_back({{"n", d.n}, {"status", status_name(d.status)}, {"reason", d.reason},
                               {"encode_seconds", d.encode_seconds}, {"solve_seconds", d.solve_seconds},
                               {"declarations", d.declarations}, {"nodes", d.nodes}});
    return j;
}

inline CheckOutcome outcome_from_json(const nlohmann::json& j) {
    CheckOutcome o;
    std::string v = j.at("verdict").get<std::string>();
    if (v == "sat") o.verdict = Verdict::SatAtDepth;
    else if (v == "unsat") o.verdict = Verdict::UnsatUpTo;
    else if (v == "unknown") o.verdict = Verdict::Unknown;
    else throw Error("unknown verdict '" + v + "'");
    o.depth = j.at("depth").get<std::size_t>();
    o.negated = j.at("negated").get<bool>();
    o.validated = j.at("validated").get<bool>();
    o.witness = j.at("witness");
    o.details = j.at("details").get<std::string>();
    for (const auto& d : j.at("depths")) {
        DepthRecord r;
        r.n = d.at("n").get<std::size_t>();
        std::string s = d.at("status").get<std::string>();
        r.status = s == "sat" ? Status::Sat : s == "unsat" ? Status::Unsat : Status::Unknown;
        r.reason = d.at("reason").get<std::string>();
        r.encode_seconds = d.at("encode_seconds").get<double>();
        r.solve_seconds = d.at("solve_seconds").get<double>();
        r.declarations = d.at("declarations").get<std::size_t>();
        r.nodes = d.at("nodes").get<std::size_t>();
        o.depths.push_back(r);
    }
    return o;
}

// Result of one depth: the record plus a witness bundle when Sat survived
// decoding and (optionally) validation.
struct DepthResult {
    DepthRecord record;
    nlohmann::json witness;
    bool validated = false;
    std::string details;
};

inline DepthResult probe_depth(const CheckConfig& cfg, std::size_t n, const std::atomic<bool>* cancel = nullptr) {
    DepthResult r;
    r.record.n = n;
    auto t0 = std::chrono::steady_clock::now();
    Encoding enc = encode_fmc(cfg.system, cfg.formula, n);
    r.record.encode_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ScriptSize sz = script_size(enc.script);
    r.record.declarations = sz.declarations;
    r.record.nodes = sz.nodes;
    SolverConfig sc = cfg.solver;
    if (cancel) sc.cancel = cancel;
    SolverVerdict v = check(enc.script, sc);
    r.record.solve_seconds = v.seconds;
    r.record.status = v.status;
    r.record.reason = v.reason;
    if (v.status != Status::Sat) {
        r.details = v.diagnostics;
        return r;
    }
    try {
        ApsModel aps = decode(enc, v.model);
        LassoRun run = concretize(aps);
        ConsistencyReport rep = check_consistency(aps);
        r.witness = witness_bundle(aps, run, rep);
        r.witness["depth"] = n;
        if (cfg.validate) {
            std::string why;
            r.validated = validate_run(cfg.system, run, enc.phi, &why) && rep.all_pass();
            if (!r.validated) {
                r.record.status = Status::Unknown;
                r.record.reason = "invalid-witness";
                r.details = why.empty() ? "consistency check failed" : why;
            }
        }
    } catch (const Error& e) {
        r.record.status = Status::Unknown;
        r.record.reason = "decode-error";
        r.details = e.what();
    }
    return r;
}

namespace detail {

inline void take_sat(CheckOutcome& o, DepthResult& r) {
    o.verdict = Verdict::SatAtDepth;
    o.depth = r.record.n;
    o.witness = std::move(r.witness);
    o.validated = r.validated;
}

inline void finish_without_sat(CheckOutcome& o, std::size_t max_probed) {
    o.depth = max_probed;
    std::string unknown;
    for (const auto& d : o.depths)
        if (d.status == Status::Unknown)
            unknown += (unknown.empty() ? "" : "; ") + std::string("n=") + std::to_string(d.n) + ": " + d.reason;
    if (unknown.empty()) {
        o.verdict = Verdict::UnsatUpTo;
    } else {
        o.verdict = Verdict::Unknown;
        o.details = unknown;
    }
}

// Scans downward from just below the Sat depth while results stay Sat.
inline void minimize(const CheckConfig& cfg, CheckOutcome& o, std::size_t floor_exclusive) {
    for (std::size_t n = o.depth; n-- > std::max<std::size_t>(floor_exclusive + 1, 2);) {
        DepthResult r = probe_depth(cfg, n);
        o.depths.push_back(r.record);
        if (r.record.status != Status::Sat) break;
        take_sat(o, r);
    }
}

inline CheckOutcome run_sequential(const CheckConfig& cfg) {
    CheckOutcome o;
    std::size_t prev = 1;
    for (std::size_t n : cfg.schedule()) {
        if (cfg.solver.cancel && cfg.solver.cancel->load()) break;
        DepthResult r = probe_depth(cfg, n);
        o.depths.push_back(r.record);
        if (r.record.status == Status::Sat) {
            take_sat(o, r);
            if (cfg.minimize_depth) minimize(cfg, o, prev);
            return o;
        }
        if (!r.details.empty()) o.details += (o.details.empty() ? "" : "\n") + r.details;
        prev = n;
    }
    std::string saved = o.details;
    finish_without_sat(o, o.depths.empty() ? 0 : o.depths.back().n);
    if (o.verdict == Verdict::Unknown && !saved.empty()) o.details += "\n" + saved;
    return o;
}

// All depths at once; a Sat at depth n cancels the probes of larger depths.
inline CheckOutcome run_parallel(const CheckConfig& cfg) {
    auto depths = cfg.schedule();
    std::vector<std::unique_ptr<std::atomic<bool>>> cancel;
    for (std::size_t k = 0; k < depths.size(); ++k) cancel.push_back(std::make_unique<std::atomic<bool>>(false));
    std::mutex mu;
    std::vector<std::future<DepthResult>> futs;
    for (std::size_t k = 0; k < depths.size(); ++k)
        futs.push_back(std::async(std::launch::async, [&, k] {
            DepthResult r = probe_depth(cfg, depths[k], cancel[k].get());
            if (r.record.status == Status::Sat) {
                std::lock_guard<std::mutex> lock(mu);
                for (std::size_t q = k + 1; q < depths.size(); ++q) cancel[q]->store(true);
            }
            return r;
        }));
    std::vector<DepthResult> results;
    for (auto& f : futs) results.push_back(f.get());
    CheckOutcome o;
    std::size_t prev = 1;
    for (auto& r : results) {
        o.depths.push_back(r.record);
        if (o.verdict != Verdict::SatAtDepth && r.record.status == Status::Sat) {
            take_sat(o, r);
            if (cfg.minimize_depth) minimize(cfg, o, prev);
        }
        if (o.verdict != Verdict::SatAtDepth) prev = r.record.n;
    }
    if (o.verdict != Verdict::SatAtDepth) finish_without_sat(o, depths.back());
    return o;
}

}  // namespace detail

// Probes the depth schedule until the first Sat. Unknown at one depth is
// recorded and the search goes on.
inline CheckOutcome run_check(const CheckConfig& cfg) {
    cfg.check_invariants();
    return cfg.parallel ? detail::run_parallel(cfg) : detail::run_sequential(cfg);
}

// Searches for a run satisfying ¬Φ; a Sat witness is a counterexample to Φ.
inline CheckOutcome negate_and_check(const CheckConfig& cfg) {
    CheckConfig neg = cfg;
    neg.formula = f_not(cfg.formula);
    CheckOutcome o = run_check(neg);
    o.negated = true;
    return o;
}

}  // namespace flatcheck
