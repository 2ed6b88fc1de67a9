#pragma once

#include "flatcheck/counter_system.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace flatcheck {

// prefix · period^ω. Only the first copy of the period is stored; copy p is
// shifted by p times the period drift. steps[k] leads from position k to
// position k+1, the last entry closes the period.
struct LassoRun {
    std::vector<Configuration> prefix;
    std::vector<Configuration> period;
    std::vector<TransitionId> steps;

    std::size_t prefix_length() const { return prefix.size(); }
    std::size_t period_length() const { return period.size(); }
    std::size_t base_length() const { return prefix.size() + period.size(); }

    // Counter change over one period copy.
    Valuation drift(const CounterSystem& S) const {
        Valuation d(S.counters().size(), 0);
        for (std::size_t k = prefix.size(); k < steps.size(); ++k)
            for (std::size_t c = 0; c < d.size(); ++c) d[c] += S.transition(steps[k]).update[c];
        return d;
    }

    StateId state_at(std::size_t pos) const {
        if (pos < prefix.size()) return prefix[pos].state;
        return period[(pos - prefix.size()) % period.size()].state;
    }

    Configuration at(const CounterSystem& S, std::size_t pos) const {
        if (pos < prefix.size()) return prefix[pos];
        std::size_t r = (pos - prefix.size()) % period.size();
        std::size_t p = (pos - prefix.size()) / period.size();
        Configuration c = period[r];
        if (p > 0) {
            Valuation d = drift(S);
            for (std::size_t k = 0; k < d.size(); ++k) c.valuation[k] += d[k] * p;
        }
        return c;
    }

    TransitionId step_at(std::size_t pos) const {
        if (pos < prefix.size()) return steps[pos];
        return steps[prefix.size() + (pos - prefix.size()) % period.size()];
    }
};

// Checks that the lasso is a run of S from (s_I, 0): every step matches its
// transition and every guard holds in every period copy.
inline bool is_run(const CounterSystem& S, const LassoRun& run, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (run.period.empty()) return fail("empty period");
    if (run.steps.size() != run.base_length()) return fail("step count does not match run length");
    std::size_t C = S.counters().size();
    for (std::size_t k = 0; k < run.base_length(); ++k) {
        const Configuration& c = k < run.prefix.size() ? run.prefix[k] : run.period[k - run.prefix.size()];
        if (c.state >= S.num_states()) return fail("unknown state at position " + std::to_string(k));
        if (c.valuation.size() != C) return fail("valuation size mismatch at position " + std::to_string(k));
        if (run.steps[k] >= S.transitions().size()) return fail("unknown transition at position " + std::to_string(k));
    }
    Configuration first = run.prefix.empty() ? run.period.front() : run.prefix.front();
    if (first.state != S.initial() || first.valuation != S.zero_valuation())
        return fail("run does not start in the initial configuration");
    Valuation d = run.drift(S);
    for (std::size_t k = 0; k < run.base_length(); ++k) {
        Configuration from = run.at(S, k), to = run.at(S, k + 1);
        const Transition& t = S.transition(run.steps[k]);
        if (!S.is_step(from, t, to)) return fail("invalid step at position " + std::to_string(k));
        if (k >= run.prefix.size())
            for (const auto& g : t.guards)
                if (S.eval(g.term, d) < 0) return fail("guard fails in a later period copy at position " + std::to_string(k));
    }
    return true;
}

inline nlohmann::json configuration_to_json(const CounterSystem& S, const Configuration& c) {
    nlohmann::json v = nlohmann::json::object();
    for (std::size_t k = 0; k < S.counters().size(); ++k) v[S.counters()[k]] = c.valuation.at(k).str();
    return {{"state", S.state_name(c.state)}, {"valuation", v}};
}

inline nlohmann::json lasso_to_json(const CounterSystem& S, const LassoRun& run) {
    nlohmann::json j;
    j["prefix"] = nlohmann::json::array();
    j["period"] = nlohmann::json::array();
    for (const auto& c : run.prefix) j["prefix"].push_back(configuration_to_json(S, c));
    for (const auto& c : run.period) j["period"].push_back(configuration_to_json(S, c));
    j["steps"] = run.steps;
    return j;
}

inline LassoRun lasso_from_json(const CounterSystem& S, const nlohmann::json& j) {
    auto conf = [&](const nlohmann::json& c) {
        Configuration out;
        out.state = S.state_index(c.at("state").get<std::string>());
        out.valuation = S.zero_valuation();
        for (auto it = c.at("valuation").begin(); it != c.at("valuation").end(); ++it)
            out.valuation.at(S.counter_index(it.key())) = BigInt(it.value().get<std::string>());
        return out;
    };
    LassoRun r;
    for (const auto& c : j.at("prefix")) r.prefix.push_back(conf(c));
    for (const auto& c : j.at("period")) r.period.push_back(conf(c));
    r.steps = j.at("steps").get<std::vector<TransitionId>>();
    return r;
}

}  // namespace flatcheck
