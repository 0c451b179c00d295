/*
   Copyright 2026 The mavabc Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "mavabc/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "mavabc/parallel.hpp"
#include "mavabc/stats.hpp"

namespace mavabc {

std::string_view to_string(Variant variant)
{
    switch (variant) {
    case Variant::sav: return "sav";
    case Variant::mav: return "mav";
    case Variant::reverse_chain: return "reverse_chain";
    case Variant::abc_indicator: return "abc_indicator";
    }
    return "?";
}

std::string_view to_string(SampleVariant variant)
{
    switch (variant) {
    case SampleVariant::sav: return "sav";
    case SampleVariant::mav: return "mav";
    case SampleVariant::reverse_w: return "reverse_w";
    case SampleVariant::reverse_v: return "reverse_v";
    case SampleVariant::abc_indicator: return "abc_indicator";
    }
    return "?";
}

std::string_view to_string(Target target)
{
    switch (target) {
    case Target::inv_z: return "inv_Z";
    case Target::ratio_zref_over_z: return "ratio_Zref_over_Z";
    case Target::pi_n_at_y: return "pi_n_at_y";
    case Target::abc_likelihood: return "abc_likelihood";
    }
    return "?";
}

Variant parse_variant(std::string_view text)
{
    for (auto v : {Variant::sav, Variant::mav, Variant::reverse_chain, Variant::abc_indicator}) {
        if (text == to_string(v)) {
            return v;
        }
    }
    throw ContractError("unknown estimator variant '" + std::string(text) +
        "' (expected sav, mav, reverse_chain or abc_indicator)");
}

std::string_view to_string(AbcConfig::Distance distance)
{
    return distance == AbcConfig::Distance::exact_match ? "exact_match" : "hamming";
}

AbcConfig::Distance parse_distance(std::string_view text)
{
    if (text == "exact_match") {
        return AbcConfig::Distance::exact_match;
    }
    if (text == "hamming") {
        return AbcConfig::Distance::hamming;
    }
    throw ContractError("unknown distance '" + std::string(text) + "' (expected exact_match or hamming)");
}

LatticeConfig uniform_config(const MrfModel& model, Rng& rng)
{
    std::vector<std::int8_t> spins(static_cast<std::size_t>(model.sites()));
    for (auto& s : spins) {
        s = static_cast<std::int8_t>(rng.spin());
    }
    return LatticeConfig(model.rows(), model.cols(), std::move(spins));
}

LatticeConfig burn_in(const MrfModel& model, double theta, LatticeConfig start, int steps, Rng& rng,
    const ChainOptions& options)
{
    model.require_match(start);
    if (steps < 0) {
        throw ContractError("burn-in length must be >= 0");
    }
    const GibbsKernel kernel(model, theta, ScanOrder::random, options.sweeps_per_step);
    for (int k = 0; k < steps; ++k) {
        kernel.step(start, rng);
    }
    return start;
}

EstimateSample sav_estimate(const MrfModel& model, const ThetaParam& theta, int b, Rng& rng,
    std::optional<double> base_log_normaliser, const ChainOptions& options)
{
    if (b < 1) {
        throw ContractError("SAV needs b >= 1 burn-in steps");
    }
    const LatticeConfig x = burn_in(model, theta.theta, uniform_config(model, rng), b, rng, options);
    EstimateSample out;
    out.variant = SampleVariant::sav;
    out.log_value = log_gamma(model, x, theta.theta_ref) - log_gamma(model, x, theta.theta);
    out.target = Target::ratio_zref_over_z;
    if (base_log_normaliser) {
        out.log_value -= *base_log_normaliser;
        out.target = Target::inv_z;
    }
    return out;
}

EstimateSample mav_from_state(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    LatticeConfig x_a, Rng& rng, const ChainOptions& options)
{
    model.require_match(x_a);
    const int a = schedule.levels();
    EstimateSample out;
    out.variant = SampleVariant::mav;
    out.target = Target::ratio_zref_over_z;

    std::vector<LatticeConfig> states;
    if (options.record_trace) {
        states.reserve(static_cast<std::size_t>(a - 1));
        states.push_back(x_a);
    }

    LatticeConfig x = std::move(x_a);
    double log_value = 0.0;
    log_value += log_bridge_gamma(model, x, theta, schedule, a - 1) - log_bridge_gamma(model, x, theta, schedule, a);
    for (int i = a - 1; i >= 2; --i) {
        const GibbsKernel kernel(model, bridge_theta(theta, schedule, i), ScanOrder::random, options.sweeps_per_step);
        kernel.step(x, rng);
        log_value +=
            log_bridge_gamma(model, x, theta, schedule, i - 1) - log_bridge_gamma(model, x, theta, schedule, i);
        if (options.record_trace) {
            states.push_back(x);
        }
    }
    out.log_value = log_value;

    if (options.record_trace) {
        // states were produced x_a, ..., x_2; store as x_2, ..., x_a
        std::reverse(states.begin(), states.end());
        ChainTrace trace;
        trace.direction = Direction::forward;
        for (int i = 2; i < a; ++i) {
            trace.levels.push_back(i);
        }
        trace.states = std::move(states);
        out.trace = std::move(trace);
    }
    return out;
}

EstimateSample mav_estimate_from(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    int b, const LatticeConfig& start, Rng& rng, const ChainOptions& options)
{
    LatticeConfig x_a = burn_in(model, theta.theta, start, b, rng, options);
    return mav_from_state(model, theta, schedule, std::move(x_a), rng, options);
}

EstimateSample mav_estimate(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    int b, Rng& rng, const ChainOptions& options)
{
    LatticeConfig start = uniform_config(model, rng);
    return mav_estimate_from(model, theta, schedule, b, start, rng, options);
}

ReverseChainSample abc_reverse_chain_estimate(const MrfModel& model, const LatticeConfig& y,
    const ThetaParam& theta, const BridgeSchedule& schedule, int b, Rng& rng, const ChainOptions& options)
{
    model.require_match(y);
    if (b < 0) {
        throw ContractError("reverse chain needs b >= 0");
    }
    const int a = schedule.levels();
    const int n = a + b;

    std::vector<LatticeConfig> states;
    if (options.record_trace) {
        states.reserve(static_cast<std::size_t>(n));
        states.push_back(y);
    }
    auto record = [&](const LatticeConfig& x) {
        if (options.record_trace) {
            states.push_back(x);
        }
    };

    // x_{n-1}, ..., x_a under the target kernel (levels above a reuse it)
    LatticeConfig x = y;
    const GibbsKernel target(model, theta.theta, ScanOrder::random, options.sweeps_per_step);
    for (int i = n - 1; i >= a; --i) {
        target.step(x, rng);
        record(x);
    }

    double v = 0.0;
    v += log_bridge_gamma(model, x, theta, schedule, a - 1) - log_bridge_gamma(model, x, theta, schedule, a);
    for (int i = a - 1; i >= 2; --i) {
        const GibbsKernel kernel(model, bridge_theta(theta, schedule, i), ScanOrder::random, options.sweeps_per_step);
        kernel.step(x, rng);
        record(x);
        v += log_bridge_gamma(model, x, theta, schedule, i - 1) - log_bridge_gamma(model, x, theta, schedule, i);
    }
    // x_1 carries no weight factor but completes the chain
    const GibbsKernel base(model, theta.theta_ref, ScanOrder::random, options.sweeps_per_step);
    base.step(x, rng);
    record(x);

    ReverseChainSample out;
    out.v.variant = SampleVariant::reverse_v;
    out.v.target = Target::ratio_zref_over_z;
    out.v.log_value = v;
    out.w.variant = SampleVariant::reverse_w;
    out.w.target = Target::pi_n_at_y;
    out.w.log_value = log_gamma(model, y, theta.theta) + v;

    if (options.record_trace) {
        std::reverse(states.begin(), states.end());
        ChainTrace trace;
        trace.direction = Direction::reverse;
        trace.states = std::move(states);
        for (int i = 1; i < n; ++i) {
            trace.levels.push_back(std::min(i, a));
        }
        out.w.trace = trace;
        out.v.trace = std::move(trace);
    }
    return out;
}

bool abc_accepts(const LatticeConfig& y, const LatticeConfig& x, const AbcConfig& abc)
{
    if (abc.distance == AbcConfig::Distance::exact_match) {
        return x == y;
    }
    return static_cast<double>(hamming_distance(y, x)) <= abc.epsilon;
}

EstimateSample abc_indicator_estimate(const MrfModel& model, const LatticeConfig& y, double theta,
    const AbcConfig& abc, int b, Rng& rng, const ChainOptions& options)
{
    model.require_match(y);
    if (b < 1) {
        throw ContractError("ABC indicator needs b >= 1 burn-in steps");
    }
    if (!(abc.epsilon >= 0.0)) {
        throw ContractError("ABC epsilon must be >= 0");
    }
    const LatticeConfig x = burn_in(model, theta, uniform_config(model, rng), b, rng, options);
    EstimateSample out;
    out.variant = SampleVariant::abc_indicator;
    out.target = Target::abc_likelihood;
    out.log_value = abc_accepts(y, x, abc) ? 0.0 : -std::numeric_limits<double>::infinity();
    return out;
}

EquivalenceReport mav_reverse_equivalence_check(const MrfModel& model, const LatticeConfig& y,
    const ThetaParam& theta, const BridgeSchedule& schedule, int b, std::uint64_t seed, std::size_t replicates,
    double ks_alpha, const ChainOptions& options)
{
    EquivalenceReport report;
    for (std::size_t r = 0; r < replicates; ++r) {
        Rng mav_rng = Rng::stream(seed, r);
        const double mav = mav_estimate_from(model, theta, schedule, b, y, mav_rng, options).log_value;
        Rng rev_rng = Rng::stream(seed, r);
        const double rev = abc_reverse_chain_estimate(model, y, theta, schedule, b, rev_rng, options).v.log_value;
        if (std::bit_cast<std::uint64_t>(mav) != std::bit_cast<std::uint64_t>(rev)) {
            ++report.mismatches;
        }
    }
    report.bitwise_equal = report.mismatches == 0;

    std::vector<double> mav_draws(replicates);
    std::vector<double> rev_draws(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        Rng mav_rng(derive_seed(seed, {1, r}));
        mav_draws[r] = mav_estimate_from(model, theta, schedule, b, y, mav_rng, options).log_value;
        Rng rev_rng(derive_seed(seed, {2, r}));
        rev_draws[r] = abc_reverse_chain_estimate(model, y, theta, schedule, b, rev_rng, options).v.log_value;
    }
    const KsResult ks = ks_two_sample(std::move(mav_draws), std::move(rev_draws));
    report.ks_statistic = ks.statistic;
    report.ks_p_value = ks.p_value;
    report.distribution_match = ks.p_value > ks_alpha;
    return report;
}

std::uint64_t sweeps_per_estimate(Variant variant, int a, int b, int sweeps_per_step)
{
    std::uint64_t steps = 0;
    switch (variant) {
    case Variant::sav:
    case Variant::abc_indicator: steps = static_cast<std::uint64_t>(b); break;
    case Variant::mav: steps = static_cast<std::uint64_t>(b + std::max(a - 2, 0)); break;
    case Variant::reverse_chain: steps = static_cast<std::uint64_t>(b + a - 1); break;
    }
    return steps * static_cast<std::uint64_t>(sweeps_per_step);
}

void EstimatorConfig::validate() const
{
    if (a < 2) {
        throw ContractError("a must be >= 2");
    }
    if (b < 0) {
        throw ContractError("b must be >= 0");
    }
    if ((variant == Variant::sav || variant == Variant::abc_indicator) && b < 1) {
        throw ContractError("b must be >= 1 for the " + std::string(to_string(variant)) + " estimator");
    }
    if (replicates < 1) {
        throw ContractError("replicates must be >= 1");
    }
    if (sweeps_per_step < 1) {
        throw ContractError("sweeps_per_step must be >= 1");
    }
}

std::vector<EstimateSample> run_estimator(const EstimationProblem& problem, const EstimatorConfig& config,
    unsigned threads)
{
    config.validate();
    const MrfModel& model = problem.model;
    const BridgeSchedule schedule = problem.schedule.value_or(BridgeSchedule::linear(config.a));
    if (schedule.levels() != config.a) {
        throw ContractError("schedule has " + std::to_string(schedule.levels()) + " levels but a = " +
            std::to_string(config.a));
    }
    const bool needs_y = config.variant == Variant::reverse_chain || config.variant == Variant::abc_indicator;
    if (needs_y && !problem.y) {
        throw ContractError("the " + std::string(to_string(config.variant)) + " estimator needs a dataset y");
    }
    if (problem.y) {
        model.require_match(*problem.y);
    }

    const std::size_t per = config.variant == Variant::reverse_chain ? 2 : 1;
    std::vector<EstimateSample> samples(static_cast<std::size_t>(config.replicates) * per);
    const ChainOptions options{config.sweeps_per_step, false};

    parallel_for(static_cast<std::size_t>(config.replicates), threads, [&](std::size_t r) {
        Rng rng = Rng::stream(config.seed, r);
        switch (config.variant) {
        case Variant::sav:
            samples[r] = sav_estimate(model, problem.theta, config.b, rng, std::nullopt, options);
            break;
        case Variant::mav:
            samples[r] = mav_estimate(model, problem.theta, schedule, config.b, rng, options);
            break;
        case Variant::reverse_chain: {
            auto wv = abc_reverse_chain_estimate(model, *problem.y, problem.theta, schedule, config.b, rng, options);
            samples[2 * r] = std::move(wv.w);
            samples[2 * r + 1] = std::move(wv.v);
            break;
        }
        case Variant::abc_indicator:
            samples[r] = abc_indicator_estimate(model, *problem.y, problem.theta.theta, problem.abc, config.b, rng,
                options);
            break;
        }
        for (std::size_t k = 0; k < per; ++k) {
            samples[r * per + k].replicate = r;
        }
    });
    return samples;
}

} // namespace mavabc
