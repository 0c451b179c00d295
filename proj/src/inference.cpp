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

#include "mavabc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mavabc {

UniformPrior::UniformPrior(double lo_, double hi_) : lo(lo_), hi(hi_)
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ContractError("uniform prior needs finite bounds with lo < hi");
    }
}

void PosteriorSpec::validate() const
{
    if (!(prior.lo < prior.hi)) {
        throw ContractError("prior needs lo < hi");
    }
    if (!prior.contains(init_theta)) {
        throw ContractError("init_theta lies outside the prior support");
    }
    if (!(proposal_sd >= 0.0) || !std::isfinite(proposal_sd)) {
        throw ContractError("proposal_sd must be finite and >= 0");
    }
    if (iterations < 0) {
        throw ContractError("iterations must be >= 0");
    }
    if (!std::isfinite(theta_ref)) {
        throw ContractError("theta_ref must be finite");
    }
}

std::vector<double> ChainResult::thetas() const
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(row.theta);
    }
    return out;
}

double ChainResult::acceptance_rate() const
{
    if (rows.empty()) {
        return 0.0;
    }
    std::size_t accepted = 0;
    for (const auto& row : rows) {
        accepted += row.accepted;
    }
    return static_cast<double>(accepted) / static_cast<double>(rows.size());
}

ChainResult pseudo_marginal_mh(const UniformPrior& prior, double init_theta, double proposal_sd, int iterations,
    const LogLikelihoodEstimator& estimator, Rng& rng, std::uint64_t sweeps_per_call)
{
    if (!prior.contains(init_theta)) {
        throw ContractError("init_theta lies outside the prior support");
    }
    ChainResult result;
    result.rows.reserve(static_cast<std::size_t>(std::max(iterations, 0)));

    double theta = init_theta;
    double log_current = estimator(theta, rng);
    result.estimator_calls = 1;

    for (int it = 0; it < iterations; ++it) {
        bool accepted = false;
        if (proposal_sd > 0.0) {
            const double proposal = theta + proposal_sd * rng.normal();
            if (prior.contains(proposal)) {
                const double log_proposal = estimator(proposal, rng);
                ++result.estimator_calls;
                // uniform prior and symmetric proposal: only the estimates enter the ratio
                if (std::log(rng.uniform()) < log_proposal - log_current) {
                    theta = proposal;
                    log_current = log_proposal;
                    accepted = true;
                }
            }
        }
        result.rows.push_back(ChainRow{it, theta, log_current, accepted});
    }
    result.kernel_sweeps = result.estimator_calls * sweeps_per_call;
    return result;
}

LogLikelihoodEstimator auxiliary_likelihood(const MrfModel& model, const PosteriorSpec& spec)
{
    const EstimatorConfig& cfg = spec.estimator;
    cfg.validate();
    model.require_match(spec.data);
    const BridgeSchedule schedule = BridgeSchedule::linear(cfg.a);
    const ChainOptions options{cfg.sweeps_per_step, false};
    const double theta_ref = spec.theta_ref;
    const LatticeConfig y = spec.data;

    switch (cfg.variant) {
    case Variant::sav:
        return [&model, y, theta_ref, cfg, options](double theta, Rng& rng) {
            return log_gamma(model, y, theta) +
                sav_estimate(model, ThetaParam(theta, theta_ref), cfg.b, rng, std::nullopt, options).log_value;
        };
    case Variant::mav:
        return [&model, y, theta_ref, cfg, schedule, options](double theta, Rng& rng) {
            return log_gamma(model, y, theta) +
                mav_estimate(model, ThetaParam(theta, theta_ref), schedule, cfg.b, rng, options).log_value;
        };
    case Variant::reverse_chain:
        return [&model, y, theta_ref, cfg, schedule, options](double theta, Rng& rng) {
            return abc_reverse_chain_estimate(model, y, ThetaParam(theta, theta_ref), schedule, cfg.b, rng, options)
                .w.log_value;
        };
    case Variant::abc_indicator: break;
    }
    throw ContractError("pseudo-marginal MH needs the sav, mav or reverse_chain estimator");
}

LogLikelihoodEstimator oracle_likelihood(const MrfModel& model, const LatticeConfig& y)
{
    model.require_match(y);
    model.require_enumerable();
    return [&model, y](double theta, Rng&) {
        return log_gamma(model, y, theta) - exact_log_partition(model, theta);
    };
}

ChainResult pseudo_marginal_mh(const MrfModel& model, const PosteriorSpec& spec, Rng& rng)
{
    spec.validate();
    const auto estimator = auxiliary_likelihood(model, spec);
    const auto& cfg = spec.estimator;
    return pseudo_marginal_mh(spec.prior, spec.init_theta, spec.proposal_sd, spec.iterations, estimator, rng,
        sweeps_per_estimate(cfg.variant, cfg.a, cfg.b, cfg.sweeps_per_step));
}

ChainResult abc_mcmc(const MrfModel& model, const PosteriorSpec& spec, const AbcConfig& abc, Rng& rng)
{
    spec.validate();
    model.require_match(spec.data);
    const int b = spec.estimator.b;
    const ChainOptions options{spec.estimator.sweeps_per_step, false};

    ChainResult result;
    result.rows.reserve(static_cast<std::size_t>(spec.iterations));
    double theta = spec.init_theta;
    for (int it = 0; it < spec.iterations; ++it) {
        bool accepted = false;
        if (spec.proposal_sd > 0.0) {
            const double proposal = theta + spec.proposal_sd * rng.normal();
            if (spec.prior.contains(proposal)) {
                const auto indicator = abc_indicator_estimate(model, spec.data, proposal, abc, b, rng, options);
                ++result.estimator_calls;
                // prior and proposal ratio is 1 inside the support
                if (indicator.log_value == 0.0) {
                    theta = proposal;
                    accepted = true;
                }
            }
        }
        result.rows.push_back(ChainRow{it, theta, 0.0, accepted});
    }
    result.kernel_sweeps = result.estimator_calls *
        sweeps_per_estimate(Variant::abc_indicator, 2, b, spec.estimator.sweeps_per_step);
    return result;
}

double GridPosterior::mean() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        m += weights[k] * thetas[k];
    }
    return m;
}

double GridPosterior::quantile(double p) const
{
    if (thetas.empty()) {
        throw ContractError("empty grid posterior");
    }
    double cumulative = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        if (cumulative + weights[k] >= p && weights[k] > 0.0) {
            const double left = thetas[k] - 0.5 * cell_width;
            return left + (p - cumulative) / weights[k] * cell_width;
        }
        cumulative += weights[k];
    }
    return thetas.back() + 0.5 * cell_width;
}

GridPosterior exact_posterior_grid(const MrfModel& model, const LatticeConfig& y, const UniformPrior& prior,
    int grid_size)
{
    model.require_match(y);
    model.require_enumerable();
    if (grid_size < 100) {
        throw ContractError("grid_size must be >= 100");
    }
    GridPosterior out;
    out.cell_width = (prior.hi - prior.lo) / grid_size;
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(grid_size));
    for (int k = 0; k < grid_size; ++k) {
        const double theta = prior.lo + (k + 0.5) * out.cell_width;
        out.thetas.push_back(theta);
        logs.push_back(log_gamma(model, y, theta) - exact_log_partition(model, theta));
    }
    const double norm = log_sum_exp(logs);
    for (double l : logs) {
        out.weights.push_back(std::exp(l - norm));
    }
    return out;
}

} // namespace mavabc
