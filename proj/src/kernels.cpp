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

#include "mavabc/kernels.hpp"

#include <cmath>
#include <string>

namespace mavabc {

BridgeSchedule::BridgeSchedule(std::vector<double> betas) : betas_(std::move(betas))
{
    if (betas_.size() < 2) {
        throw ContractError("bridge schedule needs at least 2 levels");
    }
    if (betas_.front() != 0.0 || betas_.back() != 1.0) {
        throw ContractError("bridge schedule must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < betas_.size(); ++i) {
        if (!(betas_[i] > betas_[i - 1])) {
            throw ContractError("bridge schedule must be strictly increasing");
        }
    }
}

BridgeSchedule BridgeSchedule::linear(int levels)
{
    if (levels < 2) {
        throw ContractError("bridge schedule needs at least 2 levels");
    }
    std::vector<double> betas(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) {
        betas[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(levels - 1);
    }
    betas.back() = 1.0;
    return BridgeSchedule(std::move(betas));
}

double BridgeSchedule::beta(int level) const
{
    if (level < 1 || level > levels()) {
        throw ContractError("bridge level " + std::to_string(level) + " outside 1.." + std::to_string(levels()));
    }
    return betas_[static_cast<std::size_t>(level - 1)];
}

double log_bridge_gamma(const MrfModel& model, const LatticeConfig& config, const ThetaParam& theta,
    const BridgeSchedule& schedule, int level)
{
    const double beta = schedule.beta(level);
    if (level == 1) {
        return log_gamma(model, config, theta.theta_ref);
    }
    if (level == schedule.levels()) {
        return log_gamma(model, config, theta.theta);
    }
    return (1.0 - beta) * log_gamma(model, config, theta.theta_ref) + beta * log_gamma(model, config, theta.theta);
}

double bridge_theta(const ThetaParam& theta, const BridgeSchedule& schedule, int level)
{
    const double beta = schedule.beta(level);
    if (level == 1) {
        return theta.theta_ref;
    }
    if (level == schedule.levels()) {
        return theta.theta;
    }
    return (1.0 - beta) * theta.theta_ref + beta * theta.theta;
}

namespace {

double logistic_up(double theta, int neighbour_sum)
{
    return 1.0 / (1.0 + std::exp(-2.0 * theta * neighbour_sum));
}

int neighbour_sum(const MrfModel& model, const LatticeConfig& config, int site)
{
    int s = 0;
    for (int nb : model.neighbours(site)) {
        s += config.spin(nb);
    }
    return s;
}

} // namespace

double gibbs_conditional(const MrfModel& model, const LatticeConfig& config, int site, double theta_effective)
{
    model.require_match(config);
    if (site < 0 || site >= model.sites()) {
        throw ContractError("site index out of range");
    }
    return logistic_up(theta_effective, neighbour_sum(model, config, site));
}

GibbsKernel::GibbsKernel(const MrfModel& model, double theta, ScanOrder scan, int sweeps)
    : model_(&model), theta_(theta), scan_(scan), sweeps_(sweeps)
{
    if (!std::isfinite(theta)) {
        throw ContractError("kernel parameter must be finite");
    }
    if (sweeps < 1) {
        throw ContractError("sweeps per kernel step must be >= 1");
    }
    if (model.max_degree() <= kMaxTableDegree) {
        for (int h = -kMaxTableDegree; h <= kMaxTableDegree; ++h) {
            table_[static_cast<std::size_t>(h + kMaxTableDegree)] = logistic_up(theta, h);
        }
        tabulated_ = true;
    }
}

double GibbsKernel::prob_up(const LatticeConfig& config, int site) const
{
    const int h = neighbour_sum(*model_, config, site);
    return tabulated_ ? table_[static_cast<std::size_t>(h + kMaxTableDegree)] : logistic_up(theta_, h);
}

void GibbsKernel::update_site(LatticeConfig& config, int site, double u) const
{
    config.set_spin(site, u < prob_up(config, site) ? 1 : -1);
}

void GibbsKernel::step(LatticeConfig& config, Rng& rng) const
{
    const int n = model_->sites();
    const auto updates = static_cast<std::uint64_t>(n);
    for (int sweep = 0; sweep < sweeps_; ++sweep) {
        if (scan_ == ScanOrder::random) {
            for (std::uint64_t k = 0; k < updates; ++k) {
                const int site = static_cast<int>(rng.index(updates));
                update_site(config, site, rng.uniform());
            }
        } else {
            for (int site = 0; site < n; ++site) {
                update_site(config, site, rng.uniform());
            }
        }
    }
}

LatticeConfig GibbsKernel::kernel_step(const LatticeConfig& config, Rng& rng) const
{
    model_->require_match(config);
    LatticeConfig next = config;
    step(next, rng);
    return next;
}

AnnealKernel::AnnealKernel(const MrfModel& model_, ThetaParam theta_, BridgeSchedule schedule_, int level_,
    ScanOrder scan_, int sweeps_)
    : model(model_), theta(theta_), schedule(std::move(schedule_)), level(level_), scan(scan_), sweeps(sweeps_)
{
    if (level < 1 || level > schedule.levels()) {
        throw ContractError("kernel level " + std::to_string(level) + " outside 1.." +
            std::to_string(schedule.levels()));
    }
}

LatticeConfig AnnealKernel::kernel_step(const LatticeConfig& config, Rng& rng) const
{
    return gibbs().kernel_step(config, rng);
}

namespace {

void require_transition_capacity(const MrfModel& model)
{
    if (model.sites() > kMaxTransitionSites) {
        throw OracleCapacityError("lattice has " + std::to_string(model.sites()) +
            " sites; exact transition matrices are limited to " + std::to_string(kMaxTransitionSites));
    }
}

// next = current * G_site, where G_site is the heat-bath update of one site
// with weight `scale`, accumulated into `next`.
void accumulate_site_update(const std::vector<double>& current, std::vector<double>& next, std::size_t states,
    const std::vector<double>& up, int site, int sites, double scale)
{
    const std::size_t bit = std::size_t{1} << site;
    for (std::size_t x = 0; x < states; ++x) {
        const double* row = &current[x * states];
        double* out = &next[x * states];
        for (std::size_t y = 0; y < states; ++y) {
            const double m = row[y];
            if (m == 0.0) {
                continue;
            }
            const double p = up[y * static_cast<std::size_t>(sites) + static_cast<std::size_t>(site)];
            out[y | bit] += scale * m * p;
            out[y & ~bit] += scale * m * (1.0 - p);
        }
    }
}

} // namespace

TransitionMatrix transition_matrix(const AnnealKernel& kernel)
{
    const MrfModel& model = kernel.model;
    require_transition_capacity(model);
    const GibbsKernel gibbs = kernel.gibbs();
    const int n = model.sites();
    const std::size_t states = std::size_t{1} << n;

    std::vector<double> up(states * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < states; ++k) {
        const LatticeConfig config = LatticeConfig::from_index(model.rows(), model.cols(), k);
        for (int s = 0; s < n; ++s) {
            up[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(s)] = gibbs.prob_up(config, s);
        }
    }

    std::vector<double> current(states * states, 0.0);
    for (std::size_t k = 0; k < states; ++k) {
        current[k * states + k] = 1.0;
    }
    std::vector<double> next(states * states);

    for (int sweep = 0; sweep < kernel.sweeps; ++sweep) {
        for (int u = 0; u < n; ++u) {
            std::fill(next.begin(), next.end(), 0.0);
            if (kernel.scan == ScanOrder::random) {
                const double scale = 1.0 / static_cast<double>(n);
                for (int s = 0; s < n; ++s) {
                    accumulate_site_update(current, next, states, up, s, n, scale);
                }
            } else {
                accumulate_site_update(current, next, states, up, u, n, 1.0);
            }
            current.swap(next);
        }
    }
    return TransitionMatrix{states, std::move(current)};
}

std::vector<double> level_distribution(const AnnealKernel& kernel)
{
    const MrfModel& model = kernel.model;
    model.require_enumerable();
    const std::size_t states = std::size_t{1} << model.sites();
    std::vector<double> logs(states);
    for (std::size_t k = 0; k < states; ++k) {
        logs[k] = log_bridge_gamma(model, LatticeConfig::from_index(model.rows(), model.cols(), k), kernel.theta,
            kernel.schedule, kernel.level);
    }
    const double log_norm = log_sum_exp(logs);
    for (auto& v : logs) {
        v = std::exp(v - log_norm);
    }
    return logs;
}

DetailedBalanceReport detailed_balance_check(const AnnealKernel& kernel, double tolerance)
{
    const TransitionMatrix matrix = transition_matrix(kernel);
    const std::vector<double> f = level_distribution(kernel);
    DetailedBalanceReport report;
    for (std::size_t x = 0; x < matrix.size; ++x) {
        for (std::size_t y = x + 1; y < matrix.size; ++y) {
            const double violation = std::abs(f[x] * matrix(x, y) - f[y] * matrix(y, x));
            if (violation > report.max_violation) {
                report.max_violation = violation;
                report.worst_from = x;
                report.worst_to = y;
            }
        }
    }
    report.reversible = report.max_violation <= tolerance;
    return report;
}

} // namespace mavabc
