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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mavabc/lattice.hpp"
#include "mavabc/rng.hpp"

namespace mavabc {

/// Largest lattice for which exact transition matrices are built.
inline constexpr int kMaxTransitionSites = 12;

/*
 * Inverse-temperature ladder beta_1 = 0 < ... < beta_a = 1. Levels are
 * 1-based: level 1 is the base density gamma(.|theta_ref), level a the
 * target gamma(.|theta).
 */
class BridgeSchedule {
public:
    explicit BridgeSchedule(std::vector<double> betas);

    /// `levels` linearly spaced values from 0 to 1.
    static BridgeSchedule linear(int levels);

    int levels() const { return static_cast<int>(betas_.size()); }
    double beta(int level) const;
    std::span<const double> betas() const { return betas_; }

    friend bool operator==(const BridgeSchedule&, const BridgeSchedule&) = default;

private:
    std::vector<double> betas_;
};

/// Geometric bridge (1 - beta_i) log gamma(x|theta_ref) + beta_i log gamma(x|theta).
/// The endpoints reduce to a single log_gamma call.
double log_bridge_gamma(const MrfModel& model, const LatticeConfig& config, const ThetaParam& theta,
    const BridgeSchedule& schedule, int level);

/// Ising parameter whose gamma equals the level-i bridge density.
double bridge_theta(const ThetaParam& theta, const BridgeSchedule& schedule, int level);

/// P(spin_site = +1 | rest) under the Ising model at `theta_effective`.
double gibbs_conditional(const MrfModel& model, const LatticeConfig& config, int site, double theta_effective);

enum class ScanOrder {
    random,     ///< sites drawn uniformly with replacement; reversible
    systematic, ///< sites 0..N-1 in order; not reversible, kept as a test counterexample
};

/*
 * Heat-bath single-site Gibbs kernel at a fixed Ising parameter. One step is
 * `sweeps` x sites single-site updates. Holds a reference to the model.
 */
class GibbsKernel {
public:
    GibbsKernel(const MrfModel& model, double theta, ScanOrder scan = ScanOrder::random, int sweeps = 1);

    double theta() const { return theta_; }
    const MrfModel& model() const { return *model_; }
    ScanOrder scan() const { return scan_; }
    int sweeps() const { return sweeps_; }

    /// Advances `config` in place by one kernel step.
    void step(LatticeConfig& config, Rng& rng) const;
    LatticeConfig kernel_step(const LatticeConfig& config, Rng& rng) const;

    /// Heat-bath update of a single site.
    void update_site(LatticeConfig& config, int site, double u) const;
    double prob_up(const LatticeConfig& config, int site) const;

private:
    static constexpr int kMaxTableDegree = 8;

    const MrfModel* model_;
    double theta_;
    ScanOrder scan_;
    int sweeps_;
    // prob_up indexed by neighbour-spin sum + kMaxTableDegree
    std::array<double, 2 * kMaxTableDegree + 1> table_{};
    bool tabulated_ = false;
};

/// K_level: the Gibbs kernel whose invariant distribution is the level's
/// bridge density f_level.
struct AnnealKernel {
    const MrfModel& model;
    ThetaParam theta;
    BridgeSchedule schedule;
    int level;
    ScanOrder scan = ScanOrder::random;
    int sweeps = 1;

    AnnealKernel(const MrfModel& model_, ThetaParam theta_, BridgeSchedule schedule_, int level_,
        ScanOrder scan_ = ScanOrder::random, int sweeps_ = 1);

    double effective_theta() const { return bridge_theta(theta, schedule, level); }
    GibbsKernel gibbs() const { return GibbsKernel(model, effective_theta(), scan, sweeps); }
    LatticeConfig kernel_step(const LatticeConfig& config, Rng& rng) const;
};

/// Dense row-major square matrix over configuration indices.
struct TransitionMatrix {
    std::size_t size = 0;
    std::vector<double> values;

    double operator()(std::size_t from, std::size_t to) const { return values[from * size + to]; }
    double& operator()(std::size_t from, std::size_t to) { return values[from * size + to]; }
};

/// Exact one-step law of `kernel.kernel_step`, by expectation over scan-site
/// choices. Requires sites <= kMaxTransitionSites.
TransitionMatrix transition_matrix(const AnnealKernel& kernel);

/// Exactly normalised f_level over all configurations (by index).
std::vector<double> level_distribution(const AnnealKernel& kernel);

struct DetailedBalanceReport {
    bool reversible = false;
    double max_violation = 0.0;
    std::size_t worst_from = 0;
    std::size_t worst_to = 0;
};

/// Checks f(x) K(x'|x) = f(x') K(x|x') over all state pairs.
DetailedBalanceReport detailed_balance_check(const AnnealKernel& kernel, double tolerance);

} // namespace mavabc
