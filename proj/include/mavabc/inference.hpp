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

#include <cstdint>
#include <functional>
#include <vector>

#include "mavabc/estimators.hpp"
#include "mavabc/lattice.hpp"
#include "mavabc/rng.hpp"

namespace mavabc {

struct UniformPrior {
    double lo = 0.0;
    double hi = 1.0;

    UniformPrior() = default;
    UniformPrior(double lo_, double hi_);

    bool contains(double theta) const { return theta >= lo && theta <= hi; }
    double mean() const { return 0.5 * (lo + hi); }
};

struct PosteriorSpec {
    UniformPrior prior;
    LatticeConfig data;
    EstimatorConfig estimator;
    /// Reference parameter of the base density. Held fixed for the whole
    /// run so the unknown Z(theta_ref) cancels in every acceptance ratio.
    double theta_ref = 0.0;
    double proposal_sd = 0.1;
    int iterations = 1000;
    double init_theta = 0.5;

    void validate() const;
};

struct ChainRow {
    int iteration = 0;
    double theta = 0.0;
    double log_estimate = 0.0;
    bool accepted = false;
};

struct ChainResult {
    std::vector<ChainRow> rows;
    std::uint64_t estimator_calls = 0;
    std::uint64_t kernel_sweeps = 0;

    std::vector<double> thetas() const;
    double acceptance_rate() const;
};

/// log of a nonnegative unbiased likelihood estimate at theta, up to a
/// theta-independent constant. -inf is a valid (zero) estimate.
using LogLikelihoodEstimator = std::function<double(double theta, Rng& rng)>;

/*
 * Pseudo-marginal random-walk Metropolis-Hastings under a uniform prior.
 * A fresh estimate is drawn for every in-support proposal; the estimate of
 * the current state is retained until a proposal is accepted. Proposals
 * outside the prior are rejected without calling the estimator.
 * proposal_sd = 0 leaves the chain at init_theta.
 */
ChainResult pseudo_marginal_mh(const UniformPrior& prior, double init_theta, double proposal_sd, int iterations,
    const LogLikelihoodEstimator& estimator, Rng& rng, std::uint64_t sweeps_per_call = 0);

/// Likelihood estimator built from spec.estimator (sav, mav or reverse_chain):
/// log gamma(y|theta) + log v-hat.
LogLikelihoodEstimator auxiliary_likelihood(const MrfModel& model, const PosteriorSpec& spec);

/// Zero-variance estimator: the exact log-likelihood by enumeration.
LogLikelihoodEstimator oracle_likelihood(const MrfModel& model, const LatticeConfig& y);

ChainResult pseudo_marginal_mh(const MrfModel& model, const PosteriorSpec& spec, Rng& rng);

/// ABC-MCMC: a proposal in prior support is accepted iff a fresh ABC
/// indicator at the proposal is 1. Uses spec.estimator.b as the burn-in.
ChainResult abc_mcmc(const MrfModel& model, const PosteriorSpec& spec, const AbcConfig& abc, Rng& rng);

/// Posterior on a uniform grid of cell midpoints, each cell carrying mass
/// proportional to prior x exact likelihood at its midpoint.
struct GridPosterior {
    std::vector<double> thetas;
    std::vector<double> weights;
    double cell_width = 0.0;

    double mean() const;
    /// Quantile of the piecewise-uniform density over the cells.
    double quantile(double p) const;
};

GridPosterior exact_posterior_grid(const MrfModel& model, const LatticeConfig& y, const UniformPrior& prior,
    int grid_size);

} // namespace mavabc
