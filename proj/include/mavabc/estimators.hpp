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
#include <optional>
#include <string_view>
#include <vector>

#include "mavabc/kernels.hpp"
#include "mavabc/lattice.hpp"
#include "mavabc/rng.hpp"

namespace mavabc {

/// Which estimator a run uses.
enum class Variant { sav, mav, reverse_chain, abc_indicator };

/// Tag on a realised draw. The reverse chain yields two draws, w and v.
enum class SampleVariant { sav, mav, reverse_w, reverse_v, abc_indicator };

/// Quantity whose expectation a draw targets.
enum class Target { inv_z, ratio_zref_over_z, pi_n_at_y, abc_likelihood };

std::string_view to_string(Variant variant);
std::string_view to_string(SampleVariant variant);
std::string_view to_string(Target target);
Variant parse_variant(std::string_view text);

enum class Direction { forward, reverse };

/*
 * The auxiliary chain x_1 .. x_n behind one draw, stored in index order
 * (states[0] is x_1). levels[i] is the kernel level of the transition
 * between states[i] and states[i + 1]. Forward traces from MAV start at the
 * (burnt-in) x_a; reverse traces end at the conditioning dataset y.
 */
struct ChainTrace {
    std::vector<LatticeConfig> states;
    std::vector<int> levels;
    Direction direction = Direction::forward;
};

struct EstimateSample {
    double log_value = 0.0;
    SampleVariant variant = SampleVariant::mav;
    Target target = Target::ratio_zref_over_z;
    std::uint64_t replicate = 0;
    std::optional<ChainTrace> trace;
};

struct ReverseChainSample {
    EstimateSample w;
    EstimateSample v;
};

struct AbcConfig {
    enum class Distance { exact_match, hamming };

    double epsilon = 0.0;
    Distance distance = Distance::exact_match;
};

std::string_view to_string(AbcConfig::Distance distance);
AbcConfig::Distance parse_distance(std::string_view text);

/// Shared knobs for chain simulation.
struct ChainOptions {
    int sweeps_per_step = 1;
    bool record_trace = false;
};

/// Uniform random spins.
LatticeConfig uniform_config(const MrfModel& model, Rng& rng);

/// `steps` target-kernel steps (level a, parameter theta) from `start`.
LatticeConfig burn_in(const MrfModel& model, double theta, LatticeConfig start, int steps, Rng& rng,
    const ChainOptions& options = {});

/*
 * SAV: x from `b` target-kernel steps after a uniform start, then
 * log q(x) - log gamma(x|theta) with q = gamma(.|theta_ref).
 *
 * When `base_log_normaliser` is given it is subtracted so q is normalised
 * and the draw targets 1/Z(theta) instead of Z(theta_ref)/Z(theta).
 */
EstimateSample sav_estimate(const MrfModel& model, const ThetaParam& theta, int b, Rng& rng,
    std::optional<double> base_log_normaliser = std::nullopt, const ChainOptions& options = {});

/// MAV / annealed IS: burn-in to x_a from a uniform start, then descend
/// through K_{a-1} .. K_2, accumulating log gamma_{i-1}(x_i) - log gamma_i(x_i).
/// b = 0 leaves x_a at the uniform start.
EstimateSample mav_estimate(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    int b, Rng& rng, const ChainOptions& options = {});

/// Second stage of MAV, from a given x_a.
EstimateSample mav_from_state(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    LatticeConfig x_a, Rng& rng, const ChainOptions& options = {});

/// MAV with a burn-in that starts at `start` instead of a uniform draw.
EstimateSample mav_estimate_from(const MrfModel& model, const ThetaParam& theta, const BridgeSchedule& schedule,
    int b, const LatticeConfig& start, Rng& rng, const ChainOptions& options = {});

/*
 * Reverse-chain importance sampler. Pins x_n = y with n = a + b and simulates
 * x_{n-1}, ..., x_1 with K_i(x_i | x_{i+1}); levels above a reuse the target
 * kernel. v = sum_{i=2}^{a} [log gamma_{i-1}(x_i) - log gamma_i(x_i)], and
 * w = log gamma(y|theta) + v. Factors for i > a are identically 1 and are
 * not evaluated.
 */
ReverseChainSample abc_reverse_chain_estimate(const MrfModel& model, const LatticeConfig& y,
    const ThetaParam& theta, const BridgeSchedule& schedule, int b, Rng& rng, const ChainOptions& options = {});

/// Indicator 1(distance(y, x) <= epsilon) for x after `b` target-kernel
/// steps from a uniform start. log_value is 0 or -inf.
EstimateSample abc_indicator_estimate(const MrfModel& model, const LatticeConfig& y, double theta,
    const AbcConfig& abc, int b, Rng& rng, const ChainOptions& options = {});

bool abc_accepts(const LatticeConfig& y, const LatticeConfig& x, const AbcConfig& abc);

struct EquivalenceReport {
    /// v from the two-stage MAV procedure (burn-in started at y) equals v
    /// from the reverse chain bitwise on every shared-stream replicate.
    bool bitwise_equal = false;
    std::size_t mismatches = 0;
    /// Two-sample KS comparison of independent MAV and reverse-chain v draws.
    double ks_statistic = 0.0;
    double ks_p_value = 0.0;
    bool distribution_match = false;

    bool passed() const { return bitwise_equal && distribution_match; }
};

/*
 * Runs the MAV two-stage procedure and the reverse-chain estimator on the
 * same problem. Stream discipline: replicate r of the shared-stream check
 * uses Rng::stream(seed, r) for both sides; both consume it identically
 * (b target steps from y, then K_{a-1}, ..., K_2), the reverse chain then
 * drawing x_1 last. The distributional check draws both from independent
 * streams, MAV on (seed, 1, r) and the reverse chain on (seed, 2, r), with
 * the MAV burn-in again started at y.
 */
EquivalenceReport mav_reverse_equivalence_check(const MrfModel& model, const LatticeConfig& y,
    const ThetaParam& theta, const BridgeSchedule& schedule, int b, std::uint64_t seed,
    std::size_t replicates = 10000, double ks_alpha = 0.01, const ChainOptions& options = {});

/// Kernel sweeps one estimate of `variant` consumes.
std::uint64_t sweeps_per_estimate(Variant variant, int a, int b, int sweeps_per_step = 1);

/// One estimation run: `replicates` independent draws.
struct EstimatorConfig {
    int a = 10;
    int b = 1000;
    std::uint64_t replicates = 1;
    std::uint64_t seed = 0;
    Variant variant = Variant::mav;
    int sweeps_per_step = 1;

    int n() const { return a + b; }
    void validate() const;
};

struct EstimationProblem {
    const MrfModel& model;
    ThetaParam theta;
    std::optional<LatticeConfig> y;
    AbcConfig abc;
    std::optional<BridgeSchedule> schedule; ///< defaults to BridgeSchedule::linear(a)
};

/*
 * Draws every replicate; replicate r uses Rng::stream(config.seed, r), so the
 * result is independent of `threads`. Reverse-chain runs return w then v for
 * each replicate.
 */
std::vector<EstimateSample> run_estimator(const EstimationProblem& problem, const EstimatorConfig& config,
    unsigned threads = 1);

} // namespace mavabc
