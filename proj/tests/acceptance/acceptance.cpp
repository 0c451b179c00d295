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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mavabc/bench.hpp"
#include "mavabc/estimators.hpp"
#include "mavabc/inference.hpp"
#include "mavabc/kernels.hpp"
#include "mavabc/lattice.hpp"
#include "mavabc/stats.hpp"

using namespace mavabc;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args)
{
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), pattern, args...);
    return buffer;
}

std::vector<double> logs_of(const std::vector<EstimateSample>& samples)
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.variant != SampleVariant::reverse_w) {
            out.push_back(s.log_value);
        }
    }
    return out;
}

NaturalScaleSummary run_cell(const MrfModel& m, ThetaParam theta, Variant variant, int a, int b,
    std::uint64_t replicates, std::uint64_t seed, std::optional<LatticeConfig> y = std::nullopt)
{
    EstimatorConfig config;
    config.a = a;
    config.b = b;
    config.replicates = replicates;
    config.seed = seed;
    config.variant = variant;
    const EstimationProblem problem{m, theta, std::move(y), {}, std::nullopt};
    return summarize_exp(logs_of(run_estimator(problem, config, 0)));
}

Verdict oracle_consistency()
{
    bool ok = true;
    double worst = 0.0;
    for (auto [r, c] : {std::pair{1, 2}, {2, 2}, {3, 3}}) {
        const MrfModel m(r, c);
        const std::uint64_t count = std::uint64_t{1} << m.sites();
        for (double theta : {0.0, 0.3, 0.8}) {
            double total = 0.0;
            for (std::uint64_t k = 0; k < count; ++k) {
                total += exact_likelihood(m, LatticeConfig::from_index(r, c, k), theta);
            }
            worst = std::max(worst, std::abs(total - 1.0));
            ok = ok && std::abs(total - 1.0) <= 1e-12;
        }
        // log Z(0) must be sites * log 2 to the last bit
        const double log_z0 = exact_log_partition(m, 0.0);
        ok = ok && std::bit_cast<std::uint64_t>(log_z0) ==
                std::bit_cast<std::uint64_t>(static_cast<double>(m.sites()) * std::log(2.0));
        ok = ok && std::bit_cast<std::uint64_t>(log_z0) == std::bit_cast<std::uint64_t>(std::log(static_cast<double>(count)));
    }
    return {ok, fmt("max |sum - 1| = %.3g; log Z(0) = sites * log 2 bitwise on 1x2, 2x2, 3x3: %s", worst,
                    ok ? "yes" : "no")};
}

Verdict reversibility()
{
    bool ok = true;
    double worst = 0.0;
    for (auto [r, c] : {std::pair{1, 2}, {2, 2}}) {
        const MrfModel m(r, c);
        for (int level = 1; level <= 5; ++level) {
            const auto report =
                detailed_balance_check(AnnealKernel(m, ThetaParam(0.8, 0.2), BridgeSchedule::linear(5), level), 1e-12);
            ok = ok && report.reversible;
            worst = std::max(worst, report.max_violation);
        }
    }
    const MrfModel m(2, 2);
    const auto bad = detailed_balance_check(
        AnnealKernel(m, ThetaParam(0.8, 0.2), BridgeSchedule::linear(5), 5, ScanOrder::systematic), 1e-12);
    ok = ok && !bad.reversible;
    return {ok, fmt("max violation %.3g over 10 kernels; systematic-scan counterexample violation %.3g (%s)", worst,
                    bad.max_violation, bad.reversible ? "not detected" : "detected")};
}

Verdict mav_unbiasedness()
{
    int within = 0;
    int cells = 0;
    std::string worst;
    double worst_z = 0.0;
    for (auto [r, c] : {std::pair{1, 2}, {2, 2}}) {
        const MrfModel m(r, c);
        for (double theta : {0.2, 0.5, 0.8}) {
            for (double theta_ref : {0.0, 0.2}) {
                const ThetaParam param(theta, theta_ref);
                const auto s = run_cell(m, param, Variant::mav, 10, 1000, 100000,
                    cell_seed(3, Variant::mav, theta, theta_ref, r * 10 + c, 1000));
                const double exact = std::exp(exact_log_partition(m, theta_ref) - exact_log_partition(m, theta));
                const double gap = std::abs(s.mean - exact);
                // theta == theta_ref gives the constant estimate 1, so SE = 0
                const double z = gap == 0.0 ? 0.0 : gap / *s.standard_error;
                ++cells;
                within += gap <= 3.0 * *s.standard_error;
                if (z >= worst_z) {
                    worst_z = z;
                    worst = fmt("%dx%d theta=%.1f theta_ref=%.1f", r, c, theta, theta_ref);
                }
            }
        }
    }
    return {within >= 11, fmt("%d of %d cells within 3 SE; largest |z| = %.2f at %s", within, cells, worst_z,
                              worst.c_str())};
}

Verdict per_sample_equivalence()
{
    const MrfModel m(2, 2);
    const ThetaParam theta(0.8, 0.2);
    const auto y = LatticeConfig::filled(2, 2, 1);
    const auto schedule = BridgeSchedule::linear(10);
    const double lg = log_gamma(m, y, theta.theta);
    int identity_failures = 0;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        Rng rng = Rng::stream(41, r);
        const auto sample = abc_reverse_chain_estimate(m, y, theta, schedule, 20, rng);
        const double diff = sample.w.log_value - sample.v.log_value;
        identity_failures += std::bit_cast<std::uint64_t>(diff) != std::bit_cast<std::uint64_t>(lg);
    }
    int sav_failures = 0;
    const auto two = BridgeSchedule::linear(2);
    for (std::uint64_t r = 0; r < 10000; ++r) {
        Rng r1 = Rng::stream(42, r);
        Rng r2 = Rng::stream(42, r);
        const double mav = mav_estimate(m, theta, two, 20, r1).log_value;
        const double sav = sav_estimate(m, theta, 20, r2).log_value;
        sav_failures += std::bit_cast<std::uint64_t>(mav) != std::bit_cast<std::uint64_t>(sav);
    }
    const auto eq = mav_reverse_equivalence_check(m, y, theta, schedule, 20, 43, 10000);
    const bool ok = identity_failures == 0 && sav_failures == 0 && eq.bitwise_equal;
    return {ok, fmt("w - v != log gamma(y) in %d of 10000; a=2 MAV != SAV in %d of 10000; "
                    "two-stage MAV vs reverse chain mismatches %zu (KS p = %.3f)",
                    identity_failures, sav_failures, eq.mismatches, eq.ks_p_value)};
}

Verdict bias_decay()
{
    const MrfModel m(2, 2);
    const ThetaParam theta(0.8, 0.2);
    const double exact = std::exp(exact_log_partition(m, 0.2) - exact_log_partition(m, 0.8));
    auto interval = [&](int a, int b, std::uint64_t seed) {
        const auto s = run_cell(m, theta, Variant::mav, a, b, 100000, seed);
        const double centre = std::abs(s.mean - exact);
        const double half = kZ99 * *s.standard_error;
        return std::pair{std::max(0.0, centre - half), centre + half};
    };
    const auto b1 = interval(2, 1, cell_seed(5, Variant::mav, 0.8, 0.2, 2, 1));
    const auto b256 = interval(2, 256, cell_seed(5, Variant::mav, 0.8, 0.2, 2, 256));
    const auto a4 = interval(4, 0, cell_seed(5, Variant::mav, 0.8, 0.2, 4, 0));
    const auto a64 = interval(64, 0, cell_seed(5, Variant::mav, 0.8, 0.2, 64, 0));
    const bool along_b = b256.second < b1.first;
    const bool along_a = a64.second < a4.first;
    return {along_b && along_a,
        fmt("|bias| 99%% CI: b=1 [%.4f, %.4f] vs b=256 [%.4f, %.4f]; b=0: a=4 [%.4f, %.4f] vs a=64 [%.4f, %.4f]",
            b1.first, b1.second, b256.first, b256.second, a4.first, a4.second, a64.first, a64.second)};
}

Verdict abc_exactness()
{
    const MrfModel m(2, 2);
    bool ok = true;
    std::string detail;
    std::uint64_t seed = 60;
    for (const char* text : {"++++", "++--", "+--+"}) {
        const auto y = LatticeConfig::parse(2, 2, text);
        const auto s = run_cell(m, ThetaParam(0.5, 0.0), Variant::abc_indicator, 2, 500, 1000000, ++seed, y);
        const double exact = exact_likelihood(m, y, 0.5);
        const double z = std::abs(s.mean - exact) / *s.standard_error;
        ok = ok && z <= 3.0;
        detail += fmt("%sy=%s rate %.5f exact %.5f |z| %.2f", detail.empty() ? "" : "; ", text, s.mean, exact, z);
    }
    return {ok, detail};
}

struct PosteriorProblem {
    MrfModel model{2, 2};
    PosteriorSpec spec;
    GridPosterior grid;

    PosteriorProblem() : spec{UniformPrior(0.0, 1.5), LatticeConfig::filled(2, 2, 1), {}}
    {
        spec.estimator.variant = Variant::mav;
        spec.estimator.a = 10;
        spec.estimator.b = 500;
        spec.theta_ref = 0.0;
        spec.proposal_sd = 0.3;
        spec.iterations = 50000;
        spec.init_theta = 0.75;
        grid = exact_posterior_grid(model, spec.data, spec.prior, 1000);
    }

    // largest distance between chain and grid over the mean and deciles
    double gap(const ChainResult& chain) const
    {
        const auto thetas = chain.thetas();
        double worst = std::abs(summarize(thetas).mean - grid.mean());
        for (int d = 1; d <= 9; ++d) {
            worst = std::max(worst, std::abs(quantile(thetas, d / 10.0) - grid.quantile(d / 10.0)));
        }
        return worst;
    }
};

const PosteriorProblem& posterior_problem()
{
    static const PosteriorProblem problem;
    return problem;
}

const ChainResult& mav_chain()
{
    static const ChainResult chain = [] {
        Rng rng = Rng::stream(70, 0);
        return pseudo_marginal_mh(posterior_problem().model, posterior_problem().spec, rng);
    }();
    return chain;
}

Verdict posterior_recovery()
{
    const auto& p = posterior_problem();
    const double pm_gap = p.gap(mav_chain());
    Rng rng = Rng::stream(71, 0);
    const auto ideal = pseudo_marginal_mh(p.spec.prior, p.spec.init_theta, p.spec.proposal_sd, 100000,
        oracle_likelihood(p.model, p.spec.data), rng);
    const double ideal_gap = p.gap(ideal);
    return {pm_gap <= 0.02 && ideal_gap <= 0.01,
        fmt("MAV pseudo-marginal max gap %.4f (limit 0.02); oracle MH max gap %.4f (limit 0.01); grid mean %.4f",
            pm_gap, ideal_gap, p.grid.mean())};
}

Verdict efficiency_direction()
{
    const auto& p = posterior_problem();
    const auto& pm = mav_chain();
    Rng rng = Rng::stream(72, 0);
    const auto abc = abc_mcmc(p.model, p.spec, AbcConfig{}, rng);
    const double pm_ess = effective_sample_size(pm.thetas());
    const double abc_ess = effective_sample_size(abc.thetas());
    const double pm_rate = pm_ess / static_cast<double>(pm.kernel_sweeps);
    const double abc_rate = abc_ess / static_cast<double>(abc.kernel_sweeps);
    const double pm_call = pm_ess / static_cast<double>(pm.estimator_calls);
    const double abc_call = abc_ess / static_cast<double>(abc.estimator_calls);
    return {abc_rate < pm_rate && abc_call < pm_call,
        fmt("ESS per sweep: ABC %.3g vs MAV %.3g; ESS per estimator call: ABC %.3g vs MAV %.3g "
            "(ESS %.0f vs %.0f)",
            abc_rate, pm_rate, abc_call, pm_call, abc_ess, pm_ess)};
}

Verdict determinism()
{
    const std::vector<std::vector<std::string>> commands = {
        {"estimate", "--seed=9", "--replicates=200", "--b=50", "--variant=reverse_chain"},
        {"estimate", "--seed=9", "--replicates=200", "--b=50", "--format=jsonl"},
        {"infer", "--seed=9", "--iterations=500", "--b=50"},
        {"infer", "--seed=9", "--iterations=500", "--b=50", "--method=abc"},
        {"infer", "--seed=9", "--iterations=500", "--method=oracle"},
        {"bench", "--seed=9", "--replicates=200", "--variants=sav,mav,reverse_chain,abc_indicator", "--levels=2,4"},
        {"oracle", "--rows=3", "--cols=3", "--theta=0.3", "--y=up"},
        {"verify", "--seed=9", "--replicates=1000"},
    };
    int differing = 0;
    std::string which;
    for (const auto& command : commands) {
        std::vector<std::string> outputs;
        for (const char* threads : {"1", "1", "4"}) {
            std::vector<std::string> args{"mavabc"};
            args.insert(args.end(), command.begin(), command.end());
            args.push_back(std::string("--threads=") + threads);
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli::run(args, out, err);
            outputs.push_back(std::to_string(code) + "\n" + out.str());
        }
        if (outputs[0] != outputs[1] || outputs[0] != outputs[2]) {
            ++differing;
            which += " " + command[0];
        }
    }
    return {differing == 0, fmt("%zu invocations x (2 runs + 4 threads), %d differ%s", commands.size(), differing,
                                which.c_str())};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"oracle self-consistency", oracle_consistency},
        {"kernel reversibility", reversibility},
        {"MAV unbiasedness", mav_unbiasedness},
        {"per-sample equivalence", per_sample_equivalence},
        {"bias decay", bias_decay},
        {"ABC exactness at epsilon = 0", abc_exactness},
        {"pseudo-marginal posterior recovery", posterior_recovery},
        {"ABC efficiency below MAV pseudo-marginal", efficiency_direction},
        {"CLI determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict verdict;
        try {
            verdict = criteria[i].second();
        } catch (const std::exception& e) {
            verdict = {false, std::string("threw: ") + e.what()};
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        failures += !verdict.passed;
        std::printf("criterion %zu %s: %s (%.1f s) %s\n", i + 1, verdict.passed ? "PASS" : "FAIL", criteria[i].first,
            elapsed.count(), verdict.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
