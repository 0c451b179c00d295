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

#include "mavabc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "mavabc/format.hpp"
#include "mavabc/stats.hpp"

namespace mavabc {

void ExperimentPlan::validate() const
{
    if (thetas.empty() || theta_refs.empty() || levels.empty() || burn_ins.empty() || variants.empty()) {
        throw ContractError("experiment plan grids must be nonempty");
    }
    if (replicates < 1) {
        throw ContractError("replicates must be >= 1");
    }
    for (int a : levels) {
        if (a < 2) {
            throw ContractError("every a in the plan must be >= 2");
        }
    }
    for (int b : burn_ins) {
        if (b < 0) {
            throw ContractError("every b in the plan must be >= 0");
        }
    }
    for (double t : thetas) {
        if (!std::isfinite(t)) {
            throw ContractError("plan thetas must be finite");
        }
    }
    for (double t : theta_refs) {
        if (!std::isfinite(t)) {
            throw ContractError("plan theta_refs must be finite");
        }
    }
}

std::uint64_t cell_seed(std::uint64_t root, Variant variant, double theta, double theta_ref, int a, int b)
{
    return derive_seed(root, {static_cast<std::uint64_t>(variant), double_bits(theta), double_bits(theta_ref),
                                 static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)});
}

std::optional<double> exact_cell_target(const MrfModel& model, Variant variant, const ThetaParam& theta,
    const LatticeConfig& y)
{
    if (model.sites() > kMaxEnumerationSites) {
        return std::nullopt;
    }
    if (variant == Variant::abc_indicator) {
        return exact_likelihood(model, y, theta.theta);
    }
    return std::exp(exact_log_partition(model, theta.theta_ref) - exact_log_partition(model, theta.theta));
}

CellReport reduce_cell(Variant variant, const ThetaParam& theta, int a, int b, std::uint64_t seed,
    const std::vector<EstimateSample>& samples, std::optional<double> exact_target)
{
    CellReport report;
    report.variant = variant;
    report.theta = theta.theta;
    report.theta_ref = theta.theta_ref;
    report.a = a;
    report.b = b;
    report.seed = seed;

    std::vector<double> logs;
    logs.reserve(samples.size());
    for (const auto& s : samples) {
        // the reverse chain reports v, the ratio estimate
        if (s.variant == SampleVariant::reverse_w) {
            continue;
        }
        logs.push_back(s.log_value);
        report.target = s.target;
    }
    if (variant == Variant::abc_indicator) {
        report.target = Target::abc_likelihood;
    }
    const NaturalScaleSummary summary = summarize_exp(logs);
    report.replicates = summary.count;
    report.mean = summary.mean;
    report.variance = summary.variance;
    report.standard_error = summary.standard_error;
    report.exact_target = exact_target;
    if (exact_target) {
        report.bias = summary.mean - *exact_target;
    }
    return report;
}

std::vector<CellReport> run_plan(const ExperimentPlan& plan)
{
    plan.validate();
    const MrfModel model(plan.rows, plan.cols, plan.boundary);
    const LatticeConfig y = plan.y ? LatticeConfig::parse(plan.rows, plan.cols, *plan.y)
                                   : LatticeConfig::filled(plan.rows, plan.cols, 1);

    std::vector<CellReport> reports;
    for (Variant variant : plan.variants) {
        for (double theta : plan.thetas) {
            for (double theta_ref : plan.theta_refs) {
                for (int a : plan.levels) {
                    for (int b : plan.burn_ins) {
                        const ThetaParam param(theta, theta_ref);
                        const std::uint64_t seed = cell_seed(plan.seed, variant, theta, theta_ref, a, b);
                        try {
                            EstimatorConfig config;
                            config.a = a;
                            config.b = b;
                            config.replicates = plan.replicates;
                            config.seed = seed;
                            config.variant = variant;
                            config.sweeps_per_step = plan.sweeps_per_step;
                            const EstimationProblem problem{model, param, y, plan.abc, std::nullopt};

                            const auto start = std::chrono::steady_clock::now();
                            const auto samples = run_estimator(problem, config, plan.threads);
                            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

                            std::optional<double> exact;
                            std::optional<std::string> error;
                            try {
                                model.require_enumerable();
                                exact = exact_cell_target(model, variant, param, y);
                            } catch (const OracleCapacityError& e) {
                                error = e.what();
                            }
                            CellReport report = reduce_cell(variant, param, a, b, seed, samples, exact);
                            report.error = error;
                            report.wall_seconds_per_replicate =
                                elapsed.count() / static_cast<double>(plan.replicates);
                            reports.push_back(std::move(report));
                        } catch (const std::exception& e) {
                            CellReport report;
                            report.variant = variant;
                            report.theta = theta;
                            report.theta_ref = theta_ref;
                            report.a = a;
                            report.b = b;
                            report.seed = seed;
                            report.error = e.what();
                            reports.push_back(std::move(report));
                        }
                    }
                }
            }
        }
    }
    return reports;
}

namespace {

auto cell_key(const CellReport& r)
{
    return std::make_tuple(static_cast<int>(r.variant), r.theta, r.theta_ref, r.a, r.b);
}

nlohmann::ordered_json optional_json(const std::optional<double>& value)
{
    return value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
}

// 99% interval for |bias|, clipped at zero.
std::optional<std::pair<double, double>> abs_bias_interval(const CellReport& r)
{
    if (!r.bias || !r.standard_error) {
        return std::nullopt;
    }
    const double centre = std::abs(*r.bias);
    const double half = kZ99 * *r.standard_error;
    return std::make_pair(std::max(0.0, centre - half), centre + half);
}

nlohmann::ordered_json compare(const CellReport& from, const CellReport& to, const char* axis)
{
    nlohmann::ordered_json row;
    row["variant"] = std::string(to_string(from.variant));
    row["axis"] = axis;
    row["theta"] = from.theta;
    row["theta_ref"] = from.theta_ref;
    if (std::string(axis) == "b") {
        row["a"] = from.a;
        row["from"] = from.b;
        row["to"] = to.b;
    } else {
        row["b"] = from.b;
        row["from"] = from.a;
        row["to"] = to.a;
    }
    const auto fi = abs_bias_interval(from);
    const auto ti = abs_bias_interval(to);
    if (from.bias && to.bias) {
        row["abs_bias_from"] = std::abs(*from.bias);
        row["abs_bias_to"] = std::abs(*to.bias);
        row["decreasing"] = std::abs(*to.bias) <= std::abs(*from.bias);
    } else {
        row["abs_bias_from"] = nullptr;
        row["abs_bias_to"] = nullptr;
        row["decreasing"] = nullptr;
    }
    if (fi && ti) {
        row["ci_separated"] = ti->second < fi->first || fi->second < ti->first;
    } else {
        row["ci_separated"] = nullptr;
    }
    return row;
}

} // namespace

void sort_reports(std::vector<CellReport>& reports)
{
    std::stable_sort(reports.begin(), reports.end(),
        [](const CellReport& l, const CellReport& r) { return cell_key(l) < cell_key(r); });
}

nlohmann::ordered_json summarize(std::vector<CellReport> reports)
{
    if (reports.empty()) {
        throw ContractError("summarize needs at least one report");
    }
    sort_reports(reports);

    nlohmann::ordered_json doc;
    doc["cells"] = reports.size();
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const auto& r : reports) {
        nlohmann::ordered_json row;
        row["theta"] = r.theta;
        row["theta_ref"] = r.theta_ref;
        row["a"] = r.a;
        row["b"] = r.b;
        row["seed"] = r.seed;
        row["replicates"] = r.replicates;
        row["target"] = std::string(to_string(r.target));
        row["mean"] = r.mean;
        row["se"] = optional_json(r.standard_error);
        row["variance"] = optional_json(r.variance);
        row["exact_target"] = optional_json(r.exact_target);
        row["bias"] = optional_json(r.bias);
        row["error"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json(nullptr);
        tables[std::string(to_string(r.variant))].push_back(std::move(row));
    }
    doc["tables"] = std::move(tables);

    nlohmann::ordered_json comparisons = nlohmann::ordered_json::array();
    // slices along b: reports are already sorted with b innermost
    for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
        const auto& l = reports[i];
        const auto& r = reports[i + 1];
        if (l.variant == r.variant && l.theta == r.theta && l.theta_ref == r.theta_ref && l.a == r.a) {
            comparisons.push_back(compare(l, r, "b"));
        }
    }
    // slices along a
    std::vector<CellReport> by_a = reports;
    std::stable_sort(by_a.begin(), by_a.end(), [](const CellReport& l, const CellReport& r) {
        return std::make_tuple(static_cast<int>(l.variant), l.theta, l.theta_ref, l.b, l.a) <
            std::make_tuple(static_cast<int>(r.variant), r.theta, r.theta_ref, r.b, r.a);
    });
    for (std::size_t i = 0; i + 1 < by_a.size(); ++i) {
        const auto& l = by_a[i];
        const auto& r = by_a[i + 1];
        if (l.variant == r.variant && l.theta == r.theta && l.theta_ref == r.theta_ref && l.b == r.b) {
            comparisons.push_back(compare(l, r, "a"));
        }
    }
    doc["monotonicity"] = std::move(comparisons);
    return doc;
}

void write_reports_csv(std::ostream& out, const std::vector<CellReport>& reports, bool include_timing)
{
    out << "variant,theta,theta_ref,a,b,seed,replicates,target,mean,se,variance,exact_target,bias,error";
    if (include_timing) {
        out << ",wall_seconds_per_replicate";
    }
    out << '\n';
    for (const auto& r : reports) {
        out << to_string(r.variant) << ',' << format_double(r.theta) << ',' << format_double(r.theta_ref) << ','
            << r.a << ',' << r.b << ',' << r.seed << ',' << r.replicates << ',' << to_string(r.target) << ','
            << format_double(r.mean) << ',' << format_optional(r.standard_error) << ','
            << format_optional(r.variance) << ',' << format_optional(r.exact_target) << ','
            << format_optional(r.bias) << ',' << (r.error ? "\"" + *r.error + "\"" : std::string(kAbsent));
        if (include_timing) {
            out << ',' << format_double(r.wall_seconds_per_replicate);
        }
        out << '\n';
    }
}

} // namespace mavabc
