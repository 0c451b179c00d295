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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mavabc {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Moments of exp(log_value) over a batch of draws. Unbiasedness statements
/// hold on this natural scale, not in log space.
struct NaturalScaleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> variance;       ///< absent when count < 2
    std::optional<double> standard_error; ///< sqrt(variance / count)
};

NaturalScaleSummary summarize_exp(std::span<const double> log_values);
NaturalScaleSummary summarize(std::span<const double> values);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. Ties are
/// handled by evaluating both ECDFs after each distinct value.
KsResult ks_two_sample(std::vector<double> lhs, std::vector<double> rhs);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Effective sample size from Geyer's initial monotone sequence estimator.
double effective_sample_size(std::span<const double> chain);

} // namespace mavabc
