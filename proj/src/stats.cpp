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

#include "mavabc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mavabc {

NaturalScaleSummary summarize(std::span<const double> values)
{
    NaturalScaleSummary out;
    out.count = values.size();
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.variance = ss / static_cast<double>(values.size() - 1);
        out.standard_error = std::sqrt(*out.variance / static_cast<double>(values.size()));
    }
    return out;
}

NaturalScaleSummary summarize_exp(std::span<const double> log_values)
{
    std::vector<double> natural(log_values.size());
    std::transform(log_values.begin(), log_values.end(), natural.begin(), [](double v) { return std::exp(v); });
    return summarize(natural);
}

double kolmogorov_survival(double lambda)
{
    if (lambda < 1e-3) {
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> lhs, std::vector<double> rhs)
{
    if (lhs.empty() || rhs.empty()) {
        throw std::invalid_argument("KS test needs two nonempty samples");
    }
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    const double n1 = static_cast<double>(lhs.size());
    const double n2 = static_cast<double>(rhs.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < lhs.size() && j < rhs.size()) {
        const double x = std::min(lhs[i], rhs[j]);
        while (i < lhs.size() && lhs[i] == x) {
            ++i;
        }
        while (j < rhs.size() && rhs[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    const double ne = n1 * n2 / (n1 + n2);
    const double root = std::sqrt(ne);
    return KsResult{d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d)};
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double effective_sample_size(std::span<const double> chain)
{
    const std::size_t n = chain.size();
    if (n < 4) {
        return static_cast<double>(n);
    }
    double mean = 0.0;
    for (double v : chain) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) {
            s += (chain[t] - mean) * (chain[t + lag] - mean);
        }
        return s / static_cast<double>(n);
    };
    const double gamma0 = autocov(0);
    if (gamma0 <= 0.0) {
        // constant chain: no autocorrelation structure to estimate
        return static_cast<double>(n);
    }
    double sigma2 = -gamma0;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        double pair = autocov(2 * m) + autocov(2 * m + 1);
        if (pair <= 0.0) {
            break;
        }
        pair = std::min(pair, previous);
        previous = pair;
        sigma2 += 2.0 * pair;
    }
    return static_cast<double>(n) * gamma0 / sigma2;
}

} // namespace mavabc
