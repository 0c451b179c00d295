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

// Test-only brute-force oracles. They recompute everything from lattice
// geometry directly and share no code with the library's model or kernels.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline int spin_of(std::uint64_t index, int site) { return ((index >> site) & 1U) ? 1 : -1; }

/// Sum of nearest-neighbour spin products, scanning right and down
/// neighbours; `periodic` wraps dimensions of length >= 3.
inline int edge_sum(int rows, int cols, bool periodic, std::uint64_t index)
{
    int sum = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int here = spin_of(index, r * cols + c);
            if (c + 1 < cols) {
                sum += here * spin_of(index, r * cols + c + 1);
            } else if (periodic && cols >= 3) {
                sum += here * spin_of(index, r * cols);
            }
            if (r + 1 < rows) {
                sum += here * spin_of(index, (r + 1) * cols + c);
            } else if (periodic && rows >= 3) {
                sum += here * spin_of(index, c);
            }
        }
    }
    return sum;
}

/// log Z(theta) accumulated in long double without max-shifting.
inline double log_partition(int rows, int cols, bool periodic, double theta)
{
    long double z = 0.0L;
    const std::uint64_t count = std::uint64_t{1} << (rows * cols);
    for (std::uint64_t k = 0; k < count; ++k) {
        z += std::exp(static_cast<long double>(theta) * edge_sum(rows, cols, periodic, k));
    }
    return static_cast<double>(std::log(z));
}

/// Exact f(config | theta) for every configuration index.
inline std::vector<double> distribution(int rows, int cols, bool periodic, double theta)
{
    const double lz = log_partition(rows, cols, periodic, theta);
    const std::uint64_t count = std::uint64_t{1} << (rows * cols);
    std::vector<double> f(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        f[k] = std::exp(theta * edge_sum(rows, cols, periodic, k) - lz);
    }
    return f;
}

/// Z(theta_ref) / Z(theta), the ratio target of the auxiliary estimators.
inline double ratio(int rows, int cols, double theta, double theta_ref)
{
    return std::exp(log_partition(rows, cols, false, theta_ref) - log_partition(rows, cols, false, theta));
}

} // namespace oracle
