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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mavabc {

/// Raised when an argument breaks an operation's precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a brute-force oracle is asked to enumerate a lattice that is
/// too large.
class OracleCapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Largest lattice (in sites) the enumeration oracles accept.
inline constexpr int kMaxEnumerationSites = 20;

enum class Boundary { free, periodic };

std::string_view to_string(Boundary boundary);
Boundary parse_boundary(std::string_view text);

/*
 * A configuration of +/-1 spins on a rows x cols lattice.
 *
 * Sites are indexed row-major: site (r, c) has index r * cols + c. The same
 * convention is used when a configuration is identified with an integer in
 * [0, 2^sites): bit s set means spin s is +1.
 */
class LatticeConfig {
public:
    LatticeConfig(int rows, int cols, std::vector<std::int8_t> spins);

    /// All spins set to `value` (must be -1 or +1).
    static LatticeConfig filled(int rows, int cols, int value);
    static LatticeConfig from_index(int rows, int cols, std::uint64_t index);
    /// Parses a row-major string of '+' and '-' characters.
    static LatticeConfig parse(int rows, int cols, std::string_view text);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int sites() const { return rows_ * cols_; }

    int spin(int site) const { return spins_[static_cast<std::size_t>(site)]; }
    void set_spin(int site, int value);
    std::span<const std::int8_t> spins() const { return spins_; }

    std::uint64_t index() const;
    LatticeConfig flipped() const;
    std::string to_string() const;

    friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;

private:
    int rows_;
    int cols_;
    std::vector<std::int8_t> spins_;
};

int hamming_distance(const LatticeConfig& lhs, const LatticeConfig& rhs);

/// Interaction parameter theta together with the reference value theta_ref
/// that anchors the base density of the annealing ladder.
struct ThetaParam {
    double theta = 0.0;
    double theta_ref = 0.0;

    ThetaParam() = default;
    ThetaParam(double theta_, double theta_ref_);
};

/*
 * Nearest-neighbour Ising model on a rows x cols lattice with no external
 * field: gamma(x | theta) = exp(theta * sum_{(i,j) in edges} x_i x_j).
 *
 * Under the periodic boundary a wrap-around edge is added only along a
 * dimension of length >= 3; shorter dimensions would duplicate an existing
 * edge or create a self loop.
 */
class MrfModel {
public:
    MrfModel(int rows, int cols, Boundary boundary = Boundary::free);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int sites() const { return rows_ * cols_; }
    Boundary boundary() const { return boundary_; }

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::span<const int> neighbours(int site) const;
    int max_degree() const { return max_degree_; }

    bool matches(const LatticeConfig& config) const;
    void require_match(const LatticeConfig& config) const;
    void require_enumerable() const;

private:
    int rows_;
    int cols_;
    Boundary boundary_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> adjacency_;
    std::vector<int> adjacency_offset_;
    int max_degree_ = 0;
};

/// Sum of x_i x_j over the model's edge list.
int edge_sum(const MrfModel& model, const LatticeConfig& config);

/// log gamma(config | theta).
double log_gamma(const MrfModel& model, const LatticeConfig& config, double theta);

/// Brute-force log Z(theta) over all 2^sites configurations.
double exact_log_partition(const MrfModel& model, double theta);

/// f(config | theta) = gamma / Z by enumeration.
double exact_likelihood(const MrfModel& model, const LatticeConfig& config, double theta);

/// log of a sum of exponentials, stable for large magnitudes.
double log_sum_exp(std::span<const double> values);

} // namespace mavabc
