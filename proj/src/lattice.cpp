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

#include "mavabc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mavabc {

std::string_view to_string(Boundary boundary)
{
    return boundary == Boundary::free ? "free" : "periodic";
}

Boundary parse_boundary(std::string_view text)
{
    if (text == "free") {
        return Boundary::free;
    }
    if (text == "periodic") {
        return Boundary::periodic;
    }
    throw ContractError("unknown boundary '" + std::string(text) + "' (expected free or periodic)");
}

LatticeConfig::LatticeConfig(int rows, int cols, std::vector<std::int8_t> spins)
    : rows_(rows), cols_(cols), spins_(std::move(spins))
{
    if (rows < 1 || cols < 1) {
        throw ContractError("lattice dimensions must be positive");
    }
    if (spins_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ContractError("spin array length does not equal rows x cols");
    }
    for (auto s : spins_) {
        if (s != 1 && s != -1) {
            throw ContractError("spins must be -1 or +1");
        }
    }
}

LatticeConfig LatticeConfig::filled(int rows, int cols, int value)
{
    if (rows < 1 || cols < 1) {
        throw ContractError("lattice dimensions must be positive");
    }
    return LatticeConfig(rows, cols,
        std::vector<std::int8_t>(static_cast<std::size_t>(rows * cols), static_cast<std::int8_t>(value)));
}

LatticeConfig LatticeConfig::from_index(int rows, int cols, std::uint64_t index)
{
    if (rows < 1 || cols < 1 || rows * cols > 63) {
        throw ContractError("lattice too large to index by integer");
    }
    std::vector<std::int8_t> spins(static_cast<std::size_t>(rows * cols));
    for (std::size_t s = 0; s < spins.size(); ++s) {
        spins[s] = ((index >> s) & 1U) ? 1 : -1;
    }
    return LatticeConfig(rows, cols, std::move(spins));
}

LatticeConfig LatticeConfig::parse(int rows, int cols, std::string_view text)
{
    std::vector<std::int8_t> spins;
    spins.reserve(text.size());
    for (char ch : text) {
        if (ch == '+') {
            spins.push_back(1);
        } else if (ch == '-') {
            spins.push_back(-1);
        } else {
            throw ContractError("configuration string may contain only '+' and '-'");
        }
    }
    return LatticeConfig(rows, cols, std::move(spins));
}

void LatticeConfig::set_spin(int site, int value)
{
    spins_[static_cast<std::size_t>(site)] = static_cast<std::int8_t>(value);
}

std::uint64_t LatticeConfig::index() const
{
    std::uint64_t k = 0;
    for (std::size_t s = 0; s < spins_.size(); ++s) {
        if (spins_[s] > 0) {
            k |= std::uint64_t{1} << s;
        }
    }
    return k;
}

LatticeConfig LatticeConfig::flipped() const
{
    LatticeConfig out = *this;
    for (auto& s : out.spins_) {
        s = static_cast<std::int8_t>(-s);
    }
    return out;
}

std::string LatticeConfig::to_string() const
{
    std::string out;
    out.reserve(spins_.size());
    for (auto s : spins_) {
        out.push_back(s > 0 ? '+' : '-');
    }
    return out;
}

int hamming_distance(const LatticeConfig& lhs, const LatticeConfig& rhs)
{
    if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
        throw ContractError("hamming distance between lattices of different shape");
    }
    int d = 0;
    for (int s = 0; s < lhs.sites(); ++s) {
        d += lhs.spin(s) != rhs.spin(s);
    }
    return d;
}

ThetaParam::ThetaParam(double theta_, double theta_ref_) : theta(theta_), theta_ref(theta_ref_)
{
    if (!std::isfinite(theta) || !std::isfinite(theta_ref)) {
        throw ContractError("theta and theta_ref must be finite");
    }
}

MrfModel::MrfModel(int rows, int cols, Boundary boundary)
    : rows_(rows), cols_(cols), boundary_(boundary)
{
    if (rows < 1 || cols < 1) {
        throw ContractError("lattice dimensions must be positive");
    }
    const bool wrap_cols = boundary == Boundary::periodic && cols >= 3;
    const bool wrap_rows = boundary == Boundary::periodic && rows >= 3;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int s = r * cols + c;
            if (c + 1 < cols) {
                edges_.emplace_back(s, s + 1);
            } else if (wrap_cols) {
                edges_.emplace_back(r * cols, s);
            }
            if (r + 1 < rows) {
                edges_.emplace_back(s, s + cols);
            } else if (wrap_rows) {
                edges_.emplace_back(c, s);
            }
        }
    }

    std::vector<std::vector<int>> nb(static_cast<std::size_t>(sites()));
    for (auto [i, j] : edges_) {
        nb[static_cast<std::size_t>(i)].push_back(j);
        nb[static_cast<std::size_t>(j)].push_back(i);
    }
    adjacency_offset_.push_back(0);
    for (auto& list : nb) {
        adjacency_.insert(adjacency_.end(), list.begin(), list.end());
        adjacency_offset_.push_back(static_cast<int>(adjacency_.size()));
        max_degree_ = std::max(max_degree_, static_cast<int>(list.size()));
    }
}

std::span<const int> MrfModel::neighbours(int site) const
{
    const auto begin = static_cast<std::size_t>(adjacency_offset_[static_cast<std::size_t>(site)]);
    const auto end = static_cast<std::size_t>(adjacency_offset_[static_cast<std::size_t>(site) + 1]);
    return std::span<const int>(adjacency_).subspan(begin, end - begin);
}

bool MrfModel::matches(const LatticeConfig& config) const
{
    return config.rows() == rows_ && config.cols() == cols_;
}

void MrfModel::require_match(const LatticeConfig& config) const
{
    if (!matches(config)) {
        throw ContractError("configuration is " + std::to_string(config.rows()) + "x" +
            std::to_string(config.cols()) + " but model is " + std::to_string(rows_) + "x" +
            std::to_string(cols_));
    }
}

void MrfModel::require_enumerable() const
{
    if (sites() > kMaxEnumerationSites) {
        throw OracleCapacityError("lattice has " + std::to_string(sites()) +
            " sites; exact enumeration is limited to " + std::to_string(kMaxEnumerationSites));
    }
}

int edge_sum(const MrfModel& model, const LatticeConfig& config)
{
    model.require_match(config);
    int sum = 0;
    for (auto [i, j] : model.edges()) {
        sum += config.spin(i) * config.spin(j);
    }
    return sum;
}

double log_gamma(const MrfModel& model, const LatticeConfig& config, double theta)
{
    return theta * edge_sum(model, config);
}

double log_sum_exp(std::span<const double> values)
{
    if (values.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0.0;
    for (double v : values) {
        s += std::exp(v - m);
    }
    return m + std::log(s);
}

double exact_log_partition(const MrfModel& model, double theta)
{
    model.require_enumerable();
    const std::uint64_t count = std::uint64_t{1} << model.sites();
    std::vector<double> terms;
    terms.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        terms.push_back(log_gamma(model, LatticeConfig::from_index(model.rows(), model.cols(), k), theta));
    }
    return log_sum_exp(terms);
}

double exact_likelihood(const MrfModel& model, const LatticeConfig& config, double theta)
{
    model.require_match(config);
    return std::exp(log_gamma(model, config, theta) - exact_log_partition(model, theta));
}

} // namespace mavabc
