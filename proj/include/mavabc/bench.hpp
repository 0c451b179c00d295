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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mavabc/estimators.hpp"
#include "mavabc/lattice.hpp"

namespace mavabc {

/*
 * A grid of estimator runs. Every combination of variant, theta, theta_ref,
 * a and b is one cell. Cells are seeded independently from the root seed and
 * their coordinates, so reports do not depend on execution order.
 */
struct ExperimentPlan {
    int rows = 2;
    int cols = 2;
    Boundary boundary = Boundary::free;
    std::vector<double> thetas{0.8};
    std::vector<double> theta_refs{0.2};
    std::vector<int> levels{2};    ///< a grid
    std::vector<int> burn_ins{1};  ///< b grid
    std::uint64_t replicates = 1000;
    std::uint64_t seed = 0;
    std::vector<Variant> variants{Variant::mav};
    /// Dataset for the reverse_chain and abc_indicator variants; all spins
    /// up when absent.
    std::optional<std::string> y;
    AbcConfig abc;
    int sweeps_per_step = 1;
    unsigned threads = 1;

    void validate() const;
};

struct CellReport {
    Variant variant = Variant::mav;
    double theta = 0.0;
    double theta_ref = 0.0;
    int a = 2;
    int b = 0;
    std::uint64_t seed = 0;
    std::uint64_t replicates = 0;
    Target target = Target::ratio_zref_over_z;
    double mean = 0.0;                   ///< mean of exp(log_value)
    std::optional<double> standard_error;
    std::optional<double> variance;
    std::optional<double> exact_target;  ///< from the enumeration oracle
    std::optional<double> bias;          ///< mean - exact_target
    double wall_seconds_per_replicate = 0.0;
    std::optional<std::string> error;    ///< oracle-capacity or other per-cell failure
};

/// Seed for one cell: derive_seed(root, variant, theta bits, theta_ref bits, a, b).
std::uint64_t cell_seed(std::uint64_t root, Variant variant, double theta, double theta_ref, int a, int b);

/// Exact expectation target for a cell, or nullopt when the lattice is too
/// large to enumerate.
std::optional<double> exact_cell_target(const MrfModel& model, Variant variant, const ThetaParam& theta,
    const LatticeConfig& y);

/// Builds the report for one cell from its raw draws.
CellReport reduce_cell(Variant variant, const ThetaParam& theta, int a, int b, std::uint64_t seed,
    const std::vector<EstimateSample>& samples, std::optional<double> exact_target);

std::vector<CellReport> run_plan(const ExperimentPlan& plan);

/// Stable order: variant, theta, theta_ref, a, b.
void sort_reports(std::vector<CellReport>& reports);

/// Grouped tables by variant plus pairwise monotonicity comparisons of |bias|
/// along b (fixed variant, theta, theta_ref, a) and along a (fixed variant,
/// theta, theta_ref, b).
nlohmann::ordered_json summarize(std::vector<CellReport> reports);

/// CSV header plus one row per cell. Timing is omitted unless requested so
/// that reports are reproducible byte for byte.
void write_reports_csv(std::ostream& out, const std::vector<CellReport>& reports, bool include_timing);

} // namespace mavabc
