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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "mavabc/bench.hpp"
#include "oracle.hpp"

using namespace mavabc;

namespace {

std::string csv(const std::vector<CellReport>& reports)
{
    std::ostringstream out;
    write_reports_csv(out, reports, false);
    return out.str();
}

std::string fixture_body(const std::string& name)
{
    std::ifstream in(std::string(MAVABC_FIXTURE_DIR) + "/" + name);
    REQUIRE(in);
    std::string line;
    std::string body;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') {
            body += line + "\n";
        }
    }
    return body;
}

} // namespace

TEST_CASE("plan validation")
{
    ExperimentPlan plan;
    plan.levels = {1};
    CHECK_THROWS_AS(plan.validate(), ContractError);
    plan.levels = {2};
    plan.burn_ins = {-1};
    CHECK_THROWS_AS(plan.validate(), ContractError);
    plan.burn_ins = {0};
    plan.thetas = {};
    CHECK_THROWS_AS(plan.validate(), ContractError);
    plan.thetas = {NAN};
    CHECK_THROWS_AS(plan.validate(), ContractError);
    plan.thetas = {0.5};
    plan.replicates = 0;
    CHECK_THROWS_AS(plan.validate(), ContractError);
}

TEST_CASE("cell seeds depend on every coordinate")
{
    std::set<std::uint64_t> seeds;
    for (Variant v : {Variant::sav, Variant::mav}) {
        for (double t : {0.2, 0.8}) {
            for (double r : {0.0, 0.2}) {
                for (int a : {2, 3}) {
                    for (int b : {1, 2}) {
                        seeds.insert(cell_seed(5, v, t, r, a, b));
                    }
                }
            }
        }
    }
    CHECK(seeds.size() == 32);
    CHECK(cell_seed(5, Variant::mav, 0.8, 0.2, 2, 1) == cell_seed(5, Variant::mav, 0.8, 0.2, 2, 1));
    CHECK(cell_seed(5, Variant::mav, 0.8, 0.2, 2, 1) != cell_seed(6, Variant::mav, 0.8, 0.2, 2, 1));
}

TEST_CASE("reduce_cell on hand-made samples")
{
    std::vector<EstimateSample> samples;
    for (double v : {0.0, std::log(3.0)}) {
        EstimateSample w;
        w.variant = SampleVariant::reverse_w;
        w.log_value = 100.0;
        samples.push_back(w);
        EstimateSample s;
        s.variant = SampleVariant::reverse_v;
        s.log_value = v;
        samples.push_back(s);
    }
    const auto r = reduce_cell(Variant::reverse_chain, ThetaParam(0.5, 0.1), 3, 4, 9, samples, 1.5);
    CHECK(r.replicates == 2);
    CHECK(r.mean == doctest::Approx(2.0));
    CHECK(*r.variance == doctest::Approx(2.0));
    CHECK(*r.standard_error == doctest::Approx(1.0));
    CHECK(*r.bias == doctest::Approx(0.5));

    const auto single = reduce_cell(Variant::mav, ThetaParam(0.5, 0.1), 3, 4, 9, {samples[1]}, std::nullopt);
    CHECK_FALSE(single.standard_error);
    CHECK_FALSE(single.bias);
    CHECK(csv({single}).find(",NA,NA,NA,NA,NA") != std::string::npos);
}

TEST_CASE("exact cell targets")
{
    const MrfModel m(2, 2);
    const auto y = LatticeConfig::filled(2, 2, 1);
    CHECK(*exact_cell_target(m, Variant::mav, ThetaParam(0.8, 0.2), y) ==
        doctest::Approx(oracle::ratio(2, 2, 0.8, 0.2)).epsilon(1e-12));
    CHECK(*exact_cell_target(m, Variant::abc_indicator, ThetaParam(0.5, 0.0), y) ==
        doctest::Approx(std::exp(2.0 - oracle::log_partition(2, 2, false, 0.5))).epsilon(1e-12));
    CHECK_FALSE(exact_cell_target(MrfModel(5, 5), Variant::mav, ThetaParam(0.8, 0.2), LatticeConfig::filled(5, 5, 1)));
}

TEST_CASE("run_plan is reproducible and thread independent")
{
    ExperimentPlan plan;
    plan.variants = {Variant::sav, Variant::mav, Variant::reverse_chain, Variant::abc_indicator};
    plan.thetas = {0.3, 0.8};
    plan.levels = {2, 4};
    plan.burn_ins = {1, 5};
    plan.replicates = 200;
    plan.seed = 3;
    const auto one = run_plan(plan);
    plan.threads = 4;
    const auto four = run_plan(plan);
    CHECK(one.size() == 32);
    CHECK(csv(one) == csv(four));
    for (const auto& r : one) {
        CHECK_FALSE(r.error);
        CHECK(r.replicates == 200);
        CHECK(r.exact_target);
    }
}

TEST_CASE("the default plan matches the recorded report")
{
    ExperimentPlan plan;
    plan.burn_ins = {1, 256};
    auto reports = run_plan(plan);
    sort_reports(reports);
    CHECK(csv(reports) == fixture_body("bench_default.csv"));
    // the short burn-in is visibly biased, the long one is not
    CHECK(std::abs(*reports[0].bias) > 10 * *reports[0].standard_error);
    CHECK(std::abs(*reports[1].bias) < 3 * *reports[1].standard_error);
}

TEST_CASE("oversized lattices report the oracle error per cell")
{
    ExperimentPlan plan;
    plan.rows = 5;
    plan.cols = 5;
    plan.burn_ins = {1};
    plan.replicates = 10;
    const auto reports = run_plan(plan);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].error);
    CHECK_FALSE(reports[0].exact_target);
    CHECK_FALSE(reports[0].bias);
    CHECK(reports[0].replicates == 10);
}

TEST_CASE("summary tables and monotonicity comparisons")
{
    ExperimentPlan plan;
    plan.levels = {2, 8};
    plan.burn_ins = {1, 256};
    plan.replicates = 4000;
    const auto doc = summarize(run_plan(plan));
    CHECK(doc["cells"] == 4);
    CHECK(doc["tables"]["mav"].size() == 4);
    const auto& mono = doc["monotonicity"];
    REQUIRE(mono.size() == 4);
    CHECK(mono[0]["axis"] == "b");
    CHECK(mono[0]["a"] == 2);
    CHECK(mono[0]["from"] == 1);
    CHECK(mono[0]["to"] == 256);
    CHECK(mono[0]["decreasing"] == true);
    CHECK(mono[0]["ci_separated"] == true);
    CHECK(mono[2]["axis"] == "a");
    CHECK(mono[2]["b"] == 1);
    CHECK(mono[2]["decreasing"] == true);
    CHECK_THROWS_AS(summarize({}), ContractError);
}
