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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mavabc");
    std::ostringstream out;
    std::ostringstream err;
    const int code = mavabc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) { return std::string(MAVABC_SCRATCH_DIR) + "/" + name; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const std::string& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

} // namespace

TEST_CASE("estimate writes a config header, rows and a summary")
{
    const auto r = run({"estimate", "--replicates=5", "--b=3", "--a=3", "--seed=2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("#% command=estimate\n", 0) == 0);
    CHECK(r.out.find("#% replicates=5\n") != std::string::npos);
    CHECK(r.out.find("#% threads") == std::string::npos);
    CHECK(r.out.find("\nvariant,theta,theta_ref,a,b,replicate,log_value\n") != std::string::npos);
    CHECK(r.out.find("#summary variant,target,replicates,mean,se,exact_target,bias\n") != std::string::npos);
    CHECK(r.out.find("#summary mav,ratio_Zref_over_Z,5,") != std::string::npos);
}

TEST_CASE("output is byte-identical across runs and thread counts")
{
    for (const std::string command : {"estimate", "bench", "infer"}) {
        std::vector<std::string> base{command, "--seed=4"};
        if (command == "estimate") {
            base.insert(base.end(), {"--replicates=64", "--b=20", "--variant=reverse_chain"});
        } else if (command == "bench") {
            base.insert(base.end(), {"--replicates=64", "--variants=sav,mav,abc_indicator", "--burn_ins=1,4"});
        } else {
            base.insert(base.end(), {"--iterations=200", "--b=10", "--a=3"});
        }
        auto with = [&](const std::string& threads) {
            auto args = base;
            args.push_back("--threads=" + threads);
            return run(args);
        };
        const auto first = with("1");
        REQUIRE(first.code == 0);
        CHECK(first.out == with("1").out);
        CHECK(first.out == with("3").out);
    }
}

TEST_CASE("jsonl output and replay")
{
    const std::string path = scratch("cli_estimate.jsonl");
    REQUIRE(run({"estimate", "--replicates=8", "--b=4", "--format=jsonl", "--output=" + path}).code == 0);
    const std::string text = slurp(path);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    const auto config = nlohmann::json::parse(line);
    CHECK(config["config"]["command"] == "estimate");
    CHECK(config["config"]["b"] == "4");
    std::getline(lines, line);
    CHECK(nlohmann::json::parse(line).contains("log_value"));

    const auto replayed = run({"replay", path});
    REQUIRE(replayed.code == 0);
    CHECK(replayed.out == text);

    const std::string csv_path = scratch("cli_oracle.csv");
    REQUIRE(run({"oracle", "--rows=3", "--cols=3", "--theta=0.3", "--output=" + csv_path}).code == 0);
    CHECK(run({"replay", csv_path}).out == slurp(csv_path));
}

TEST_CASE("oracle values")
{
    const auto r = run({"oracle", "--rows=2", "--cols=2", "--theta=0", "--y=up"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\n2,2,free,0,2.772588722239781,++++,0.0625\n") != std::string::npos);
}

TEST_CASE("config files, precedence and invalid input")
{
    const std::string path = scratch("cli_config.txt");
    write(path, "# estimate settings\nreplicates = 3\nb=2\ntheta=0.4\n");
    const auto from_file = run({"estimate", "--config=" + path, "--theta=0.6"});
    REQUIRE(from_file.code == 0);
    CHECK(from_file.out.find("#% replicates=3\n") != std::string::npos);
    CHECK(from_file.out.find("#% theta=0.6\n") != std::string::npos);

    write(path, "replicats=3\n");
    const auto typo = run({"estimate", "--config=" + path});
    CHECK(typo.code == 2);
    CHECK(typo.err.find("replicats") != std::string::npos);

    CHECK(run({"estimate", "--replicatez=3"}).code == 2);
    CHECK(run({"estimate", "--a=1"}).code == 2);
    CHECK(run({"estimate", "--theta=abc"}).code == 2);
    CHECK(run({"estimate", "--variant=sav", "--b=0"}).code == 2);
    CHECK(run({"estimate", "--y=+-"}).code == 2);
    CHECK(run({"estimate", "--schedule=0,0.5,1", "--a=4"}).code == 2);
    CHECK(run({"infer", "--method=abc", "--init_theta=3"}).code == 2);
    CHECK(run({"oracle", "--rows=5", "--cols=5"}).code == 2);
    CHECK(run({"replay", scratch("missing.csv")}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("verify passes on the reversible kernel and fails on the injected one")
{
    const auto good = run({"verify", "--replicates=500"});
    CHECK(good.code == 0);
    CHECK(good.out.find("detailed_balance") != std::string::npos);
    const auto bad = run({"verify", "--replicates=500", "--inject_nonreversible=true"});
    CHECK(bad.code == 1);
}

TEST_CASE("bench writes the default report and a JSON summary")
{
    const std::string summary = scratch("cli_bench_summary.json");
    const auto r = run({"bench", "--summary=" + summary});
    REQUIRE(r.code == 0);
    CHECK(r.out == slurp(std::string(MAVABC_FIXTURE_DIR) + "/bench_default.csv"));
    const auto doc = nlohmann::json::parse(slurp(summary));
    CHECK(doc["config"]["command"] == "bench");
    CHECK(doc["cells"] == 2);
    CHECK(doc["monotonicity"][0]["ci_separated"] == true);
}
