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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mavabc/bench.hpp"
#include "mavabc/estimators.hpp"
#include "mavabc/format.hpp"
#include "mavabc/inference.hpp"
#include "mavabc/kernels.hpp"
#include "mavabc/lattice.hpp"
#include "mavabc/stats.hpp"

namespace mavabc::cli {

namespace {

using json = nlohmann::ordered_json;

/// A config problem attributable to one key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error("invalid value for '" + field + "': " + message)
    {
    }
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct KeySpec {
    std::string name;
    std::string fallback;
    std::string help;
};

// Keys that only steer where and how fast output is produced. They are
// never echoed into output headers.
const std::vector<KeySpec> kRuntimeKeys = {
    {"output", "-", "output path, '-' for standard output"},
    {"threads", "1", "worker threads for replicate loops (0 = all cores); never changes output"},
};

std::vector<KeySpec> model_keys(int rows, int cols)
{
    return {
        {"rows", std::to_string(rows), "lattice rows"},
        {"cols", std::to_string(cols), "lattice columns"},
        {"boundary", "free", "free or periodic"},
        {"seed", "0", "root random seed"},
        {"format", "csv", "csv or jsonl"},
    };
}

const std::vector<KeySpec> kAbcKeys = {
    {"epsilon", "0", "ABC threshold (hamming distance); 'inf' accepts everything"},
    {"distance", "exact_match", "exact_match or hamming"},
};

std::vector<KeySpec> command_keys(const std::string& command)
{
    std::vector<KeySpec> keys;
    auto add = [&keys](const std::vector<KeySpec>& more) { keys.insert(keys.end(), more.begin(), more.end()); };
    if (command == "estimate") {
        add(model_keys(2, 2));
        add({
            {"variant", "mav", "sav, mav, reverse_chain or abc_indicator"},
            {"theta", "0.8", "interaction parameter"},
            {"theta_ref", "0.2", "reference parameter of the base density"},
            {"a", "10", "annealing levels"},
            {"schedule", "linear", "'linear' or a comma list of betas (length a)"},
            {"b", "1000", "burn-in kernel steps"},
            {"replicates", "1000", "independent draws"},
            {"sweeps_per_step", "1", "lattice sweeps per kernel step"},
            {"y", "up", "dataset: up, down, or a row-major string of + and -"},
        });
        add(kAbcKeys);
    } else if (command == "infer") {
        add(model_keys(2, 2));
        add({
            {"method", "pseudo_marginal", "pseudo_marginal, abc or oracle"},
            {"variant", "mav", "estimator for pseudo_marginal: sav, mav or reverse_chain"},
            {"theta_ref", "0", "reference parameter, fixed for the run"},
            {"a", "10", "annealing levels"},
            {"b", "500", "burn-in kernel steps"},
            {"sweeps_per_step", "1", "lattice sweeps per kernel step"},
            {"prior_lo", "0", "uniform prior lower bound"},
            {"prior_hi", "1.5", "uniform prior upper bound"},
            {"proposal_sd", "0.3", "random-walk proposal standard deviation"},
            {"iterations", "10000", "chain length"},
            {"init_theta", "0.75", "initial theta"},
            {"grid_size", "1000", "exact posterior grid points (used when the lattice is enumerable)"},
            {"y", "up", "dataset: up, down, or a row-major string of + and -"},
        });
        add(kAbcKeys);
    } else if (command == "bench") {
        add(model_keys(2, 2));
        add({
            {"variants", "mav", "comma list of estimator variants"},
            {"thetas", "0.8", "comma list"},
            {"theta_refs", "0.2", "comma list"},
            {"levels", "2", "comma list of a values"},
            {"burn_ins", "1,256", "comma list of b values"},
            {"replicates", "1000", "draws per cell"},
            {"sweeps_per_step", "1", "lattice sweeps per kernel step"},
            {"y", "up", "dataset for reverse_chain and abc_indicator cells"},
            {"timing", "false", "append wall time per replicate (not reproducible)"},
        });
        add(kAbcKeys);
    } else if (command == "oracle") {
        add(model_keys(2, 2));
        add({
            {"theta", "0.8", "interaction parameter"},
            {"y", "none", "optional dataset for the exact likelihood: none, up, down, or + / - string"},
        });
    } else if (command == "verify") {
        add(model_keys(1, 2));
        add({
            {"theta", "0.7", "interaction parameter"},
            {"theta_ref", "0.2", "reference parameter"},
            {"a", "5", "annealing levels"},
            {"schedule", "linear", "'linear' or a comma list of betas (length a)"},
            {"b", "0", "burn-in steps for the equivalence check"},
            {"replicates", "10000", "draws per side of the equivalence check"},
            {"sweeps_per_step", "1", "lattice sweeps per kernel step"},
            {"y", "up", "dataset pinned at the end of the reverse chain"},
            {"tolerance", "1e-12", "detailed-balance tolerance"},
            {"ks_alpha", "0.01", "KS significance level"},
            {"inject_nonreversible", "false", "test hook: use a systematic-scan kernel"},
        });
    }
    return keys;
}

bool is_runtime_key(const std::string& key)
{
    return key == "summary" || std::any_of(kRuntimeKeys.begin(), kRuntimeKeys.end(), [&](const KeySpec& k) { return k.name == key; });
}

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

std::pair<std::string, std::string> parse_assignment(const std::string& line, const std::string& where)
{
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(where + ": expected key=value, got '" + line + "'");
    }
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

/// Flat key=value file; '#' starts a comment line.
std::map<std::string, std::string> load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path + "'");
    }
    std::map<std::string, std::string> values;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        auto [key, value] = parse_assignment(t, path + ":" + std::to_string(number));
        values[key] = value;
    }
    return values;
}

class Resolved {
public:
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string& str(const std::string& key) const
    {
        for (const auto& [k, v] : entries) {
            if (k == key) {
                return v;
            }
        }
        throw std::logic_error("unresolved key " + key);
    }

    double real(const std::string& key) const
    {
        const std::string& text = str(key);
        double value = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || std::isnan(value)) {
            throw ConfigError(key, "expected a real number, got '" + text + "'");
        }
        return value;
    }

    double finite(const std::string& key) const
    {
        const double value = real(key);
        if (!std::isfinite(value)) {
            throw ConfigError(key, "must be finite");
        }
        return value;
    }

    long long integer(const std::string& key, long long min) const
    {
        const std::string& text = str(key);
        long long value = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            throw ConfigError(key, "expected an integer, got '" + text + "'");
        }
        if (value < min) {
            throw ConfigError(key, "must be >= " + std::to_string(min));
        }
        return value;
    }

    std::uint64_t unsigned64(const std::string& key) const
    {
        const std::string& text = str(key);
        std::uint64_t value = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            throw ConfigError(key, "expected a non-negative 64-bit integer, got '" + text + "'");
        }
        return value;
    }

    bool boolean(const std::string& key) const
    {
        const std::string& text = str(key);
        if (text == "true" || text == "1") {
            return true;
        }
        if (text == "false" || text == "0") {
            return false;
        }
        throw ConfigError(key, "expected true or false, got '" + text + "'");
    }

    std::vector<double> reals(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : split(str(key), ',')) {
            double value = 0.0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
            if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() ||
                !std::isfinite(value)) {
                throw ConfigError(key, "expected a comma list of finite reals, got '" + str(key) + "'");
            }
            out.push_back(value);
        }
        if (out.empty()) {
            throw ConfigError(key, "list is empty");
        }
        return out;
    }

    std::vector<int> ints(const std::string& key, int min) const
    {
        std::vector<int> out;
        for (const auto& item : split(str(key), ',')) {
            int value = 0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
            if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                throw ConfigError(key, "expected a comma list of integers, got '" + str(key) + "'");
            }
            if (value < min) {
                throw ConfigError(key, "every entry must be >= " + std::to_string(min));
            }
            out.push_back(value);
        }
        if (out.empty()) {
            throw ConfigError(key, "list is empty");
        }
        return out;
    }

    std::vector<std::pair<std::string, std::string>> echoed() const
    {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : entries) {
            if (!is_runtime_key(e.first)) {
                out.push_back(e);
            }
        }
        return out;
    }
};

template <typename Fn>
auto field(const std::string& key, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const ContractError& e) {
        throw ConfigError(key, e.what());
    }
}

MrfModel model_from(const Resolved& cfg)
{
    const int rows = static_cast<int>(cfg.integer("rows", 1));
    const int cols = static_cast<int>(cfg.integer("cols", 1));
    const Boundary boundary = field("boundary", [&] { return parse_boundary(cfg.str("boundary")); });
    return MrfModel(rows, cols, boundary);
}

std::optional<LatticeConfig> dataset_from(const Resolved& cfg, const MrfModel& model)
{
    const std::string& text = cfg.str("y");
    if (text == "none") {
        return std::nullopt;
    }
    if (text == "up") {
        return LatticeConfig::filled(model.rows(), model.cols(), 1);
    }
    if (text == "down") {
        return LatticeConfig::filled(model.rows(), model.cols(), -1);
    }
    return field("y", [&] { return LatticeConfig::parse(model.rows(), model.cols(), text); });
}

LatticeConfig required_dataset(const Resolved& cfg, const MrfModel& model)
{
    auto y = dataset_from(cfg, model);
    if (!y) {
        throw ConfigError("y", "this command needs a dataset");
    }
    return *y;
}

BridgeSchedule schedule_from(const Resolved& cfg, int a)
{
    const std::string& text = cfg.str("schedule");
    if (text == "linear") {
        return BridgeSchedule::linear(a);
    }
    BridgeSchedule schedule = field("schedule", [&] { return BridgeSchedule(cfg.reals("schedule")); });
    if (schedule.levels() != a) {
        throw ConfigError("schedule", "has " + std::to_string(schedule.levels()) + " levels but a = " +
            std::to_string(a));
    }
    return schedule;
}

AbcConfig abc_from(const Resolved& cfg)
{
    AbcConfig abc;
    abc.epsilon = cfg.real("epsilon");
    if (!(abc.epsilon >= 0.0)) {
        throw ConfigError("epsilon", "must be >= 0");
    }
    abc.distance = field("distance", [&] { return parse_distance(cfg.str("distance")); });
    return abc;
}

unsigned threads_from(const Resolved& cfg)
{
    return static_cast<unsigned>(cfg.integer("threads", 0));
}

bool is_jsonl(const Resolved& cfg)
{
    const std::string& f = cfg.str("format");
    if (f == "csv") {
        return false;
    }
    if (f == "jsonl") {
        return true;
    }
    throw ConfigError("format", "expected csv or jsonl, got '" + f + "'");
}

// Rendering ---------------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

struct Document {
    Table main;
    std::optional<Table> summary;
};

std::string csv_cell(const json& value)
{
    if (value.is_null()) {
        return kAbsent;
    }
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : s) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return quoted + "\"";
        }
        return s;
    }
    if (value.is_boolean()) {
        return value.get<bool>() ? "true" : "false";
    }
    if (value.is_number_unsigned()) {
        return std::to_string(value.get<std::uint64_t>());
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<std::int64_t>());
    }
    return format_double(value.get<double>());
}

void write_csv_row(std::ostream& out, const std::string& prefix, const std::vector<json>& row)
{
    out << prefix;
    for (std::size_t i = 0; i < row.size(); ++i) {
        out << (i ? "," : "") << csv_cell(row[i]);
    }
    out << '\n';
}

void write_csv_names(std::ostream& out, const std::string& prefix, const std::vector<std::string>& names)
{
    out << prefix;
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << (i ? "," : "") << names[i];
    }
    out << '\n';
}

json row_object(const Table& table, const std::vector<json>& row)
{
    json obj = json::object();
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        obj[table.columns[i]] = row[i];
    }
    return obj;
}

std::string render(const Resolved& cfg, const Document& doc)
{
    std::ostringstream out;
    if (is_jsonl(cfg)) {
        json header = json::object();
        header["command"] = cfg.command;
        for (const auto& [k, v] : cfg.echoed()) {
            header[k] = v;
        }
        out << json{{"config", header}}.dump() << '\n';
        for (const auto& row : doc.main.rows) {
            out << row_object(doc.main, row).dump() << '\n';
        }
        if (doc.summary) {
            json rows = json::array();
            for (const auto& row : doc.summary->rows) {
                rows.push_back(row_object(*doc.summary, row));
            }
            out << json{{"summary", rows}}.dump() << '\n';
        }
        return out.str();
    }
    out << "#% command=" << cfg.command << '\n';
    for (const auto& [k, v] : cfg.echoed()) {
        out << "#% " << k << '=' << v << '\n';
    }
    write_csv_names(out, "", doc.main.columns);
    for (const auto& row : doc.main.rows) {
        write_csv_row(out, "", row);
    }
    if (doc.summary) {
        write_csv_names(out, "#summary ", doc.summary->columns);
        for (const auto& row : doc.summary->rows) {
            write_csv_row(out, "#summary ", row);
        }
    }
    return out.str();
}

void emit(const Resolved& cfg, const std::string& text, std::ostream& out)
{
    const std::string& path = cfg.str("output");
    if (path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ConfigError("output", "cannot open '" + path + "' for writing");
    }
    file << text;
}

json real_json(double v) { return json(v); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Commands ----------------------------------------------------------------

// infer reports exact posterior columns only for lattices this small
constexpr int kMaxExactGridSites = 12;

int cmd_estimate(const Resolved& cfg, std::ostream& out, std::ostream&)
{
    const MrfModel model = model_from(cfg);
    const ThetaParam theta(cfg.finite("theta"), cfg.finite("theta_ref"));
    EstimatorConfig ec;
    ec.variant = field("variant", [&] { return parse_variant(cfg.str("variant")); });
    ec.a = static_cast<int>(cfg.integer("a", 2));
    ec.b = static_cast<int>(cfg.integer("b", 0));
    ec.replicates = static_cast<std::uint64_t>(cfg.integer("replicates", 1));
    ec.seed = cfg.unsigned64("seed");
    ec.sweeps_per_step = static_cast<int>(cfg.integer("sweeps_per_step", 1));
    const BridgeSchedule schedule = schedule_from(cfg, ec.a);
    const LatticeConfig y = required_dataset(cfg, model);
    const AbcConfig abc = abc_from(cfg);
    is_jsonl(cfg);

    const EstimationProblem problem{model, theta, y, abc, schedule};
    const auto samples = run_estimator(problem, ec, threads_from(cfg));

    Document doc;
    doc.main.columns = {"variant", "theta", "theta_ref", "a", "b", "replicate", "log_value"};
    for (const auto& s : samples) {
        doc.main.rows.push_back({std::string(to_string(s.variant)), real_json(theta.theta), real_json(theta.theta_ref),
            ec.a, ec.b, s.replicate, real_json(s.log_value)});
    }

    Table summary;
    summary.columns = {"variant", "target", "replicates", "mean", "se", "exact_target", "bias"};
    std::vector<SampleVariant> order;
    for (const auto& s : samples) {
        if (std::find(order.begin(), order.end(), s.variant) == order.end()) {
            order.push_back(s.variant);
        }
    }
    const bool enumerable = model.sites() <= kMaxEnumerationSites;
    std::optional<double> log_ratio;
    if (enumerable) {
        log_ratio = exact_log_partition(model, theta.theta_ref) - exact_log_partition(model, theta.theta);
    }
    for (SampleVariant v : order) {
        std::vector<double> logs;
        Target target = Target::ratio_zref_over_z;
        for (const auto& s : samples) {
            if (s.variant == v) {
                logs.push_back(s.log_value);
                target = s.target;
            }
        }
        const NaturalScaleSummary stats = summarize_exp(logs);
        std::optional<double> exact;
        if (enumerable) {
            switch (v) {
            case SampleVariant::abc_indicator: exact = exact_likelihood(model, y, theta.theta); break;
            case SampleVariant::reverse_w: exact = std::exp(log_gamma(model, y, theta.theta) + *log_ratio); break;
            default: exact = std::exp(*log_ratio); break;
            }
        }
        std::optional<double> bias;
        if (exact) {
            bias = stats.mean - *exact;
        }
        summary.rows.push_back({std::string(to_string(v)), std::string(to_string(target)), stats.count,
            real_json(stats.mean), optional_json(stats.standard_error), optional_json(exact), optional_json(bias)});
    }
    doc.summary = std::move(summary);
    emit(cfg, render(cfg, doc), out);
    return kSuccess;
}

int cmd_infer(const Resolved& cfg, std::ostream& out, std::ostream&)
{
    const MrfModel model = model_from(cfg);
    const std::string method = cfg.str("method");
    if (method != "pseudo_marginal" && method != "abc" && method != "oracle") {
        throw ConfigError("method", "expected pseudo_marginal, abc or oracle, got '" + method + "'");
    }
    PosteriorSpec spec{UniformPrior(), required_dataset(cfg, model), EstimatorConfig{}};
    spec.prior = field("prior_lo", [&] { return UniformPrior(cfg.finite("prior_lo"), cfg.finite("prior_hi")); });
    spec.estimator.variant = field("variant", [&] { return parse_variant(cfg.str("variant")); });
    if (method == "pseudo_marginal" && spec.estimator.variant == Variant::abc_indicator) {
        throw ConfigError("variant", "pseudo_marginal needs sav, mav or reverse_chain; use method=abc for ABC");
    }
    spec.estimator.a = static_cast<int>(cfg.integer("a", 2));
    spec.estimator.b = static_cast<int>(cfg.integer("b", 1));
    spec.estimator.sweeps_per_step = static_cast<int>(cfg.integer("sweeps_per_step", 1));
    spec.estimator.seed = cfg.unsigned64("seed");
    spec.theta_ref = cfg.finite("theta_ref");
    spec.proposal_sd = cfg.finite("proposal_sd");
    if (spec.proposal_sd < 0.0) {
        throw ConfigError("proposal_sd", "must be >= 0");
    }
    spec.iterations = static_cast<int>(cfg.integer("iterations", 0));
    spec.init_theta = cfg.finite("init_theta");
    if (!spec.prior.contains(spec.init_theta)) {
        throw ConfigError("init_theta", "lies outside [prior_lo, prior_hi]");
    }
    const int grid_size = static_cast<int>(cfg.integer("grid_size", 100));
    const AbcConfig abc = abc_from(cfg);

    Rng rng = Rng::stream(spec.estimator.seed, 0);
    ChainResult chain;
    if (method == "pseudo_marginal") {
        chain = pseudo_marginal_mh(model, spec, rng);
    } else if (method == "abc") {
        chain = abc_mcmc(model, spec, abc, rng);
    } else {
        chain = pseudo_marginal_mh(spec.prior, spec.init_theta, spec.proposal_sd, spec.iterations,
            oracle_likelihood(model, spec.data), rng);
    }

    Document doc;
    doc.main.columns = {"iteration", "theta", "log_estimate", "accepted"};
    for (const auto& row : chain.rows) {
        doc.main.rows.push_back({row.iteration, real_json(row.theta), real_json(row.log_estimate), row.accepted});
    }

    Table summary;
    summary.columns = {"statistic", "chain", "exact"};
    std::optional<GridPosterior> grid;
    if (model.sites() <= kMaxExactGridSites) {
        grid = exact_posterior_grid(model, spec.data, spec.prior, grid_size);
    }
    const std::vector<double> thetas = chain.thetas();
    if (!thetas.empty()) {
        const NaturalScaleSummary moments = summarize(thetas);
        summary.rows.push_back(
            {"mean", real_json(moments.mean), grid ? json(grid->mean()) : json(nullptr)});
        for (int d = 1; d <= 9; ++d) {
            const double p = d / 10.0;
            summary.rows.push_back({"q" + format_double(p), real_json(quantile(thetas, p)),
                grid ? json(grid->quantile(p)) : json(nullptr)});
        }
        const double ess = effective_sample_size(thetas);
        summary.rows.push_back({"ess", real_json(ess), nullptr});
        summary.rows.push_back({"acceptance_rate", real_json(chain.acceptance_rate()), nullptr});
        summary.rows.push_back({"estimator_calls", chain.estimator_calls, nullptr});
        summary.rows.push_back({"kernel_sweeps", chain.kernel_sweeps, nullptr});
        summary.rows.push_back(
            {"ess_per_call", real_json(ess / static_cast<double>(std::max<std::uint64_t>(chain.estimator_calls, 1))),
                nullptr});
    }
    doc.summary = std::move(summary);
    emit(cfg, render(cfg, doc), out);
    return kSuccess;
}

std::vector<Variant> variants_from(const Resolved& cfg)
{
    std::vector<Variant> out;
    for (const auto& item : split(cfg.str("variants"), ',')) {
        out.push_back(field("variants", [&] { return parse_variant(item); }));
    }
    if (out.empty()) {
        throw ConfigError("variants", "list is empty");
    }
    return out;
}

int cmd_bench(const Resolved& cfg, std::ostream& out, std::ostream&)
{
    ExperimentPlan plan;
    const MrfModel model = model_from(cfg);
    plan.rows = model.rows();
    plan.cols = model.cols();
    plan.boundary = model.boundary();
    plan.variants = variants_from(cfg);
    plan.thetas = cfg.reals("thetas");
    plan.theta_refs = cfg.reals("theta_refs");
    plan.levels = cfg.ints("levels", 2);
    plan.burn_ins = cfg.ints("burn_ins", 0);
    plan.replicates = static_cast<std::uint64_t>(cfg.integer("replicates", 1));
    plan.seed = cfg.unsigned64("seed");
    plan.sweeps_per_step = static_cast<int>(cfg.integer("sweeps_per_step", 1));
    plan.y = required_dataset(cfg, model).to_string();
    plan.abc = abc_from(cfg);
    plan.threads = threads_from(cfg);
    const bool timing = cfg.boolean("timing");
    is_jsonl(cfg);

    std::vector<CellReport> reports = run_plan(plan);
    sort_reports(reports);

    Document doc;
    doc.main.columns = {"variant", "theta", "theta_ref", "a", "b", "seed", "replicates", "target", "mean", "se",
        "variance", "exact_target", "bias", "error"};
    if (timing) {
        doc.main.columns.push_back("wall_seconds_per_replicate");
    }
    for (const auto& r : reports) {
        std::vector<json> row = {std::string(to_string(r.variant)), real_json(r.theta), real_json(r.theta_ref), r.a,
            r.b, r.seed, r.replicates, std::string(to_string(r.target)), real_json(r.mean),
            optional_json(r.standard_error), optional_json(r.variance), optional_json(r.exact_target),
            optional_json(r.bias), r.error ? json(*r.error) : json(nullptr)};
        if (timing) {
            row.push_back(real_json(r.wall_seconds_per_replicate));
        }
        doc.main.rows.push_back(std::move(row));
    }
    emit(cfg, render(cfg, doc), out);

    const std::string& summary_path = cfg.str("summary");
    if (!summary_path.empty()) {
        json header = json::object();
        header["command"] = cfg.command;
        for (const auto& [k, v] : cfg.echoed()) {
            header[k] = v;
        }
        json document = json::object();
        document["config"] = header;
        const json summary = summarize(reports);
        for (const auto& [k, v] : summary.items()) {
            document[k] = v;
        }
        std::ofstream file(summary_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw ConfigError("summary", "cannot open '" + summary_path + "' for writing");
        }
        file << document.dump(2) << '\n';
    }
    return kSuccess;
}

int cmd_oracle(const Resolved& cfg, std::ostream& out, std::ostream&)
{
    const MrfModel model = model_from(cfg);
    const double theta = cfg.finite("theta");
    const auto y = dataset_from(cfg, model);
    is_jsonl(cfg);
    if (model.sites() > kMaxEnumerationSites) {
        throw ConfigError("rows", "lattice has " + std::to_string(model.sites()) +
            " sites; the oracle enumerates at most " + std::to_string(kMaxEnumerationSites));
    }

    Document doc;
    doc.main.columns = {"rows", "cols", "boundary", "theta", "log_partition", "y", "likelihood"};
    doc.main.rows.push_back({model.rows(), model.cols(), std::string(to_string(model.boundary())), real_json(theta),
        real_json(exact_log_partition(model, theta)), y ? json(y->to_string()) : json(nullptr),
        y ? json(exact_likelihood(model, *y, theta)) : json(nullptr)});
    emit(cfg, render(cfg, doc), out);
    return kSuccess;
}

int cmd_verify(const Resolved& cfg, std::ostream& out, std::ostream& err)
{
    const MrfModel model = model_from(cfg);
    if (model.sites() > kMaxTransitionSites) {
        throw ConfigError("rows", "verify builds exact transition matrices; lattice must have at most " +
            std::to_string(kMaxTransitionSites) + " sites");
    }
    const ThetaParam theta(cfg.finite("theta"), cfg.finite("theta_ref"));
    const int a = static_cast<int>(cfg.integer("a", 2));
    const BridgeSchedule schedule = schedule_from(cfg, a);
    const int b = static_cast<int>(cfg.integer("b", 0));
    const auto replicates = static_cast<std::size_t>(cfg.integer("replicates", 1));
    const int sweeps = static_cast<int>(cfg.integer("sweeps_per_step", 1));
    const LatticeConfig y = required_dataset(cfg, model);
    const double tolerance = cfg.real("tolerance");
    const double ks_alpha = cfg.real("ks_alpha");
    const bool inject = cfg.boolean("inject_nonreversible");
    const std::uint64_t seed = cfg.unsigned64("seed");
    is_jsonl(cfg);

    Document doc;
    doc.main.columns = {"check", "level", "passed", "magnitude", "detail"};
    bool all_passed = true;
    std::vector<std::string> failures;
    for (int level = 1; level <= a; ++level) {
        const AnnealKernel kernel(model, theta, schedule, level, inject ? ScanOrder::systematic : ScanOrder::random,
            sweeps);
        const DetailedBalanceReport report = detailed_balance_check(kernel, tolerance);
        const std::string detail = "pair " + LatticeConfig::from_index(model.rows(), model.cols(),
            report.worst_from).to_string() + "/" + LatticeConfig::from_index(model.rows(), model.cols(),
            report.worst_to).to_string();
        doc.main.rows.push_back({"detailed_balance", level, report.reversible, real_json(report.max_violation), detail});
        if (!report.reversible) {
            all_passed = false;
            failures.push_back("detailed balance violated at level " + std::to_string(level) + ", " + detail +
                ", magnitude " + format_double(report.max_violation));
        }
    }

    const EquivalenceReport eq =
        mav_reverse_equivalence_check(model, y, theta, schedule, b, seed, replicates, ks_alpha, ChainOptions{sweeps});
    doc.main.rows.push_back({"equivalence_bitwise", nullptr, eq.bitwise_equal,
        static_cast<std::uint64_t>(eq.mismatches), "mismatching replicates"});
    doc.main.rows.push_back({"equivalence_ks", nullptr, eq.distribution_match, real_json(eq.ks_statistic),
        "p=" + format_double(eq.ks_p_value)});
    if (!eq.bitwise_equal) {
        all_passed = false;
        failures.push_back("MAV and reverse-chain v differ on " + std::to_string(eq.mismatches) + " replicates");
    }
    if (!eq.distribution_match) {
        all_passed = false;
        failures.push_back("KS check rejected equal distributions, p=" + format_double(eq.ks_p_value));
    }
    emit(cfg, render(cfg, doc), out);
    for (const auto& f : failures) {
        err << "mavabc verify: FAIL " << f << '\n';
    }
    return all_passed ? kSuccess : kCheckFailed;
}

using CommandFn = int (*)(const Resolved&, std::ostream&, std::ostream&);

CommandFn command_fn(const std::string& name)
{
    if (name == "estimate") return cmd_estimate;
    if (name == "infer") return cmd_infer;
    if (name == "bench") return cmd_bench;
    if (name == "oracle") return cmd_oracle;
    if (name == "verify") return cmd_verify;
    return nullptr;
}

std::vector<KeySpec> all_keys(const std::string& command)
{
    std::vector<KeySpec> keys = command_keys(command);
    keys.insert(keys.end(), kRuntimeKeys.begin(), kRuntimeKeys.end());
    if (command == "bench") {
        keys.push_back({"summary", "", "path for the JSON summary document (optional)"});
    }
    return keys;
}

// Reads the resolved configuration embedded in an earlier output file.
std::pair<std::string, std::vector<std::pair<std::string, std::string>>> read_header(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("replay", "cannot open '" + path + "'");
    }
    std::string line;
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries;
    if (in.peek() == '{') {
        std::getline(in, line);
        const json first = json::parse(line, nullptr, false);
        if (first.is_discarded() || !first.contains("config")) {
            throw ConfigError("replay", "'" + path + "' does not start with a config record");
        }
        for (const auto& [k, v] : first["config"].items()) {
            if (k == "command") {
                command = v.get<std::string>();
            } else {
                entries.emplace_back(k, v.get<std::string>());
            }
        }
    } else {
        while (std::getline(in, line) && line.rfind("#% ", 0) == 0) {
            auto [k, v] = parse_assignment(line.substr(3), path);
            if (k == "command") {
                command = v;
            } else {
                entries.emplace_back(k, v);
            }
        }
    }
    if (command.empty()) {
        throw ConfigError("replay", "'" + path + "' carries no config header");
    }
    return {command, entries};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Auxiliary-variable normalising-constant estimators for Ising models", "mavabc"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"estimate", "infer", "bench", "oracle", "verify"};
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> descriptions = {
        {"estimate", "draw replicate estimates of Z(theta_ref)/Z(theta) or a likelihood"},
        {"infer", "posterior sampling over theta"},
        {"bench", "bias and variance of estimators over a parameter grid"},
        {"oracle", "exact log partition function and likelihood by enumeration"},
        {"verify", "detailed balance and MAV/reverse-chain equivalence checks"},
    };
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        subs[name] = sub;
        sub->add_option("--config", config_paths[name], "flat key=value config file; flags override it");
        for (const auto& key : all_keys(name)) {
            sub->add_option("--" + key.name, flag_values[name][key.name],
                key.help + " (default: " + (key.fallback.empty() ? "none" : key.fallback) + ")");
        }
    }
    std::string replay_path;
    std::string replay_output = "-";
    std::string replay_threads = "1";
    CLI::App* replay = app.add_subcommand("replay", "re-run the configuration recorded in an output file's header");
    replay->add_option("file", replay_path, "earlier output file")->required();
    replay->add_option("--output", replay_output, "output path, '-' for standard output");
    replay->add_option("--threads", replay_threads, "worker threads");

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInvalidConfig;
    }

    try {
        if (replay->parsed()) {
            auto [command, entries] = read_header(replay_path);
            if (!command_fn(command)) {
                throw ConfigError("replay", "unknown command '" + command + "' in header");
            }
            std::vector<std::string> replay_args = {args.empty() ? "mavabc" : args[0], command};
            for (const auto& [k, v] : entries) {
                replay_args.push_back("--" + k + "=" + v);
            }
            replay_args.push_back("--output=" + replay_output);
            replay_args.push_back("--threads=" + replay_threads);
            return run(replay_args, out, err);
        }

        std::string command;
        for (const auto& name : commands) {
            if (subs[name]->parsed()) {
                command = name;
            }
        }
        const auto keys = all_keys(command);
        std::map<std::string, std::string> file_values;
        if (!config_paths[command].empty()) {
            file_values = load_config_file(config_paths[command]);
            for (const auto& [k, v] : file_values) {
                const bool known = std::any_of(keys.begin(), keys.end(), [&](const KeySpec& s) { return s.name == k; });
                if (!known) {
                    throw ConfigError(k, "unknown config key for '" + command + "'");
                }
            }
        }
        Resolved cfg;
        cfg.command = command;
        for (const auto& key : keys) {
            std::string value = key.fallback;
            if (auto it = file_values.find(key.name); it != file_values.end()) {
                value = it->second;
            }
            if (subs[command]->get_option("--" + key.name)->count() > 0) {
                value = flag_values[command][key.name];
            }
            cfg.entries.emplace_back(key.name, value);
        }
        return command_fn(command)(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "mavabc: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const ContractError& e) {
        err << "mavabc: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const std::exception& e) {
        err << "mavabc: " << e.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace mavabc::cli
