// Command line front end: simulate, risk, train, backtest, report.
// Config precedence is flags > --config JSON > defaults; every run writes a
// manifest.json that reproduces it. Exit codes: 1 config, 2 data, 3 numerical.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailhedge/backtest.hpp"
#include "tailhedge/bootstrap.hpp"
#include "tailhedge/errors.hpp"
#include "tailhedge/marketdata.hpp"
#include "tailhedge/policy_io.hpp"
#include "tailhedge/risk.hpp"
#include "tailhedge/svg.hpp"
#include "tailhedge/threads.hpp"
#include "tailhedge/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tailhedge;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw DataError("failed writing " + path.string());
}

std::vector<double> read_value_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc{} || ptr != line.data() + line.size())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" +
                            line + "'");
        values.push_back(v);
    }
    if (values.empty()) throw DataError(path.string() + ": no values");
    return values;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto next = text.find_first_of("x,", pos);
        const std::string tok =
            text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0)
            throw std::invalid_argument(std::string(what) + ": bad entry '" + tok + "'");
        out.push_back(v);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

// Manifest files wrap the config under {subcommand, config}; a bare object is
// taken as the config itself.
json load_config_json(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json j;
    try {
        j = json::parse(std::string((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>()));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    if (j.contains("config")) {
        if (j.contains("subcommand")) {
            const auto sub = j.at("subcommand").get<std::string>();
            if (sub != subcommand)
                throw std::invalid_argument("config: manifest was written by subcommand '" + sub +
                                            "', invoked '" + subcommand + "'");
        }
        j = j.at("config");
        if (!j.is_object()) throw std::invalid_argument("config: 'config' must be an object");
    }
    return j;
}

void check_known_keys(const json& j, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

template <class T>
void apply_key(const json& j, const char* key, T& value) {
    if (!j.contains(key)) return;
    try {
        value = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: bad value for '" + std::string(key) +
                                    "': " + e.what());
    }
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const json& config) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
    finish(out, dir / "manifest.json");
}

fs::path prepare_out_dir(const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

struct CommonOpts {
    std::string config;
    std::string out_dir = "out";
    unsigned threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& common) {
    sub->add_option("--config", common.config, "JSON config or manifest to layer under the flags");
    sub->add_option("--out-dir", common.out_dir, "output directory (default: out)");
    sub->add_option("--threads", common.threads, "cap worker threads; 0 = hardware");
}

void apply_common(const json& j, CommonOpts& common) {
    apply_key(j, "out_dir", common.out_dir);
    apply_key(j, "threads", common.threads);
}

json common_manifest(const CommonOpts& common) {
    json j;
    j["out_dir"] = common.out_dir;
    j["threads"] = common.threads;
    return j;
}

Date parse_date_flag(const std::string& text, const char* flag) {
    try {
        return Date::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string(flag) + ": " + e.what());
    }
}

// ---- simulate ----

struct SimulateOpts {
    CommonOpts common;
    std::string data;
    std::string model;  // empty = use --data
    SyntheticSpec spec;
    std::string start_date = "2000-01-03";
    std::size_t scenarios = 1000;
    std::size_t tau = 1;
    std::string method = "moving_block";
    std::size_t block_len = 0;
    std::uint64_t seed = 0;
    std::string anchors;  // comma list; empty = one panel at the series end
};

void add_simulate(CLI::App& app, SimulateOpts& o) {
    auto* sub = app.add_subcommand("simulate",
                                   "bootstrap scenario panels from data or a synthetic path");
    add_common(sub, o.common);
    sub->add_option("--data", o.data, "price CSV (date,close) to resample");
    sub->add_option("--model", o.model, "synthetic source instead of --data: gbm or heston");
    sub->add_option("--mu", o.spec.mu, "drift per year");
    sub->add_option("--sigma", o.spec.sigma, "gbm volatility per year");
    sub->add_option("--kappa", o.spec.kappa, "heston mean reversion");
    sub->add_option("--theta", o.spec.theta, "heston long-run variance");
    sub->add_option("--nu", o.spec.nu, "heston vol of variance");
    sub->add_option("--rho", o.spec.rho, "heston correlation");
    sub->add_option("--v0", o.spec.v0, "heston initial variance");
    sub->add_option("--s0", o.spec.s0, "initial price");
    sub->add_option("--steps", o.spec.steps, "synthetic path length in steps");
    sub->add_option("--dt", o.spec.dt, "years per step");
    sub->add_option("--sim-seed", o.spec.seed, "synthetic path seed");
    sub->add_option("--start-date", o.start_date, "synthetic path start date");
    sub->add_option("--scenarios", o.scenarios, "scenarios per panel");
    sub->add_option("--tau", o.tau, "scenario horizon in steps");
    sub->add_option("--method", o.method, "naive, simple_block, moving_block or stationary");
    sub->add_option("--block-len", o.block_len, "block length; 0 = heuristic");
    sub->add_option("--seed", o.seed, "resampling seed");
    sub->add_option("--anchors", o.anchors, "comma-separated anchor indices");
}

void apply_simulate(const json& j, SimulateOpts& o) {
    check_known_keys(j, {"data", "model", "mu", "sigma", "kappa", "theta", "nu", "rho", "v0",
                         "s0", "steps", "dt", "sim_seed", "start_date", "scenarios", "tau",
                         "method", "block_len", "seed", "anchors", "out_dir", "threads"});
    apply_common(j, o.common);
    apply_key(j, "data", o.data);
    apply_key(j, "model", o.model);
    apply_key(j, "mu", o.spec.mu);
    apply_key(j, "sigma", o.spec.sigma);
    apply_key(j, "kappa", o.spec.kappa);
    apply_key(j, "theta", o.spec.theta);
    apply_key(j, "nu", o.spec.nu);
    apply_key(j, "rho", o.spec.rho);
    apply_key(j, "v0", o.spec.v0);
    apply_key(j, "s0", o.spec.s0);
    apply_key(j, "steps", o.spec.steps);
    apply_key(j, "dt", o.spec.dt);
    apply_key(j, "sim_seed", o.spec.seed);
    apply_key(j, "start_date", o.start_date);
    apply_key(j, "scenarios", o.scenarios);
    apply_key(j, "tau", o.tau);
    apply_key(j, "method", o.method);
    apply_key(j, "block_len", o.block_len);
    apply_key(j, "seed", o.seed);
    apply_key(j, "anchors", o.anchors);
}

json simulate_manifest(const SimulateOpts& o) {
    json j = common_manifest(o.common);
    j["data"] = o.data;
    j["model"] = o.model;
    j["mu"] = o.spec.mu;
    j["sigma"] = o.spec.sigma;
    j["kappa"] = o.spec.kappa;
    j["theta"] = o.spec.theta;
    j["nu"] = o.spec.nu;
    j["rho"] = o.spec.rho;
    j["v0"] = o.spec.v0;
    j["s0"] = o.spec.s0;
    j["steps"] = o.spec.steps;
    j["dt"] = o.spec.dt;
    j["sim_seed"] = o.spec.seed;
    j["start_date"] = o.start_date;
    j["scenarios"] = o.scenarios;
    j["tau"] = o.tau;
    j["method"] = o.method;
    j["block_len"] = o.block_len;
    j["seed"] = o.seed;
    j["anchors"] = o.anchors;
    return j;
}

int run_simulate(const SimulateOpts& o) {
    if (o.data.empty() == o.model.empty())
        throw std::invalid_argument("simulate: give exactly one of --data or --model");
    const fs::path dir = prepare_out_dir(o.common.out_dir);

    ReturnSeries returns;
    if (!o.data.empty()) {
        returns = to_returns(load_csv(o.data));
    } else {
        SyntheticSpec spec = o.spec;
        if (o.model == "gbm")
            spec.model = PathModel::gbm;
        else if (o.model == "heston")
            spec.model = PathModel::heston;
        else
            throw std::invalid_argument("simulate: --model must be gbm or heston");
        spec.start_date = parse_date_flag(o.start_date, "--start-date");
        const PriceSeries path = simulate_paths(spec, 1).front();
        write_csv(path, dir / "prices.csv");
        returns = to_returns(path);
    }

    std::vector<std::size_t> anchors = parse_size_list(o.anchors, "--anchors");
    if (anchors.empty()) anchors.push_back(returns.size());

    BootstrapConfig bcfg;
    bcfg.method = bootstrap_method_from_string(o.method);
    bcfg.block_len = o.block_len;
    bcfg.seed = o.seed;
    const auto panels = build_scenarios(returns.returns, anchors, o.scenarios, o.tau, bcfg);

    const fs::path csv = dir / "scenarios.csv";
    auto out = open_out(csv);
    out << "anchor,scenario,step,asset,return\n";
    for (const auto& panel : panels)
        for (std::size_t a = 0; a < panel.assets.size(); ++a)
            for (std::size_t r = 0; r < panel.scenario_count; ++r)
                for (std::size_t t = 0; t < panel.tau_steps; ++t)
                    out << panel.origin_index << ',' << r << ',' << t << ',' << a << ','
                        << fmt17(panel.assets[a](r, t)) << '\n';
    finish(out, csv);
    write_manifest(dir, "simulate", simulate_manifest(o));
    std::cout << "wrote " << panels.size() << " panel(s) x " << o.scenarios << " scenarios to "
              << csv.string() << "\n";
    return 0;
}

// ---- risk ----

struct RiskOpts {
    CommonOpts common;
    std::string data;
    bool from_returns = false;
    double alpha = 0.99;
    std::string method = "empirical";
    std::size_t tau = 1;
    std::size_t scenarios = 1000;
    std::string boot_method = "moving_block";
    std::size_t block_len = 0;
    std::uint64_t seed = 0;
    std::size_t gev_block = 21;
    double gpd_threshold = 0.95;
};

void add_risk(CLI::App& app, RiskOpts& o) {
    auto* sub = app.add_subcommand("risk", "tail risk estimates from a loss file");
    add_common(sub, o.common);
    sub->add_option("--data", o.data, "file with one value per line");
    sub->add_flag("--from-returns", o.from_returns, "values are returns; negate into losses");
    sub->add_option("--alpha", o.alpha, "confidence level");
    sub->add_option("--method", o.method, "empirical, normal, gpd, gev or mc");
    sub->add_option("--tau", o.tau, "horizon in steps");
    sub->add_option("--scenarios", o.scenarios, "mc scenario count");
    sub->add_option("--boot-method", o.boot_method, "mc resampling scheme");
    sub->add_option("--block-len", o.block_len, "mc block length; 0 = heuristic");
    sub->add_option("--seed", o.seed, "mc resampling seed");
    sub->add_option("--gev-block", o.gev_block, "gev block size in observations");
    sub->add_option("--gpd-threshold", o.gpd_threshold, "gpd threshold quantile");
}

void apply_risk(const json& j, RiskOpts& o) {
    check_known_keys(j, {"data", "from_returns", "alpha", "method", "tau", "scenarios",
                         "boot_method", "block_len", "seed", "gev_block", "gpd_threshold",
                         "out_dir", "threads"});
    apply_common(j, o.common);
    apply_key(j, "data", o.data);
    apply_key(j, "from_returns", o.from_returns);
    apply_key(j, "alpha", o.alpha);
    apply_key(j, "method", o.method);
    apply_key(j, "tau", o.tau);
    apply_key(j, "scenarios", o.scenarios);
    apply_key(j, "boot_method", o.boot_method);
    apply_key(j, "block_len", o.block_len);
    apply_key(j, "seed", o.seed);
    apply_key(j, "gev_block", o.gev_block);
    apply_key(j, "gpd_threshold", o.gpd_threshold);
}

json risk_manifest(const RiskOpts& o) {
    json j = common_manifest(o.common);
    j["data"] = o.data;
    j["from_returns"] = o.from_returns;
    j["alpha"] = o.alpha;
    j["method"] = o.method;
    j["tau"] = o.tau;
    j["scenarios"] = o.scenarios;
    j["boot_method"] = o.boot_method;
    j["block_len"] = o.block_len;
    j["seed"] = o.seed;
    j["gev_block"] = o.gev_block;
    j["gpd_threshold"] = o.gpd_threshold;
    return j;
}

int run_risk(const RiskOpts& o) {
    if (o.data.empty()) throw std::invalid_argument("risk: --data is required");
    const fs::path dir = prepare_out_dir(o.common.out_dir);
    std::vector<double> losses = read_value_lines(o.data);
    if (o.from_returns)
        for (double& v : losses) v = -v;

    RiskEstimate est;
    if (o.method == "empirical") {
        est = empirical_var_cvar(losses, o.alpha);
    } else if (o.method == "normal") {
        est = normal_var_cvar_from_sample(losses, o.alpha);
    } else if (o.method == "gpd") {
        est = gpd_var_cvar(fit_gpd(losses, o.gpd_threshold), o.alpha);
    } else if (o.method == "gev") {
        est = gev_var_cvar(fit_gev(losses, o.gev_block), o.alpha);
    } else if (o.method == "mc") {
        std::vector<double> rets(losses.size());
        for (std::size_t i = 0; i < losses.size(); ++i) rets[i] = -losses[i];
        BootstrapConfig bcfg;
        bcfg.method = bootstrap_method_from_string(o.boot_method);
        bcfg.block_len = o.block_len;
        bcfg.seed = o.seed;
        const std::size_t anchor[] = {rets.size()};
        const auto panels = build_scenarios(rets, anchor, o.scenarios, o.tau, bcfg);
        const double weights[] = {1.0};
        est = monte_carlo_var_cvar(panels.front(), weights, o.alpha);
    } else {
        throw std::invalid_argument("risk: unknown method '" + o.method + "'");
    }
    if (o.method != "mc" && o.tau > 1) est = scale_horizon(est, o.tau);

    json j;
    j["var"] = est.var;
    j["cvar"] = est.cvar;
    j["alpha"] = est.alpha;
    j["tau_steps"] = est.tau_steps;
    j["method"] = est.method;
    j["n_obs"] = est.n_obs;
    if (!est.note.empty()) j["note"] = est.note;
    const std::string text = j.dump(2);
    std::cout << text << "\n";
    auto out = open_out(dir / "risk.json");
    out << text << '\n';
    finish(out, dir / "risk.json");
    write_manifest(dir, "risk", risk_manifest(o));
    return 0;
}

// ---- train ----

struct TrainOpts {
    CommonOpts common;
    std::string data;
    std::string train_start;
    std::string train_end;
    std::size_t window = 32;
    std::string hidden = "32x32";
    std::size_t iters = 50;
    double lr = 1e-3;
    double alpha = 0.99;
    std::size_t scenarios = 1000;
    std::size_t tau = 1;
    std::string method = "moving_block";
    std::size_t block_len = 0;
    std::uint64_t seed = 0;
    double cost_rate = 0.0;
    double cost_fixed = 0.0;
    double units = 1.0;
    double clip = 0.0;
    std::string out = "policy.json";
};

void add_train(CLI::App& app, TrainOpts& o) {
    auto* sub = app.add_subcommand("train", "fit the hedge policy on a training window");
    add_common(sub, o.common);
    sub->add_option("--data", o.data, "price CSV (date,close)");
    sub->add_option("--train-start", o.train_start, "first training date (default: all)");
    sub->add_option("--train-end", o.train_end, "last training date (default: all)");
    sub->add_option("--window", o.window, "trailing returns fed to the policy");
    sub->add_option("--hidden", o.hidden, "hidden widths, e.g. 32x32; empty = affine");
    sub->add_option("--iters", o.iters, "training iterations");
    sub->add_option("--lr", o.lr, "Adam learning rate");
    sub->add_option("--alpha", o.alpha, "CVaR confidence level");
    sub->add_option("--scenarios", o.scenarios, "scenarios per anchor panel");
    sub->add_option("--tau", o.tau, "scenario horizon in steps");
    sub->add_option("--method", o.method, "panel resampling scheme");
    sub->add_option("--block-len", o.block_len, "block length; 0 = heuristic");
    sub->add_option("--seed", o.seed, "seed for init and panels");
    sub->add_option("--cost-rate", o.cost_rate, "proportional cost per traded notional");
    sub->add_option("--cost-fixed", o.cost_fixed, "fixed fee per rebalance");
    sub->add_option("--units", o.units, "primary units held");
    sub->add_option("--clip", o.clip, "symmetric output clip; 0 = off");
    sub->add_option("--out", o.out, "policy file (relative paths land in --out-dir)");
}

void apply_train(const json& j, TrainOpts& o) {
    check_known_keys(j, {"data", "train_start", "train_end", "window", "hidden", "iters", "lr",
                         "alpha", "scenarios", "tau", "method", "block_len", "seed", "cost_rate",
                         "cost_fixed", "units", "clip", "out", "out_dir", "threads"});
    apply_common(j, o.common);
    apply_key(j, "data", o.data);
    apply_key(j, "train_start", o.train_start);
    apply_key(j, "train_end", o.train_end);
    apply_key(j, "window", o.window);
    apply_key(j, "hidden", o.hidden);
    apply_key(j, "iters", o.iters);
    apply_key(j, "lr", o.lr);
    apply_key(j, "alpha", o.alpha);
    apply_key(j, "scenarios", o.scenarios);
    apply_key(j, "tau", o.tau);
    apply_key(j, "method", o.method);
    apply_key(j, "block_len", o.block_len);
    apply_key(j, "seed", o.seed);
    apply_key(j, "cost_rate", o.cost_rate);
    apply_key(j, "cost_fixed", o.cost_fixed);
    apply_key(j, "units", o.units);
    apply_key(j, "clip", o.clip);
    apply_key(j, "out", o.out);
}

json train_manifest(const TrainOpts& o) {
    json j = common_manifest(o.common);
    j["data"] = o.data;
    j["train_start"] = o.train_start;
    j["train_end"] = o.train_end;
    j["window"] = o.window;
    j["hidden"] = o.hidden;
    j["iters"] = o.iters;
    j["lr"] = o.lr;
    j["alpha"] = o.alpha;
    j["scenarios"] = o.scenarios;
    j["tau"] = o.tau;
    j["method"] = o.method;
    j["block_len"] = o.block_len;
    j["seed"] = o.seed;
    j["cost_rate"] = o.cost_rate;
    j["cost_fixed"] = o.cost_fixed;
    j["units"] = o.units;
    j["clip"] = o.clip;
    j["out"] = o.out;
    return j;
}

int run_train(const TrainOpts& o) {
    if (o.data.empty()) throw std::invalid_argument("train: --data is required");
    const fs::path dir = prepare_out_dir(o.common.out_dir);

    ReturnSeries returns = to_returns(load_csv(o.data));
    if (!o.train_start.empty() || !o.train_end.empty()) {
        const Date start = o.train_start.empty() ? returns.dates.front()
                                                 : parse_date_flag(o.train_start, "--train-start");
        const Date end = o.train_end.empty() ? returns.dates.back()
                                             : parse_date_flag(o.train_end, "--train-end");
        returns = window(returns, start, end);
    }

    HedgePolicy policy =
        HedgePolicy::create(o.window, parse_size_list(o.hidden, "--hidden"), 1, o.seed);
    policy.output_clip = o.clip;

    TrainConfig cfg;
    cfg.iterations = o.iters;
    cfg.learning_rate = o.lr;
    cfg.alpha = o.alpha;
    cfg.scenarios = o.scenarios;
    cfg.tau_steps = o.tau;
    cfg.seed = o.seed;
    cfg.costs.proportional_rate = o.cost_rate;
    cfg.costs.fixed_fee = o.cost_fixed;
    cfg.primary_units = o.units;

    BootstrapConfig bcfg;
    bcfg.method = bootstrap_method_from_string(o.method);
    bcfg.block_len = o.block_len;

    const auto anchors = default_anchors(returns.size(), o.window);
    const TrainResult result = train(policy, returns.returns, anchors, cfg, bcfg);

    fs::path policy_path(o.out);
    if (policy_path.is_relative()) policy_path = dir / policy_path;
    save_policy(result.policy, policy_path);

    const fs::path loss_csv = dir / "loss.csv";
    auto out = open_out(loss_csv);
    out << "iteration,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
        out << i << ',' << fmt17(result.loss_history[i]) << '\n';
    finish(out, loss_csv);
    write_manifest(dir, "train", train_manifest(o));
    std::cout << "trained " << o.iters << " iterations on " << anchors.size()
              << " anchors: loss " << fmt17(result.loss_history.front()) << " -> "
              << fmt17(result.loss_history.back()) << ", policy at " << policy_path.string()
              << "\n";
    return 0;
}

// ---- backtest ----

struct BacktestOpts {
    CommonOpts common;
    std::string policy;
    std::string data;
    std::string test_start;
    std::string test_end;
    std::size_t rebalance_every = 1;
    double cost_rate = 0.0;
    double cost_fixed = 0.0;
    double alpha = 0.99;
    double units = 1.0;
    std::size_t bins = 50;
};

void add_backtest(CLI::App& app, BacktestOpts& o) {
    auto* sub = app.add_subcommand("backtest", "run a trained policy over a test window");
    add_common(sub, o.common);
    sub->add_option("--policy", o.policy, "policy JSON from train");
    sub->add_option("--data", o.data, "price CSV (date,close)");
    sub->add_option("--test-start", o.test_start, "first test date");
    sub->add_option("--test-end", o.test_end, "last test date");
    sub->add_option("--rebalance-every", o.rebalance_every, "steps between rebalances");
    sub->add_option("--cost-rate", o.cost_rate, "proportional cost per traded notional");
    sub->add_option("--cost-fixed", o.cost_fixed, "fixed fee per rebalance");
    sub->add_option("--alpha", o.alpha, "reporting confidence level");
    sub->add_option("--units", o.units, "primary units held");
    sub->add_option("--bins", o.bins, "histogram bins");
}

void apply_backtest(const json& j, BacktestOpts& o) {
    check_known_keys(j, {"policy", "data", "test_start", "test_end", "rebalance_every",
                         "cost_rate", "cost_fixed", "alpha", "units", "bins", "out_dir",
                         "threads"});
    apply_common(j, o.common);
    apply_key(j, "policy", o.policy);
    apply_key(j, "data", o.data);
    apply_key(j, "test_start", o.test_start);
    apply_key(j, "test_end", o.test_end);
    apply_key(j, "rebalance_every", o.rebalance_every);
    apply_key(j, "cost_rate", o.cost_rate);
    apply_key(j, "cost_fixed", o.cost_fixed);
    apply_key(j, "alpha", o.alpha);
    apply_key(j, "units", o.units);
    apply_key(j, "bins", o.bins);
}

json backtest_manifest(const BacktestOpts& o) {
    json j = common_manifest(o.common);
    j["policy"] = o.policy;
    j["data"] = o.data;
    j["test_start"] = o.test_start;
    j["test_end"] = o.test_end;
    j["rebalance_every"] = o.rebalance_every;
    j["cost_rate"] = o.cost_rate;
    j["cost_fixed"] = o.cost_fixed;
    j["alpha"] = o.alpha;
    j["units"] = o.units;
    j["bins"] = o.bins;
    return j;
}

int run_backtest_cmd(const BacktestOpts& o) {
    if (o.policy.empty()) throw std::invalid_argument("backtest: --policy is required");
    if (o.data.empty()) throw std::invalid_argument("backtest: --data is required");
    if (o.test_start.empty() || o.test_end.empty())
        throw std::invalid_argument("backtest: --test-start and --test-end are required");
    const fs::path dir = prepare_out_dir(o.common.out_dir);

    const HedgePolicy policy = load_policy(o.policy);
    const PriceSeries prices = load_csv(o.data);
    BacktestConfig cfg;
    cfg.test_start = parse_date_flag(o.test_start, "--test-start");
    cfg.test_end = parse_date_flag(o.test_end, "--test-end");
    cfg.rebalance_every = o.rebalance_every;
    cfg.initial_units = o.units;
    cfg.costs.proportional_rate = o.cost_rate;
    cfg.costs.fixed_fee = o.cost_fixed;
    cfg.alpha = o.alpha;
    const BacktestReport report = run_backtest(policy, prices, cfg);

    {
        const fs::path p = dir / "networth.csv";
        auto out = open_out(p);
        out << "date,primal,hedged\n";
        for (std::size_t t = 0; t < report.dates.size(); ++t)
            out << report.dates[t].to_string() << ',' << fmt17(report.primal_net_value[t]) << ','
                << fmt17(report.hedged_net_value[t]) << '\n';
        finish(out, p);
    }
    {
        const fs::path p = dir / "hedge_ratio.csv";
        auto out = open_out(p);
        out << "date,ratio\n";
        const auto ratio = report.hedge_ratio(0);
        for (std::size_t t = 0; t < ratio.size(); ++t)
            out << report.dates[t].to_string() << ',' << fmt17(std::abs(ratio[t])) << '\n';
        finish(out, p);
    }
    {
        double lo = report.primal_pnl.front(), hi = lo;
        for (const auto* series : {&report.primal_pnl, &report.hedged_pnl})
            for (double v : *series) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        const Histogram hp = pnl_histogram(report.primal_pnl, o.bins, lo, hi);
        const Histogram hh = pnl_histogram(report.hedged_pnl, o.bins, lo, hi);
        const fs::path p = dir / "pnl_hist.csv";
        auto out = open_out(p);
        out << "bin_lo,bin_hi,primal_count,hedged_count\n";
        for (std::size_t b = 0; b < hp.counts.size(); ++b)
            out << fmt17(hp.edges[b]) << ',' << fmt17(hp.edges[b + 1]) << ',' << hp.counts[b]
                << ',' << hh.counts[b] << '\n';
        finish(out, p);
    }
    {
        json mj;
        mj["primal"]["var99"] = report.metrics.primal.var;
        mj["primal"]["cvar99"] = report.metrics.primal.cvar;
        mj["hedged"]["var99"] = report.metrics.hedged.var;
        mj["hedged"]["cvar99"] = report.metrics.hedged.cvar;
        const fs::path p = dir / "metrics.json";
        auto out = open_out(p);
        out << mj.dump(2) << '\n';
        finish(out, p);
    }
    write_manifest(dir, "backtest", backtest_manifest(o));
    std::cout << "backtest " << report.primal_pnl.size() << " steps: primal var=" <<
        fmt17(report.metrics.primal.var) << " cvar=" << fmt17(report.metrics.primal.cvar)
              << " hedged var=" << fmt17(report.metrics.hedged.var)
              << " cvar=" << fmt17(report.metrics.hedged.cvar) << "\n";
    return 0;
}

// ---- report ----

struct ReportOpts {
    CommonOpts common;
    std::string in_dir;
};

void add_report(CLI::App& app, ReportOpts& o) {
    auto* sub = app.add_subcommand("report", "render backtest CSVs as SVG charts");
    add_common(sub, o.common);
    sub->add_option("--in-dir", o.in_dir, "directory with backtest outputs");
}

void apply_report(const json& j, ReportOpts& o) {
    check_known_keys(j, {"in_dir", "out_dir", "threads"});
    apply_common(j, o.common);
    apply_key(j, "in_dir", o.in_dir);
}

json report_manifest(const ReportOpts& o) {
    json j = common_manifest(o.common);
    j["in_dir"] = o.in_dir;
    return j;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path,
                                                    const std::string& header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw DataError(path.string() + ": expected header '" + header + "', got '" + line + "'");
    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    const std::size_t n_fields = std::count(header.begin(), header.end(), ',') + 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != n_fields)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(n_fields) + " fields");
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw DataError(path.string() + ": no rows");
    return rows;
}

double parse_field(const std::string& s, const fs::path& path) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError(path.string() + ": not a number: '" + s + "'");
    return v;
}

int run_report(const ReportOpts& o) {
    if (o.in_dir.empty()) throw std::invalid_argument("report: --in-dir is required");
    const fs::path dir = prepare_out_dir(o.common.out_dir);
    const fs::path in(o.in_dir);

    {
        const auto rows = read_csv_rows(in / "networth.csv", "date,primal,hedged");
        std::vector<std::string> dates;
        SvgSeries primal{"primal", {}}, hedged{"hedged", {}};
        for (const auto& r : rows) {
            dates.push_back(r[0]);
            primal.ys.push_back(parse_field(r[1], in / "networth.csv"));
            hedged.ys.push_back(parse_field(r[2], in / "networth.csv"));
        }
        const SvgSeries series[] = {primal, hedged};
        auto out = open_out(dir / "networth.svg");
        out << line_chart_svg("Net value (start = 1)", dates, series);
        finish(out, dir / "networth.svg");
    }
    {
        const auto rows = read_csv_rows(in / "hedge_ratio.csv", "date,ratio");
        std::vector<std::string> dates;
        SvgSeries ratio{"hedge ratio", {}};
        for (const auto& r : rows) {
            dates.push_back(r[0]);
            ratio.ys.push_back(parse_field(r[1], in / "hedge_ratio.csv"));
        }
        const SvgSeries series[] = {ratio};
        auto out = open_out(dir / "hedge_ratio.svg");
        out << line_chart_svg("Hedge ratio (magnitude of short)", dates, series);
        finish(out, dir / "hedge_ratio.svg");
    }
    {
        const auto rows =
            read_csv_rows(in / "pnl_hist.csv", "bin_lo,bin_hi,primal_count,hedged_count");
        std::vector<double> edges;
        SvgSeries primal{"primal", {}}, hedged{"hedged", {}};
        for (const auto& r : rows) {
            const double lo = parse_field(r[0], in / "pnl_hist.csv");
            const double hi = parse_field(r[1], in / "pnl_hist.csv");
            if (edges.empty())
                edges.push_back(lo);
            else if (edges.back() != lo)
                throw DataError("pnl_hist.csv: bins are not contiguous");
            edges.push_back(hi);
            primal.ys.push_back(parse_field(r[2], in / "pnl_hist.csv"));
            hedged.ys.push_back(parse_field(r[3], in / "pnl_hist.csv"));
        }
        const SvgSeries series[] = {primal, hedged};
        auto out = open_out(dir / "pnl_hist.svg");
        out << histogram_svg("Daily P&L distribution", edges, series);
        finish(out, dir / "pnl_hist.svg");
    }
    write_manifest(dir, "report", report_manifest(o));
    std::cout << "wrote networth.svg, hedge_ratio.svg, pnl_hist.svg to " << dir.string() << "\n";
    return 0;
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

std::string find_subcommand_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i)
        if (argv[i][0] != '-') return argv[i];
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tail-risk hedging toolkit: scenario generation, tail metrics, policy training, "
                 "backtests and charts"};
    app.require_subcommand(1);

    SimulateOpts sim;
    RiskOpts risk;
    TrainOpts tr;
    BacktestOpts bt;
    ReportOpts rep;
    add_simulate(app, sim);
    add_risk(app, risk);
    add_train(app, tr);
    add_backtest(app, bt);
    add_report(app, rep);

    try {
        const std::string config_path = find_config_arg(argc, argv);
        if (!config_path.empty()) {
            const std::string sub = find_subcommand_arg(argc, argv);
            const json cfg = load_config_json(config_path, sub);
            if (sub == "simulate")
                apply_simulate(cfg, sim);
            else if (sub == "risk")
                apply_risk(cfg, risk);
            else if (sub == "train")
                apply_train(cfg, tr);
            else if (sub == "backtest")
                apply_backtest(cfg, bt);
            else if (sub == "report")
                apply_report(cfg, rep);
            else
                throw std::invalid_argument("config: unknown subcommand '" + sub + "'");
        }

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            std::cout << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            std::cout << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            std::cerr << "error: config: " << e.what() << "\n" << app.help();
            return 1;
        }

        const CommonOpts* common = nullptr;
        if (app.got_subcommand("simulate")) common = &sim.common;
        if (app.got_subcommand("risk")) common = &risk.common;
        if (app.got_subcommand("train")) common = &tr.common;
        if (app.got_subcommand("backtest")) common = &bt.common;
        if (app.got_subcommand("report")) common = &rep.common;
        set_max_threads(common ? common->threads : 0);

        if (app.got_subcommand("simulate")) return run_simulate(sim);
        if (app.got_subcommand("risk")) return run_risk(risk);
        if (app.got_subcommand("train")) return run_train(tr);
        if (app.got_subcommand("backtest")) return run_backtest_cmd(bt);
        if (app.got_subcommand("report")) return run_report(rep);
        std::cerr << "error: config: no subcommand\n" << app.help();
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
}
