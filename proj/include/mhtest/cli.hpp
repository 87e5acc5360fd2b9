#ifndef MHTEST_CLI_HPP
#define MHTEST_CLI_HPP

// Command layer behind the mhtest tool: run configuration, the embed / test /
// sweep / costs / simulate / report commands, and the worker pool they share.
// Every command writes comma-separated series files plus one JSON summary
// into the output directory and returns that summary.

#include "mhtest/mhtest.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mhtest::cli {

using json = nlohmann::ordered_json;

/// Missing input file, unreadable report input, or an output that cannot be written.
class io_error : public error {
public:
    using error::error;
};

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_input = 3 };

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string input;      ///< price file; empty when a generator is used
    std::string generator;  ///< "", "gbm" or "fbm"
    GbmParams gbm;
    FbmParams fbm;
    std::string time_column = "0";  ///< index, header name, or "none"
    std::string price_column = "1";
    std::string label;

    std::vector<double> etas;
    std::vector<StrategyKind> strategies{StrategyKind::beta_binomial, StrategyKind::markov};
    std::optional<double> a;  ///< defaults to 0.01 / eta
    std::optional<double> b;
    double alpha = 1e-3;
    std::optional<double> horizon;      ///< time horizon T of the embedding
    std::optional<std::size_t> rounds;  ///< round horizon N of the maximal test
    std::vector<double> costs{0.01, 0.03, 0.05};  ///< in units of delta
    bool critical = true;
    CrossingRule rule = CrossingRule::interpolate;

    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

    BetaBinomialParams params_for(double eta) const {
        auto p = BetaBinomialParams::for_eta(eta);
        if (a) p.a = *a;
        if (b) p.b = *b;
        return p;
    }

    std::string effective_label() const {
        if (!label.empty()) return label;
        if (!generator.empty()) return generator;
        if (!input.empty()) return std::filesystem::path(input).stem().string();
        return "run";
    }

    void validate() const {
        if (input.empty() == generator.empty()) throw config_error("exactly one of input and generator must be set");
        if (etas.empty()) throw config_error("at least one eta is required");
        for (double e : etas) {
            if (!(e > 0.0) || !std::isfinite(e)) throw config_error("every eta must be > 0");
        }
        if (strategies.empty()) throw config_error("at least one strategy is required");
        if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0,1)");
        if (a && !(*a > 0.0)) throw config_error("a must be > 0");
        if (b && !(*b > 0.0)) throw config_error("b must be > 0");
        if (horizon && !(*horizon > 0.0)) throw config_error("horizon must be > 0");
        for (double c : costs) {
            if (!(c >= 0.0 && c < 1.0)) throw config_error("cost levels are multiples of delta in [0,1)");
        }
        if (jobs < 1) throw config_error("jobs must be >= 1");
        if (generator == "gbm") gbm.validate();
        if (generator == "fbm") {
            fbm.validate();
            if (fbm.n > FbmParams::max_steps) throw config_error("fbm: n exceeds the generator limit");
        }
    }
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw config_error(key + ": '" + v + "' is not a number");
    return x;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw config_error(key + ": '" + v + "' is not a non-negative integer");
    }
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw config_error(key + ": '" + v + "' is out of range");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error(key + ": '" + v + "' is not a boolean");
}

}  // namespace detail

/// Keys accepted in config files and as --key options.
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys{
        {"input", "price CSV file"},
        {"generator", "synthetic source instead of a file: gbm or fbm"},
        {"label", "instrument label used in file names and records"},
        {"time_column", "time column index or header name, or none"},
        {"price_column", "price column index or header name"},
        {"eta", "comma-separated grid sizes"},
        {"k", "comma-separated k values, eta = 2^-k"},
        {"strategy", "bb, markov, or both"},
        {"a", "beta prior a (default 0.01/eta)"},
        {"b", "beta prior b (default 0.01/eta)"},
        {"alpha", "significance level"},
        {"horizon", "time horizon T; only hits before T are used"},
        {"rounds", "round horizon N of the maximal test"},
        {"costs", "comma-separated unit costs in multiples of delta"},
        {"critical", "search the critical cost (true/false)"},
        {"crossing", "interpolate or single_hit"},
        {"seed", "generator seed"},
        {"out", "output directory"},
        {"jobs", "worker threads"},
        {"mu", "gbm drift"},
        {"sigma", "generator volatility"},
        {"s0", "generator initial price"},
        {"dt", "generator time step"},
        {"T", "gbm time horizon"},
        {"hurst", "fbm Hurst index"},
        {"n", "fbm number of steps"},
    };
    return keys;
}

/// Apply one key to the configuration. Throws config_error on unknown keys and bad values.
inline void apply(RunConfig& c, const std::string& key, const std::string& raw) {
    using namespace detail;
    const std::string v = trim(raw);
    if (key == "input") {
        c.input = v;
    } else if (key == "generator") {
        if (!v.empty() && v != "gbm" && v != "fbm") throw config_error("generator must be gbm or fbm");
        c.generator = v;
    } else if (key == "label") {
        c.label = v;
    } else if (key == "time_column") {
        c.time_column = v;
    } else if (key == "price_column") {
        c.price_column = v;
    } else if (key == "eta") {
        c.etas.clear();
        for (const auto& s : split_list(v)) c.etas.push_back(to_real(key, s));
    } else if (key == "k") {
        c.etas.clear();
        for (const auto& s : split_list(v)) c.etas.push_back(std::exp2(-to_real(key, s)));
    } else if (key == "strategy") {
        c.strategies.clear();
        for (const auto& s : split_list(v)) {
            if (s == "bb") {
                c.strategies.push_back(StrategyKind::beta_binomial);
            } else if (s == "markov") {
                c.strategies.push_back(StrategyKind::markov);
            } else if (s == "both") {
                c.strategies = {StrategyKind::beta_binomial, StrategyKind::markov};
            } else {
                throw config_error("strategy: unknown value '" + s + "'");
            }
        }
    } else if (key == "a") {
        c.a = to_real(key, v);
    } else if (key == "b") {
        c.b = to_real(key, v);
    } else if (key == "alpha") {
        c.alpha = to_real(key, v);
    } else if (key == "horizon") {
        if (v.empty()) {
            c.horizon.reset();
        } else {
            c.horizon = to_real(key, v);
        }
    } else if (key == "rounds") {
        if (v.empty()) {
            c.rounds.reset();
        } else {
            c.rounds = to_count(key, v);
        }
    } else if (key == "costs") {
        c.costs.clear();
        for (const auto& s : split_list(v)) c.costs.push_back(to_real(key, s));
    } else if (key == "critical") {
        c.critical = to_bool(key, v);
    } else if (key == "crossing") {
        if (v == "interpolate") {
            c.rule = CrossingRule::interpolate;
        } else if (v == "single_hit") {
            c.rule = CrossingRule::single_hit;
        } else {
            throw config_error("crossing must be interpolate or single_hit");
        }
    } else if (key == "seed") {
        c.seed = to_count(key, v);
    } else if (key == "out") {
        c.out_dir = v;
    } else if (key == "jobs") {
        c.jobs = to_count(key, v);
    } else if (key == "mu") {
        c.gbm.mu = to_real(key, v);
    } else if (key == "sigma") {
        c.gbm.sigma = c.fbm.sigma = to_real(key, v);
    } else if (key == "s0") {
        c.gbm.s0 = c.fbm.s0 = to_real(key, v);
    } else if (key == "dt") {
        c.gbm.dt = c.fbm.dt = to_real(key, v);
    } else if (key == "T") {
        c.gbm.horizon = to_real(key, v);
    } else if (key == "hurst") {
        c.fbm.hurst = to_real(key, v);
    } else if (key == "n") {
        c.fbm.n = to_count(key, v);
    } else {
        throw config_error("unknown configuration key '" + key + "'");
    }
}

/// Flat key = value file; '#' starts a comment line.
inline KeyValues parse_config(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(number) + ": expected key = value");
        }
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// Defaults, then the config file, then command-line values.
inline RunConfig build_config(const KeyValues& file, const KeyValues& flags) {
    RunConfig c;
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [k, v] : *layer) apply(c, k, v);
    }
    c.gbm.seed = c.seed;
    c.fbm.seed = c.seed;
    return c;
}

inline json config_json(const RunConfig& c) {
    json j;
    if (!c.input.empty()) j["input"] = c.input;
    if (!c.generator.empty()) {
        j["generator"] = c.generator;
        if (c.generator == "gbm") {
            j["mu"] = c.gbm.mu;
            j["sigma"] = c.gbm.sigma;
            j["s0"] = c.gbm.s0;
            j["dt"] = c.gbm.dt;
            j["T"] = c.gbm.horizon;
        } else {
            j["hurst"] = c.fbm.hurst;
            j["sigma"] = c.fbm.sigma;
            j["s0"] = c.fbm.s0;
            j["dt"] = c.fbm.dt;
            j["n"] = c.fbm.n;
        }
    }
    j["label"] = c.effective_label();
    j["eta"] = c.etas;
    std::vector<std::string> s;
    for (auto k : c.strategies) s.emplace_back(to_string(k));
    j["strategy"] = s;
    j["a"] = c.a ? json(*c.a) : json("0.01/eta");
    j["b"] = c.b ? json(*c.b) : json("0.01/eta");
    j["alpha"] = c.alpha;
    j["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
    j["rounds"] = c.rounds ? json(*c.rounds) : json(nullptr);
    j["costs_over_delta"] = c.costs;
    j["crossing"] = c.rule == CrossingRule::interpolate ? "interpolate" : "single_hit";
    j["seed"] = c.seed;
    return j;
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// "k8" for eta = 2^-8, otherwise "eta<value>".
inline std::string eta_tag(double eta) {
    const double k = -std::log2(eta);
    const double kr = std::round(k);
    if (std::fabs(std::exp2(-kr) - eta) <= 1e-12 * eta) {
        return "k" + std::to_string(static_cast<long long>(kr));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "eta%.6g", eta);
    return buf;
}

inline std::string cost_tag(double c_over_delta) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "c%.4g", c_over_delta);
    return buf;
}

/// Critical cost in delta units, e.g. "0.05delta".
inline std::string delta_units(double c_over_delta) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fdelta", c_over_delta);
    return buf;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline json opt_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

/// Run fn(0..count-1) on up to `jobs` threads. Results keep index order; the
/// exception of the lowest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, std::size_t jobs, F fn) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(count, 1));
    std::vector<std::future<void>> workers;
    for (std::size_t w = 1; w < n_workers; ++w) workers.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : workers) f.get();
    std::vector<T> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

class OutputDir {
public:
    explicit OutputDir(std::string dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw io_error("cannot create output directory '" + dir_ + "': " + ec.message());
    }

    template <class Writer>
    std::string write(const std::string& name, Writer&& w) const {
        const auto path = (std::filesystem::path(dir_) / name).string();
        std::ofstream out(path);
        if (!out) throw io_error("cannot write '" + path + "'");
        w(out);
        out.flush();
        if (!out) throw io_error("write to '" + path + "' failed");
        return path;
    }

private:
    std::string dir_;
};

inline PricePath load_source(const RunConfig& c) {
    const std::string label = c.effective_label();
    if (c.generator == "gbm") return generate_gbm(c.gbm, label);
    if (c.generator == "fbm") return generate_fbm_exp(c.fbm, label);
    std::ifstream in(c.input);
    if (!in) throw io_error("cannot open input file '" + c.input + "'");
    auto column = [](const std::string& v) -> ColumnRef {
        if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) return std::size_t{std::stoul(v)};
        return v;
    };
    CsvColumns cols;
    cols.time = c.time_column == "none" ? std::nullopt : std::optional<ColumnRef>(column(c.time_column));
    cols.price = column(c.price_column);
    return load_price_csv(in, cols, label);
}

inline Embedding embed_for(const PricePath& path, const RunConfig& c, double eta) {
    EmbedOptions opts;
    opts.horizon = c.horizon;
    opts.rule = c.rule;
    return embed(path, grid_from_eta(eta), opts);
}

inline json summary_head(const std::string& command, const RunConfig& c) {
    json j;
    j["command"] = command;
    j["config"] = config_json(c);
    j["records"] = json::array();
    return j;
}

inline json path_record(const Embedding& e) {
    json j;
    j["n_star"] = e.n_star();
    const auto ps = path_stats(e);
    j["tv"] = ps ? json(ps->tv) : json(nullptr);
    j["l"] = ps ? json(ps->l) : json(nullptr);
    j["zeta"] = ps ? json(ps->zeta) : json(nullptr);
    return j;
}

inline json diagnostics_record(const Embedding& e) {
    json j;
    const auto s = empirical_probs(e);
    if (s.rounds() == 0) {
        for (const char* k : {"p11", "p00", "p1", "h1", "h0"}) j[k] = nullptr;
    } else {
        j["p11"] = opt_json(s.p11.back());
        j["p00"] = opt_json(s.p00.back());
        j["p1"] = s.p1.back();
        j["h1"] = opt_json(s.h1.back());
        j["h0"] = opt_json(s.h0.back());
    }
    j["lag1_autocorrelation"] = opt_json(direction_autocorrelation(e));
    return j;
}

inline TestConfig test_config(const RunConfig& c, std::size_t rounds_available, std::size_t m = 1) {
    TestConfig t;
    t.alpha = c.alpha;
    t.num_tests = m;
    if (c.rounds) t.horizon_rounds = std::min(*c.rounds, rounds_available);
    return t;
}

inline void finish(json& summary, const OutputDir& out, const std::string& name) {
    out.write(name, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// One embedding file per eta and a summary with n* per eta.
inline json cmd_embed(const RunConfig& c, std::ostream& log) {
    c.validate();
    const OutputDir out(c.out_dir);
    const PricePath path = load_source(c);
    const std::string label = c.effective_label();
    auto records = parallel_map<json>(c.etas.size(), c.jobs, [&](std::size_t i) {
        const double eta = c.etas[i];
        const auto e = embed_for(path, c, eta);
        const std::string file = out.write("embedding_" + label + "_" + eta_tag(eta) + ".csv",
                                           [&](std::ostream& os) { write_embedding_csv(os, e); });
        json r;
        r["kind"] = "embed";
        r["label"] = label;
        r["eta"] = eta;
        r["tag"] = eta_tag(eta);
        r["delta"] = e.grid.delta;
        r["rho"] = e.grid.rho;
        r["samples"] = path.size();
        r.update(path_record(e));
        r["file"] = file;
        return r;
    });
    json summary = summary_head("embed", c);
    for (auto& r : records) {
        log << label << ' ' << r["tag"].get<std::string>() << " n*=" << r["n_star"].get<std::size_t>() << '\n';
        summary["records"].push_back(std::move(r));
    }
    finish(summary, out, "summary_embed_" + label + ".json");
    return summary;
}

namespace detail {

struct EtaRun {
    std::vector<json> tests;
    std::vector<TestOutcome> outcomes;  ///< aligned with tests
};

inline EtaRun run_tests_for_eta(const PricePath& path, const RunConfig& c, double eta, const OutputDir& out) {
    const std::string label = c.effective_label();
    const std::string tag = eta_tag(eta);
    const auto e = embed_for(path, c, eta);
    const auto params = c.params_for(eta);
    out.write("stats_" + label + "_" + tag + ".csv",
              [&](std::ostream& os) { write_stats_csv(os, empirical_probs(e), e); });
    EtaRun run;
    const json path_part = path_record(e);
    const json diag_part = diagnostics_record(e);
    for (const auto kind : c.strategies) {
        const auto cap = run_strategy(kind, e, params);
        const auto cfg = test_config(c, cap.rounds());
        const auto outcome = run_max_test(cap, cfg, e.hit_times);
        const std::string file = out.write(
            "capital_" + label + "_" + std::string(to_string(kind)) + "_" + tag + ".csv",
            [&](std::ostream& os) { write_capital_csv(os, cap, e.hit_times, e.start_time, eta, cfg); });
        json r;
        r["kind"] = "test";
        r["label"] = label;
        r["eta"] = eta;
        r["tag"] = tag;
        r["strategy"] = to_string(kind);
        r["a"] = params.a;
        r["b"] = params.b;
        r.update(path_part);
        r["rounds_scanned"] = outcome.rounds_scanned;
        r["fn"] = opt_json(outcome.first_crossing_round);
        r["ft"] = opt_json(outcome.first_crossing_time);
        r["rejected"] = outcome.rejected;
        r["max_capital"] = outcome.max_capital();
        r["log_max_capital"] = outcome.log_max_capital;
        r["final_capital"] = std::exp(outcome.log_final_capital);
        r["log_final_capital"] = outcome.log_final_capital;
        r["p_value"] = outcome.p_value;
        r["final_p_value"] = outcome.final_p_value;
        r.update(diag_part);
        r["file"] = file;
        run.tests.push_back(std::move(r));
        run.outcomes.push_back(outcome);
    }
    return run;
}

inline std::vector<EtaRun> run_tests(const RunConfig& c, const OutputDir& out) {
    const PricePath path = load_source(c);
    return parallel_map<EtaRun>(c.etas.size(), c.jobs,
                                [&](std::size_t i) { return run_tests_for_eta(path, c, c.etas[i], out); });
}

}  // namespace detail

/// Test outcome, capital series and diagnostic series per (eta, strategy).
inline json cmd_test(const RunConfig& c, std::ostream& log) {
    c.validate();
    const OutputDir out(c.out_dir);
    auto runs = detail::run_tests(c, out);
    json summary = summary_head("test", c);
    for (auto& run : runs) {
        for (auto& r : run.tests) {
            log << r["label"].get<std::string>() << ' ' << r["tag"].get<std::string>() << ' '
                << r["strategy"].get<std::string>() << " n*=" << r["n_star"].get<std::size_t>()
                << " max_capital=" << r["max_capital"].get<double>() << " p=" << r["p_value"].get<double>()
                << (r["rejected"].get<bool>() ? " rejected" : "") << '\n';
            summary["records"].push_back(std::move(r));
        }
    }
    finish(summary, out, "summary_test_" + c.effective_label() + ".json");
    return summary;
}

/// Per-eta outcomes plus a Bonferroni combination over the etas, per strategy.
inline json cmd_sweep(const RunConfig& c, std::ostream& log) {
    c.validate();
    const OutputDir out(c.out_dir);
    auto runs = detail::run_tests(c, out);
    json summary = summary_head("sweep", c);
    for (std::size_t s = 0; s < c.strategies.size(); ++s) {
        std::vector<TestOutcome> outcomes;
        for (const auto& run : runs) outcomes.push_back(run.outcomes[s]);
        const auto combined = bonferroni(outcomes, c.alpha);
        const auto best = bonferroni_best_index(outcomes);
        json r;
        r["kind"] = "sweep";
        r["label"] = c.effective_label();
        r["strategy"] = to_string(c.strategies[s]);
        r["m"] = outcomes.size();
        r["best_eta"] = c.etas[best];
        r["best_tag"] = eta_tag(c.etas[best]);
        r["p_value"] = combined.p_value;
        r["adjusted_p"] = combined.adjusted_p;
        r["alpha"] = c.alpha;
        r["rejected"] = combined.rejected;
        log << r["label"].get<std::string>() << ' ' << r["strategy"].get<std::string>() << " m=" << outcomes.size()
            << " best=" << r["best_tag"].get<std::string>() << " adjusted_p=" << combined.adjusted_p
            << (combined.rejected ? " rejected" : "") << '\n';
        summary["records"].push_back(std::move(r));
    }
    for (auto& run : runs) {
        for (auto& r : run.tests) summary["records"].push_back(std::move(r));
    }
    finish(summary, out, "summary_sweep_" + c.effective_label() + ".json");
    return summary;
}

/// Markov strategy under each cost level, plus the critical cost per eta.
inline json cmd_costs(const RunConfig& c, std::ostream& log) {
    c.validate();
    const OutputDir out(c.out_dir);
    const PricePath path = load_source(c);
    const std::string label = c.effective_label();

    struct Task {
        std::size_t eta_index;
        std::optional<double> cost;  ///< empty: critical-cost search
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < c.etas.size(); ++i) {
        for (double k : c.costs) tasks.push_back({i, k});
        if (c.critical) tasks.push_back({i, std::nullopt});
    }
    std::vector<Embedding> embeddings = parallel_map<Embedding>(
        c.etas.size(), c.jobs, [&](std::size_t i) { return embed_for(path, c, c.etas[i]); });

    auto records = parallel_map<json>(tasks.size(), c.jobs, [&](std::size_t t) {
        const auto& task = tasks[t];
        const auto& e = embeddings[task.eta_index];
        const double eta = c.etas[task.eta_index];
        const auto params = c.params_for(eta);
        json r;
        r["label"] = label;
        r["eta"] = eta;
        r["tag"] = eta_tag(eta);
        r["n_star"] = e.n_star();
        if (!task.cost) {
            const auto frictionless = run_markov(e, params);
            const auto cc = critical_cost(e, params);
            r["kind"] = "critical";
            r["frictionless_capital"] = std::exp(frictionless.final_log_capital());
            r["degenerate"] = cc.degenerate;
            r["found"] = cc.found;
            r["c_star"] = cc.found ? json(cc.c_star) : json(nullptr);
            r["c_star_over_delta"] = cc.found ? json(cc.in_delta_units()) : json(nullptr);
            r["c_star_display"] = cc.found ? delta_units(cc.in_delta_units()) : std::string("not found below delta");
            r["final_capital_at_c_star"] = cc.found ? json(cc.final_capital) : json(nullptr);
            r["hold_rounds_at_c_star"] = cc.found ? json(cc.hold_rounds) : json(nullptr);
            r["ruined"] = cc.ruined;
            return r;
        }
        const double c_abs = *task.cost * e.grid.delta;
        r["kind"] = "cost";
        r["c_over_delta"] = *task.cost;
        r["c"] = c_abs;
        try {
            const auto run = run_markov_with_costs(e, CostParams{c_abs, params});
            CapitalProcess cap;
            cap.kind = StrategyKind::markov;
            cap.log_capital = run.log_capital;
            cap.bets = run.trades;
            const auto outcome = run_max_test(cap, test_config(c, cap.rounds()), e.hit_times);
            const std::string file = out.write("costs_" + label + "_" + eta_tag(eta) + "_" + cost_tag(*task.cost) + ".csv",
                                               [&](std::ostream& os) { write_cost_run_csv(os, run, e); });
            r["fn"] = opt_json(outcome.first_crossing_round);
            r["ft"] = opt_json(outcome.first_crossing_time);
            r["final_capital"] = run.final_capital();
            r["log_final_capital"] = run.final_log_capital();
            r["max_capital"] = outcome.max_capital();
            r["hold_rounds"] = run.hold_rounds;
            r["rounds"] = run.rounds();
            r["ruined"] = false;
            r["file"] = file;
        } catch (const prudence_error& err) {
            r["fn"] = nullptr;
            r["final_capital"] = 0.0;
            r["hold_rounds"] = nullptr;
            r["ruined"] = true;
            r["note"] = err.what();
        }
        return r;
    });

    json summary = summary_head("costs", c);
    for (auto& r : records) {
        if (r["kind"] == "cost") {
            log << label << ' ' << r["tag"].get<std::string>() << " c=" << r["c_over_delta"].get<double>()
                << "delta final_capital=" << r["final_capital"].get<double>();
            if (!r["hold_rounds"].is_null()) log << " hn=" << r["hold_rounds"].get<std::size_t>();
            log << '\n';
        } else {
            log << label << ' ' << r["tag"].get<std::string>() << " c*=" << r["c_star_display"].get<std::string>()
                << (r["degenerate"].get<bool>() ? " (frictionless capital <= 1)" : "") << '\n';
        }
        summary["records"].push_back(std::move(r));
    }
    finish(summary, out, "summary_costs_" + label + ".json");
    return summary;
}

/// Write the generated price path as a time,price file.
inline json cmd_simulate(const RunConfig& c, std::ostream& log) {
    if (c.generator.empty()) throw config_error("simulate needs generator = gbm or fbm");
    RunConfig checked = c;
    checked.input.clear();
    if (checked.etas.empty()) checked.etas.push_back(1.0);
    checked.validate();
    const OutputDir out(c.out_dir);
    const PricePath path = load_source(checked);
    const std::string label = c.effective_label();
    const std::string file = out.write("prices_" + label + ".csv", [&](std::ostream& os) {
        os.precision(17);
        os << "# generator=" << c.generator << " seed=" << c.seed << '\n';
        os << "time,price\n";
        for (std::size_t i = 0; i < path.size(); ++i) os << path.times()[i] << ',' << path.prices()[i] << '\n';
    });
    json summary;
    summary["command"] = "simulate";
    json cfg = config_json(checked);
    cfg.erase("eta");
    summary["config"] = cfg;
    json r;
    r["kind"] = "simulate";
    r["label"] = label;
    r["samples"] = path.size();
    r["file"] = file;
    summary["records"] = json::array({r});
    log << label << " samples=" << path.size() << " file=" << file << '\n';
    finish(summary, out, "summary_simulate_" + label + ".json");
    return summary;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace detail {

inline void csv_cell(std::ostream& os, const json& v) {
    if (v.is_null()) return;
    if (v.is_string()) {
        os << v.get<std::string>();
    } else if (v.is_boolean()) {
        os << (v.get<bool>() ? "true" : "false");
    } else {
        os << v.dump();
    }
}

inline void write_table(std::ostream& os, const std::vector<std::string>& cols, const std::vector<json>& rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) os << ',';
            if (r.contains(cols[i])) csv_cell(os, r[cols[i]]);
        }
        os << '\n';
    }
}

}  // namespace detail

/// Merge summary files into table-shaped CSVs: diagnostics, tests, sweeps,
/// cost runs and critical costs. Rows keep the order of the input files.
inline json cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir, std::ostream& log) {
    if (inputs.empty()) throw config_error("report needs at least one summary file");
    const OutputDir out(out_dir);
    std::map<std::string, std::vector<json>> by_kind;
    for (const auto& file : inputs) {
        std::ifstream in(file);
        if (!in) throw io_error("cannot open summary file '" + file + "'");
        json s;
        try {
            s = json::parse(in);
        } catch (const json::exception& e) {
            throw io_error("'" + file + "' is not a summary file: " + e.what());
        }
        if (!s.contains("records") || !s["records"].is_array()) {
            throw io_error("'" + file + "' has no records array");
        }
        for (const auto& r : s["records"]) {
            if (r.contains("kind")) by_kind[r["kind"].get<std::string>()].push_back(r);
        }
    }

    struct Table {
        std::string name;
        std::string kind;
        std::vector<std::string> cols;
    };
    const std::vector<Table> tables{
        {"report_diagnostics.csv", "test", {"label", "tag", "n_star", "p11", "p00", "p1", "h1", "h0", "zeta", "tv", "l"}},
        {"report_tests.csv", "test",
         {"label", "tag", "strategy", "n_star", "fn", "ft", "max_capital", "final_capital", "p_value", "rejected"}},
        {"report_sweeps.csv", "sweep", {"label", "strategy", "m", "best_tag", "p_value", "adjusted_p", "rejected"}},
        {"report_costs.csv", "cost", {"label", "tag", "c_over_delta", "fn", "final_capital", "hold_rounds", "ruined"}},
        {"report_critical.csv", "critical",
         {"label", "tag", "frictionless_capital", "hold_rounds_at_c_star", "c_star_display", "degenerate"}},
        {"report_embeddings.csv", "embed", {"label", "tag", "eta", "samples", "n_star", "tv", "l", "zeta"}},
    };

    json summary;
    summary["command"] = "report";
    summary["inputs"] = inputs;
    summary["tables"] = json::array();
    for (const auto& t : tables) {
        auto it = by_kind.find(t.kind);
        if (it == by_kind.end()) continue;
        std::vector<json> rows = it->second;
        if (t.name == "report_diagnostics.csv") {
            // one row per (label, eta): diagnostics do not depend on the strategy
            std::vector<json> unique;
            for (const auto& r : rows) {
                const bool seen = std::any_of(unique.begin(), unique.end(), [&](const json& u) {
                    return u["label"] == r["label"] && u["eta"] == r["eta"];
                });
                if (!seen) unique.push_back(r);
            }
            rows = std::move(unique);
        }
        const std::string file = out.write(t.name, [&](std::ostream& os) { detail::write_table(os, t.cols, rows); });
        json entry;
        entry["file"] = file;
        entry["rows"] = rows.size();
        summary["tables"].push_back(entry);
        log << file << " rows=" << rows.size() << '\n';
    }
    finish(summary, out, "summary_report.json");
    return summary;
}

}  // namespace mhtest::cli

#endif  // MHTEST_CLI_HPP
