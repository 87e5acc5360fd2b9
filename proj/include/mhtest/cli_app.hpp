#ifndef MHTEST_CLI_APP_HPP
#define MHTEST_CLI_APP_HPP

// Argument parsing for the mhtest tool. run_cli() is the whole program minus
// main(), so tests can drive it with an argument vector and captured streams.

#include "mhtest/cli.hpp"

#include <CLI11.hpp>

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mhtest::cli {

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Martingale hypothesis tests on price paths via grid embedding and betting strategies", "mhtest"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app = nullptr;
        std::string config_file;
        std::map<std::string, std::string> values;
    };
    std::map<std::string, Sub> subs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"embed", "embed the price path on each grid and write the hit sequence"},
        {"test", "run the sequential tests and write capital and diagnostic series"},
        {"sweep", "test over several grid sizes with a Bonferroni combination"},
        {"costs", "Markov strategy under proportional transaction costs"},
        {"simulate", "write a synthetic price path from a generator"},
    };
    for (const auto& [name, help] : commands) {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        s.app->add_option("-c,--config", s.config_file, "flat key = value configuration file");
        for (const auto& [key, key_help] : config_keys()) {
            s.app->add_option("--" + key, s.values[key], key_help);
        }
    }
    std::vector<std::string> report_inputs;
    std::string report_out = ".";
    auto* report = app.add_subcommand("report", "merge summary files into table-shaped CSVs");
    report->add_option("summaries", report_inputs, "summary JSON files")->required();
    report->add_option("--out", report_out, "output directory");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "mhtest: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (report->parsed()) {
            cmd_report(report_inputs, report_out, out);
            return exit_ok;
        }
        for (auto& [name, s] : subs) {
            if (!s.app->parsed()) continue;
            KeyValues flags;
            for (const auto& [key, help] : config_keys()) {
                if (s.app->count("--" + key) > 0) flags[key] = s.values[key];
            }
            const KeyValues file = s.config_file.empty() ? KeyValues{} : read_config_file(s.config_file);
            const RunConfig cfg = build_config(file, flags);
            if (name == "embed") cmd_embed(cfg, out);
            if (name == "test") cmd_test(cfg, out);
            if (name == "sweep") cmd_sweep(cfg, out);
            if (name == "costs") cmd_costs(cfg, out);
            if (name == "simulate") cmd_simulate(cfg, out);
        }
        return exit_ok;
    } catch (const config_error& e) {
        err << "mhtest: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const capacity_error& e) {
        err << "mhtest: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const domain_error& e) {
        err << "mhtest: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const error& e) {
        err << "mhtest: input error: " << e.what() << '\n';
        return exit_input;
    }
}

}  // namespace mhtest::cli

#endif  // MHTEST_CLI_APP_HPP
