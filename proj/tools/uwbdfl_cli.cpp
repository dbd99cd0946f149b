// uwbdfl: simulate captures and run the energy-gap, presence and localization
// experiments on synthetic scenes.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "uwbdfl/config.hpp"
#include "uwbdfl/experiments.hpp"
#include "uwbdfl/output.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& opt, bool with_out)
{
    cmd->add_option("--config", opt.config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "root seed, overrides the config value");
    cmd->add_option("--override", opt.overrides, "KEY=VALUE with a dotted key, repeatable")->take_all();
    if (with_out) cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
}

uwbdfl::ExperimentConfig load(const Options& opt)
{
    auto overrides = opt.overrides;
    if (opt.seed) overrides.push_back("seed=" + std::to_string(*opt.seed));
    return uwbdfl::validate_config(opt.config, overrides);
}

void print_summary(const uwbdfl::RunReport& r, const std::string& out)
{
    using uwbdfl::format_number;
    if (r.energy_gap) {
        const auto& e = *r.energy_gap;
        std::cout << "displacement_m  E_empty_dB  E_presence_dB\n";
        for (const auto& row : e.rows)
            std::cout << format_number(row.displacement) << "  " << format_number(row.e_empty_db) << "  "
                      << format_number(row.e_presence_db) << '\n';
        std::cout << "min gap " << format_number(e.min_gap_db) << " dB; early range "
                  << format_number(e.early_range_db) << " dB; late range " << format_number(e.late_range_db)
                  << " dB\n";
    }
    for (const auto& v : r.presence)
        std::cout << v.name << ": " << v.score.hits << "/" << v.score.truths << " detected, " << v.score.misses
                  << " missed, " << v.score.false_alarms << " false alarms (" << v.kept << "/" << v.captures
                  << " captures kept)\n";
    if (r.localization) {
        const auto& l = *r.localization;
        std::cout << l.references << " reference receivers, " << l.links << " links, " << l.kept << "/"
                  << l.captures << " captures kept\n";
        for (const auto& row : l.rows)
            std::cout << row.position_id << ": error " << format_number(row.error) << " m\n";
        std::cout << "mean error " << format_number(l.mean_error) << " m\n";
    }
    if (!r.artifacts.empty()) std::cout << r.artifacts.size() << " files written to " << out << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UWB through-wall device-free localization on synthetic scenes"};
    app.require_subcommand(1);

    Options opt;
    auto* simulate = app.add_subcommand("simulate", "write raw CIR traces and per-capture features");
    auto* energy = app.add_subcommand("energy-gap", "empty vs link-line-presence early energy sweep");
    auto* presence = app.add_subcommand("presence", "moving-average presence detection with a swinging receiver");
    auto* localize = app.add_subcommand("localize", "mobile-receiver radio tomographic imaging");
    auto* validate = app.add_subcommand("validate", "check a config and print it fully resolved");
    for (auto* cmd : {simulate, energy, presence, localize}) add_common(cmd, opt, true);
    add_common(validate, opt, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    uwbdfl::ExperimentConfig cfg;
    try {
        cfg = load(opt);
    } catch (const uwbdfl::ConfigError& e) {
        std::cerr << opt.config << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << opt.config << ": " << e.what() << '\n';
        return kExitConfig;
    }

    if (validate->parsed()) {
        std::cout << uwbdfl::dump_config(cfg);
        return 0;
    }

    const std::pair<CLI::App*, uwbdfl::ExperimentKind> expected[] = {
        {energy, uwbdfl::ExperimentKind::energy_gap},
        {presence, uwbdfl::ExperimentKind::presence},
        {localize, uwbdfl::ExperimentKind::localization},
    };
    for (const auto& [cmd, kind] : expected)
        if (cmd->parsed() && cfg.kind != kind) {
            std::cerr << opt.config << ": kind is " << uwbdfl::to_string(cfg.kind) << ", but '" << cmd->get_name()
                      << "' needs kind " << uwbdfl::to_string(kind) << '\n';
            return kExitConfig;
        }

    try {
        const auto t0 = std::chrono::steady_clock::now();
        const uwbdfl::RunReport report =
            simulate->parsed() ? uwbdfl::run_simulate(cfg, opt.out) : uwbdfl::run_experiment(cfg, opt.out);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        print_summary(report, opt.out);
        std::cerr << "finished in " << uwbdfl::format_number(secs) << " s\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
