// barron-sym: scenario runner for the invariant Barron experiments.
#include "barron/experiments.hpp"
#include "barron/runtime.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// A --config value is a file path, or the name of a builtin scenario.
barron::ScenarioConfig load_config(const std::string& arg) {
    std::ifstream f(arg);
    if (f) {
        std::stringstream ss;
        ss << f.rdbuf();
        return barron::scenario_from_text(ss.str());
    }
    std::string name = arg;
    if (name.rfind("builtin:", 0) == 0) name = name.substr(8);
    for (const auto& b : barron::builtin_names()) {
        if (b == name) return barron::scenario_from_json(barron::builtin_scenario(name));
    }
    throw barron::ConfigError("cannot read config '" + arg + "' (not a file or builtin scenario)");
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("BARRON_SYM_SEED");
    if (!v || !*v) return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view s(v);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw barron::ConfigError("BARRON_SYM_SEED must be an unsigned integer, got '" + std::string(s) + "'");
    }
    return seed;
}

}  // namespace

int main(int argc, char** argv) {
    barron::configure_allocator();
    CLI::App app{"Group-invariant Barron network experiments"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    bool svg = false;
    int jobs = 1;
    for (const auto& name : barron::subcommands()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config, "scenario JSON file or builtin scenario name")->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_flag("--svg", svg, "also write an SVG plot where one exists");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    }
    std::string show;
    auto* builtins = app.add_subcommand("builtins", "list builtin scenarios, or print one as JSON");
    builtins->add_option("name", show, "scenario to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (builtins->parsed()) {
            if (show.empty()) {
                for (const auto& n : barron::builtin_names()) std::cout << n << '\n';
            } else {
                std::cout << barron::builtin_scenario(show).dump(2) << '\n';
            }
            return 0;
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        const barron::ScenarioConfig cfg = load_config(config);
        barron::RunOptions opts;
        opts.out_dir = out_dir;
        opts.svg = svg;
        opts.jobs = jobs;
        opts.seed_override = env_seed();
        const auto out = barron::run_subcommand(sub, cfg, opts);
        for (const auto& p : out.files) std::cout << p.string() << '\n';
        return 0;
    } catch (const barron::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
