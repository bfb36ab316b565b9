#pragma once

#include "barron/activations.hpp"
#include "barron/data_gen.hpp"
#include "barron/delta_factor.hpp"
#include "barron/erm_trainer.hpp"
#include "barron/group_actions.hpp"
#include "barron/param_measures.hpp"
#include "barron/sampling_construction.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace barron {

struct DeltaKnobs {
    int n_probes = 10000;
};

struct ScalingKnobs {
    std::vector<int> m_grid{16, 32, 64, 128, 256, 512, 1024};
    int trials = 30;
    int n_mc = 20000;
};

struct RademacherKnobs {
    std::vector<int> M_grid{32, 128};
    std::vector<double> Q_grid{1.0, 4.0};
    int n_sign_draws = 256;
    int restarts = 16;
    int ascent_steps = 200;
};

struct GeneralizeKnobs {
    int m = 32;
    std::vector<int> M_grid{64, 256, 1024};
    int seeds = 10;
    int n_test = 20000;
    double kappa = 100.0;
    double delta_conf = 0.1;
    NoiseSpec noise = NoiseSpec::uniform(0.05);
    int iterations = 2000;
    double step_theory = 0.01;
    double step_scaled = 4.0;
    double init_scale = 1.0;
};

struct Gamma0Knobs {
    double half_width = 40.0;
    int n_points = 200000;
};

/// Parsed and validated scenario. Measures are stored after optional symmetrization.
struct ScenarioConfig {
    std::string id;
    std::string group_spec;
    std::string activation_spec;
    std::string domain_spec;
    std::uint64_t seed = 0;
    std::vector<NamedMeasure> measures;
    std::string target_id;
    DeltaKnobs delta;
    ScalingKnobs scaling;
    RademacherKnobs rademacher;
    GeneralizeKnobs generalize;
    Gamma0Knobs gamma0;
    nlohmann::json raw;  // the validated input, seed override applied

    GroupAction group() const { return parse_group(group_spec); }
    Activation activation() const { return Activation::parse(activation_spec); }
    DomainSpec domain() const { return DomainSpec::parse(domain_spec); }
    const DiscreteMeasure& measure(const std::string& id) const;
    TargetFunction target() const;
};

/// Validates against the schema. Errors are ConfigError with a JSON pointer to the bad key.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Parses text, then validates; parse errors carry the line and column.
ScenarioConfig scenario_from_text(std::string_view text);

std::vector<std::string> builtin_names();
/// Throws ConfigError for an unknown name.
nlohmann::json builtin_scenario(std::string_view name);

/// Shortest round-trip decimal, so identical doubles always print identically.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
};

/// RFC 4180 quoting of one field.
std::string csv_escape(std::string_view field);
std::string to_csv(const CsvTable& table);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotAxes {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Log-log line plot as SVG text. Non-positive points are dropped.
std::string render_loglog_svg(const std::vector<PlotSeries>& series, const PlotAxes& axes);
void emit_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes,
               const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool svg = false;
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

struct RunOutput {
    std::vector<std::filesystem::path> files;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"delta", "approx-scaling", "rademacher",
                                                "generalize", "gamma0"};
    return names;
}

/// Runs one subcommand and writes its CSVs, optional SVG and a manifest.
RunOutput run_subcommand(const std::string& subcommand, const ScenarioConfig& cfg,
                         const RunOptions& opts);

}  // namespace barron
