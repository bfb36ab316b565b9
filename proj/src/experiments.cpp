#include "barron/experiments.hpp"

#include "barron/complexity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace barron {

namespace {

const char* const kVersion = "barron-sym 1.0.0";

// Schema checks. Every failure names the JSON pointer of the offending key.
class Schema {
public:
    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ConfigError((path.empty() ? "/" : path) + ": " + msg);
    }

    static void only_keys(const nlohmann::json& obj, const std::string& path,
                          std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) fail(path, "expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _] : obj.items()) {
            if (!ok.count(key)) fail(path + "/" + key, "unknown key");
        }
    }

    static const nlohmann::json& need(const nlohmann::json& obj, const std::string& path,
                                      const char* key) {
        if (!obj.contains(key)) fail(path + "/" + key, "missing required key");
        return obj.at(key);
    }

    static std::string str(const nlohmann::json& v, const std::string& path) {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    static long long integer(const nlohmann::json& v, const std::string& path, long long lo) {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        const auto x = v.get<long long>();
        if (x < lo) fail(path, "must be >= " + std::to_string(lo));
        return x;
    }

    static double positive(const nlohmann::json& v, const std::string& path) {
        if (!v.is_number()) fail(path, "expected a number");
        const double x = v.get<double>();
        if (!(x > 0.0) || !std::isfinite(x)) fail(path, "must be a positive finite number");
        return x;
    }

    static std::vector<int> int_list(const nlohmann::json& v, const std::string& path, long long lo) {
        if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
        std::vector<int> out;
        for (std::size_t k = 0; k < v.size(); ++k) {
            out.push_back(static_cast<int>(integer(v[k], path + "/" + std::to_string(k), lo)));
        }
        return out;
    }

    static std::vector<double> pos_list(const nlohmann::json& v, const std::string& path) {
        if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) {
            out.push_back(positive(v[k], path + "/" + std::to_string(k)));
        }
        return out;
    }
};

template <typename Fn>
auto parse_spec(const std::string& path, const std::string& spec, Fn&& fn) {
    try {
        return fn(spec);
    } catch (const Error& e) {
        Schema::fail(path, e.what());
    }
}

nlohmann::json atom(double p, double a, std::vector<double> w, double b) {
    return {{"p", p}, {"a", a}, {"w", std::move(w)}, {"b", b}};
}

nlohmann::json measure_entry(const char* id, bool sym, nlohmann::json atoms) {
    return {{"id", id}, {"symmetrize", sym}, {"atoms", std::move(atoms)}};
}

// Six disjoint-threshold neurons with alternating amplitudes, mirrored by the
// reflection. Richer than the two-atom pair, whose invariant average is exact.
nlohmann::json reflection_mixed_atoms() {
    const double a[] = {1.0, -0.8, 1.2, -1.0, 0.9, -1.1};
    const double w[] = {1.0, 1.5, 2.0, 0.75, 1.25, 1.75};
    const double b[] = {-0.5, -0.3, -0.8, -0.2, -0.6, -0.4};
    nlohmann::json atoms = nlohmann::json::array();
    for (int k = 0; k < 6; ++k) atoms.push_back(atom(1.0 / 6.0, a[k], {w[k]}, b[k]));
    return atoms;
}

nlohmann::json base_scenario(const char* id, const char* group, const char* act, const char* domain) {
    return {{"scenario", id}, {"group", group}, {"activation", act}, {"domain", domain}, {"seed", 20240607}};
}

std::string join_vector(const Vector& x) {
    std::string out = "[";
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (k) out += ' ';
        out += format_double(x(k));
    }
    return out + "]";
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }

nlohmann::json constants_json(const Activation& act) {
    nlohmann::json j{{"activation", act.spec()},
                     {"lipschitz", act.lipschitz()},
                     {"sigma0", act.value_at_zero()}};
    if (act.gamma()) j["gamma"] = *act.gamma();
    return j;
}

}  // namespace

const DiscreteMeasure& ScenarioConfig::measure(const std::string& id) const {
    for (const auto& m : measures) {
        if (m.id == id) return m.measure;
    }
    throw ConfigError("unknown measure id '" + id + "'");
}

TargetFunction ScenarioConfig::target() const {
    TargetFunction t = make_target(measure(target_id), activation());
    const GroupAction g = group();
    if (invariance_defect(t, g, 256, derive_seed(seed, 0x7A)) <= 1e-9) t.invariant_under = g.name();
    return t;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    using S = Schema;
    S::only_keys(j, "", {"scenario", "group", "activation", "domain", "seed", "measures", "target",
                         "delta", "approx_scaling", "rademacher", "generalize", "gamma0"});
    ScenarioConfig cfg;
    cfg.raw = j;
    cfg.id = S::str(S::need(j, "", "scenario"), "/scenario");
    cfg.group_spec = S::str(S::need(j, "", "group"), "/group");
    cfg.activation_spec = S::str(S::need(j, "", "activation"), "/activation");
    cfg.domain_spec = S::str(S::need(j, "", "domain"), "/domain");
    cfg.seed = static_cast<std::uint64_t>(S::integer(S::need(j, "", "seed"), "/seed", 0));

    const GroupAction group = parse_spec("/group", cfg.group_spec, [](const std::string& s) { return parse_group(s); });
    parse_spec("/activation", cfg.activation_spec, [](const std::string& s) { return Activation::parse(s); });
    const DomainSpec domain = parse_spec("/domain", cfg.domain_spec, [](const std::string& s) { return DomainSpec::parse(s); });
    if (group.dim() != domain.dim) S::fail("/group", "group dimension does not match the domain");

    const auto& measures = S::need(j, "", "measures");
    if (!measures.is_array() || measures.empty()) S::fail("/measures", "expected a non-empty array");
    for (std::size_t k = 0; k < measures.size(); ++k) {
        const std::string path = "/measures/" + std::to_string(k);
        const auto& m = measures[k];
        S::only_keys(m, path, {"id", "symmetrize", "atoms"});
        NamedMeasure named;
        named.id = S::str(S::need(m, path, "id"), path + "/id");
        for (const auto& prev : cfg.measures) {
            if (prev.id == named.id) S::fail(path + "/id", "duplicate measure id");
        }
        bool sym = false;
        if (m.contains("symmetrize")) {
            if (!m["symmetrize"].is_boolean()) S::fail(path + "/symmetrize", "expected a boolean");
            sym = m["symmetrize"].get<bool>();
        }
        try {
            named.measure = measure_from_json(S::need(m, path, "atoms"), domain.dim);
            named.measure.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            S::fail(path + "/atoms", e.what());
        } catch (const nlohmann::json::exception& e) {
            S::fail(path + "/atoms", e.what());
        }
        if (sym) named.measure = symmetrize(named.measure, group);
        cfg.measures.push_back(std::move(named));
    }
    cfg.target_id = j.contains("target") ? S::str(j["target"], "/target") : cfg.measures.front().id;
    bool found = false;
    for (const auto& m : cfg.measures) found = found || m.id == cfg.target_id;
    if (!found) S::fail("/target", "no measure with id '" + cfg.target_id + "'");

    if (j.contains("delta")) {
        const auto& d = j["delta"];
        S::only_keys(d, "/delta", {"n_probes"});
        if (d.contains("n_probes")) cfg.delta.n_probes = static_cast<int>(S::integer(d["n_probes"], "/delta/n_probes", 1000));
    }
    if (j.contains("approx_scaling")) {
        const auto& s = j["approx_scaling"];
        const std::string p = "/approx_scaling";
        S::only_keys(s, p, {"m_grid", "trials", "n_mc"});
        if (s.contains("m_grid")) cfg.scaling.m_grid = S::int_list(s["m_grid"], p + "/m_grid", 1);
        if (s.contains("trials")) cfg.scaling.trials = static_cast<int>(S::integer(s["trials"], p + "/trials", 1));
        if (s.contains("n_mc")) cfg.scaling.n_mc = static_cast<int>(S::integer(s["n_mc"], p + "/n_mc", 1000));
    }
    if (j.contains("rademacher")) {
        const auto& r = j["rademacher"];
        const std::string p = "/rademacher";
        S::only_keys(r, p, {"M_grid", "Q_grid", "n_sign_draws", "restarts", "ascent_steps"});
        if (r.contains("M_grid")) cfg.rademacher.M_grid = S::int_list(r["M_grid"], p + "/M_grid", 1);
        if (r.contains("Q_grid")) cfg.rademacher.Q_grid = S::pos_list(r["Q_grid"], p + "/Q_grid");
        if (r.contains("n_sign_draws")) cfg.rademacher.n_sign_draws = static_cast<int>(S::integer(r["n_sign_draws"], p + "/n_sign_draws", 1));
        if (r.contains("restarts")) cfg.rademacher.restarts = static_cast<int>(S::integer(r["restarts"], p + "/restarts", 0));
        if (r.contains("ascent_steps")) cfg.rademacher.ascent_steps = static_cast<int>(S::integer(r["ascent_steps"], p + "/ascent_steps", 0));
    }
    if (j.contains("generalize")) {
        const auto& g = j["generalize"];
        const std::string p = "/generalize";
        S::only_keys(g, p, {"m", "M_grid", "seeds", "n_test", "kappa", "delta_conf", "noise",
                            "iterations", "step_theory", "step_scaled", "init_scale"});
        auto& k = cfg.generalize;
        if (g.contains("m")) k.m = static_cast<int>(S::integer(g["m"], p + "/m", 1));
        if (g.contains("M_grid")) k.M_grid = S::int_list(g["M_grid"], p + "/M_grid", 1);
        if (g.contains("seeds")) k.seeds = static_cast<int>(S::integer(g["seeds"], p + "/seeds", 1));
        if (g.contains("n_test")) k.n_test = static_cast<int>(S::integer(g["n_test"], p + "/n_test", 1));
        if (g.contains("kappa")) k.kappa = S::positive(g["kappa"], p + "/kappa");
        if (g.contains("delta_conf")) {
            k.delta_conf = S::positive(g["delta_conf"], p + "/delta_conf");
            if (k.delta_conf >= 1.0) S::fail(p + "/delta_conf", "must be < 1");
        }
        if (g.contains("noise")) {
            const auto& n = g["noise"];
            S::only_keys(n, p + "/noise", {"kind", "tau"});
            const auto kind = S::str(S::need(n, p + "/noise", "kind"), p + "/noise/kind");
            if (kind == "none") {
                k.noise = NoiseSpec::none();
            } else if (kind == "uniform") {
                k.noise = NoiseSpec::uniform(S::positive(S::need(n, p + "/noise", "tau"), p + "/noise/tau"));
            } else {
                S::fail(p + "/noise/kind", "expected 'none' or 'uniform'");
            }
        }
        if (g.contains("iterations")) k.iterations = static_cast<int>(S::integer(g["iterations"], p + "/iterations", 1));
        if (g.contains("step_theory")) k.step_theory = S::positive(g["step_theory"], p + "/step_theory");
        if (g.contains("step_scaled")) k.step_scaled = S::positive(g["step_scaled"], p + "/step_scaled");
        if (g.contains("init_scale")) k.init_scale = S::positive(g["init_scale"], p + "/init_scale");
    }
    if (j.contains("gamma0")) {
        const auto& g = j["gamma0"];
        S::only_keys(g, "/gamma0", {"half_width", "n_points"});
        if (g.contains("half_width")) cfg.gamma0.half_width = S::positive(g["half_width"], "/gamma0/half_width");
        if (g.contains("n_points")) cfg.gamma0.n_points = static_cast<int>(S::integer(g["n_points"], "/gamma0/n_points", 2));
    }
    return cfg;
}

ScenarioConfig scenario_from_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports the byte offset; convert to line and column.
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    return scenario_from_json(j);
}

std::vector<std::string> builtin_names() {
    return {"reflection-disjoint", "reflection-overlap", "c4-corners", "cn-disk",
            "s2-bump-offdiag",     "s2-bump-diag",       "sd-bump"};
}

nlohmann::json builtin_scenario(std::string_view name) {
    using nlohmann::json;
    if (name == "reflection-disjoint" || name == "reflection-overlap") {
        const bool disjoint = name == "reflection-disjoint";
        const double b = disjoint ? -0.5 : 0.5;
        json s = base_scenario(disjoint ? "reflection-disjoint" : "reflection-overlap",
                               "reflection:1", "relu", "cube_pm1:1");
        json measures = json::array();
        measures.push_back(measure_entry("pair", false, json::array({atom(0.5, 1.0, {1.0}, b), atom(0.5, 1.0, {-1.0}, b)})));
        if (disjoint) {
            measures.push_back(measure_entry("mixed", true, reflection_mixed_atoms()));
            s["target"] = "mixed";
            // ||f||^2 is about 2e-3 against B^2 of about 9, so lambda / 100 still
            // pins the net to zero; 1e5 is where the fit starts to matter.
            s["generalize"] = {{"kappa", 1e5}};
        } else {
            s["target"] = "pair";
        }
        s["measures"] = std::move(measures);
        return s;
    }
    if (name == "c4-corners") {
        json s = base_scenario("c4-corners", "cyclic2d:4", "relu", "cube_pm1:2");
        json atoms = json::array();
        for (const auto& w : std::vector<std::vector<double>>{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
            atoms.push_back(atom(0.25, 1.0, w, -1.5));
        }
        s["measures"] = json::array({measure_entry("corners", false, std::move(atoms))});
        return s;
    }
    if (name == "cn-disk") {
        json s = base_scenario("cn-disk", "cyclic2d:6", "relu", "unit_disk");
        s["measures"] = json::array({measure_entry("rim", true, json::array({atom(1.0, 1.0, {1.0, 0.0}, -0.9)}))});
        return s;
    }
    if (name == "s2-bump-offdiag") {
        json s = base_scenario("s2-bump-offdiag", "symmetric:2", "bump:0.25", "unit_cube:2");
        s["measures"] = json::array({measure_entry(
            "offdiag", false,
            json::array({atom(0.5, 1.0, {-1.0, 1.0}, -0.75), atom(0.5, 1.0, {1.0, -1.0}, -0.75)}))});
        return s;
    }
    if (name == "s2-bump-diag") {
        json s = base_scenario("s2-bump-diag", "symmetric:2", "bump:0.25", "unit_cube:2");
        s["measures"] = json::array({measure_entry("diag", true, json::array({atom(1.0, 1.0, {1.0, 1.0}, -0.25)}))});
        return s;
    }
    if (name == "sd-bump") {
        json s = base_scenario("sd-bump", "symmetric:3", "bump:0.25", "unit_cube:3");
        s["measures"] = json::array({measure_entry("subcube", true, json::array({atom(1.0, 1.0, {-1.0, -1.0, 1.0}, -0.75)}))});
        return s;
    }
    throw ConfigError("unknown builtin scenario '" + std::string(name) + "'");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw ShapeError("CSV row width does not match the header");
    rows.push_back(std::move(row));
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    const auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out += ',';
            out += csv_escape(fields[k]);
        }
        out += "\r\n";
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        f.flush();
        if (!f) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string render_loglog_svg(const std::vector<PlotSeries>& series, const PlotAxes& axes) {
    std::size_t n_points = 0;
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ShapeError("plot series x and y differ in length");
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!(s.x[k] > 0.0) || !(s.y[k] > 0.0) || !std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            ++n_points;
            x_lo = std::min(x_lo, std::log10(s.x[k]));
            x_hi = std::max(x_hi, std::log10(s.x[k]));
            y_lo = std::min(y_lo, std::log10(s.y[k]));
            y_hi = std::max(y_hi, std::log10(s.y[k]));
        }
    }
    if (n_points < 2) throw DomainError("emit_plot needs at least 2 positive points");
    // Degenerate ranges get half a decade either side so nothing divides by zero.
    if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi - y_lo < 1e-12) { y_lo -= 0.5; y_hi += 0.5; }

    const double W = 640, H = 440, left = 80, right = 170, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    const auto px = [&](double x) { return left + (std::log10(x) - x_lo) / (x_hi - x_lo) * pw; };
    const auto py = [&](double y) { return top + (y_hi - std::log10(y)) / (y_hi - y_lo) * ph; };
    const auto esc = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
            }
        }
        return out;
    };
    const auto num = [](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
        return std::string(buf, res.ptr);
    };
    static const char* const colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << esc(axes.title) << "</text>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(x_lo - 1e-9)); e <= static_cast<int>(std::floor(x_hi + 1e-9)); ++e) {
        const double x = left + (e - x_lo) / (x_hi - x_lo) * pw;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << top + ph << "\" x2=\"" << num(x) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\" font-size=\"12\">1e"
            << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(y_lo - 1e-9)); e <= static_cast<int>(std::floor(y_hi + 1e-9)); ++e) {
        const double y = top + (y_hi - e) / (y_hi - y_lo) * ph;
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << left << "\" y2=\"" << num(y)
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"12\">1e"
            << e << "</text>\n";
    }
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << esc(axes.x_label) << "</text>\n"
        << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << num(top + ph / 2) << ")\">" << esc(axes.y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            const double x = series[s].x[k], y = series[s].y[k];
            if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
            out << (first ? "" : " ") << num(px(x)) << ',' << num(py(y));
            first = false;
        }
        out << "\"/>\n";
        const double ly = top + 16 + 20.0 * static_cast<double>(s);
        out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << num(ly) << "\" x2=\"" << left + pw + 36
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + pw + 42 << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
            << esc(series[s].label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void emit_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes,
               const std::filesystem::path& path) {
    write_file_atomic(path, render_loglog_svg(series, axes));
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

DeltaEstimate run_delta_estimate(const ScenarioConfig& cfg, std::uint64_t seed) {
    return estimate_delta(cfg.measures, cfg.activation(), cfg.group(), cfg.domain(),
                          cfg.delta.n_probes, derive_seed(seed, 1));
}

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
    nlohmann::json extra = nlohmann::json::object();
};

Artifacts do_delta(const ScenarioConfig& cfg, std::uint64_t seed) {
    const DeltaEstimate est = run_delta_estimate(cfg, seed);
    CsvTable t{{"scenario", "group", "activation", "n_probes", "delta_star", "delta", "argmax_x"}, {}};
    t.add_row({cfg.id, cfg.group_spec, cfg.activation_spec, fmt(est.n_probes), fmt(est.delta_star),
               fmt(est.delta), join_vector(est.argmax_x)});
    Artifacts a;
    a.files.emplace_back("delta.csv", to_csv(t));
    a.extra = {{"argmax_measure", est.argmax_measure}, {"skipped_probes", est.skipped_probes}};
    return a;
}

Artifacts do_scaling(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    const TargetFunction target = cfg.target();
    if (!target.invariant_under) throw DomainError("approx-scaling: target is not invariant under " + cfg.group_spec);
    const double delta_hat = run_delta_estimate(cfg, seed).delta;
    ScalingOptions so;
    so.m_grid = cfg.scaling.m_grid;
    so.trials = cfg.scaling.trials;
    so.n_mc = cfg.scaling.n_mc;
    so.jobs = opts.jobs;
    const ScalingReport rep = scaling_experiment(target, cfg.group(), cfg.domain(), so, derive_seed(seed, 2));

    CsvTable rows{{"m", "trial", "err_invariant", "err_plain", "path_norm_sq"}, {}};
    for (const auto& r : rep.rows) {
        rows.add_row({fmt(r.m), fmt(r.trial), fmt(r.err_invariant), fmt(r.err_plain), fmt(r.path_norm_sq)});
    }
    CsvTable summary{{"m", "mean_err_invariant", "mean_err_plain", "ratio", "paired_stderr", "delta_hat",
                      "slope_invariant", "slope_plain"},
                     {}};
    PlotSeries inv{"invariant", {}, {}}, pl{"plain", {}, {}};
    for (const auto& p : rep.per_m) {
        summary.add_row({fmt(p.m), fmt(p.mean_invariant), fmt(p.mean_plain), fmt(p.ratio), fmt(p.paired_stderr),
                         fmt(delta_hat), fmt(rep.slope_invariant), fmt(rep.slope_plain)});
        inv.x.push_back(p.m);
        inv.y.push_back(p.mean_invariant);
        pl.x.push_back(p.m);
        pl.y.push_back(p.mean_plain);
    }
    Artifacts a;
    a.files.emplace_back("approx_scaling.csv", to_csv(rows));
    a.files.emplace_back("approx_scaling_summary.csv", to_csv(summary));
    if (opts.svg) {
        a.files.emplace_back("approx_scaling.svg",
                             render_loglog_svg({inv, pl}, {cfg.id + ": L2 error of the sampled network",
                                                           "width m", "mean squared L2 error"}));
    }
    a.extra = {{"delta_hat", delta_hat}, {"slope_invariant", rep.slope_invariant}, {"slope_plain", rep.slope_plain}};
    return a;
}

Artifacts do_rademacher(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    const GroupAction group = cfg.group();
    const GroupAction plain = make_trivial(group.dim());
    const Activation act = cfg.activation();
    const DomainSpec domain = cfg.domain();
    RademacherOptions ro;
    ro.n_sign_draws = cfg.rademacher.n_sign_draws;
    ro.restarts = cfg.rademacher.restarts;
    ro.ascent_steps = cfg.rademacher.ascent_steps;
    ro.gamma = act.constants().gamma;
    ro.jobs = opts.jobs;

    CsvTable t{{"group", "d", "M", "Q", "estimate", "stderr", "bound"}, {}};
    for (int M : cfg.rademacher.M_grid) {
        const auto S = sample_domain(domain, M, derive_seed(seed, 3, static_cast<std::uint64_t>(M)));
        for (double Q : cfg.rademacher.Q_grid) {
            const std::uint64_t s = derive_seed(seed, 4, static_cast<std::uint64_t>(M));
            for (const GroupAction* g : {&group, &plain}) {
                if (g == &plain && group.is_trivial()) continue;
                const RademacherResult r = rademacher_invariant_neuron(S, *g, Q, ro, s);
                t.add_row({g->name(), fmt(domain.dim), fmt(M), fmt(Q), fmt(r.estimate), fmt(r.stderr_), fmt(r.bound)});
            }
        }
    }
    Artifacts a;
    a.files.emplace_back("rademacher.csv", to_csv(t));
    return a;
}

Artifacts do_generalize(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    const TargetFunction target = cfg.target();
    if (!target.invariant_under) throw DomainError("generalize: target is not invariant under " + cfg.group_spec);
    const auto& k = cfg.generalize;
    GeneralizationOptions go;
    go.m = k.m;
    go.M_grid = k.M_grid;
    go.seeds = k.seeds;
    go.n_test = k.n_test;
    go.kappa = k.kappa;
    go.delta_conf = k.delta_conf;
    go.delta_hat = run_delta_estimate(cfg, seed).delta;
    go.noise = k.noise;
    go.iterations = k.iterations;
    go.step_theory = k.step_theory;
    go.step_scaled = k.step_scaled;
    go.init_scale = k.init_scale;
    go.jobs = opts.jobs;
    const auto rows = generalization_experiment(target, cfg.group(), cfg.domain(), go, derive_seed(seed, 5));

    CsvTable t{{"M", "seed", "lambda_used", "lambda_kind", "err_invariant", "err_plain", "path_norm_invariant",
                "path_norm_plain"},
               {}};
    // (M, kind) -> aggregates
    struct Agg {
        double inv = 0, pl = 0, rhs_inv = 0, rhs_pl = 0, lambda = 0;
        int n = 0, inv_wins = 0;
    };
    std::map<std::pair<int, std::string>, Agg> agg;
    for (const auto& r : rows) {
        t.add_row({fmt(r.M), fmt(r.seed), fmt(r.lambda_used), r.lambda_kind, fmt(r.err_invariant), fmt(r.err_plain),
                   fmt(r.path_norm_invariant), fmt(r.path_norm_plain)});
        auto& g = agg[{r.M, r.lambda_kind}];
        g.inv += r.err_invariant;
        g.pl += r.err_plain;
        g.rhs_inv = r.rhs_invariant;
        g.rhs_pl = r.rhs_plain;
        g.lambda = r.lambda_used;
        g.n += 1;
        g.inv_wins += r.err_invariant <= r.err_plain ? 1 : 0;
    }
    CsvTable s{{"M", "lambda_kind", "lambda_used", "mean_err_invariant", "mean_err_plain", "invariant_win_rate",
                "bound_invariant", "bound_plain", "delta_hat", "tau0"},
               {}};
    for (const auto& [key, g] : agg) {
        s.add_row({fmt(key.first), key.second, fmt(g.lambda), fmt(g.inv / g.n), fmt(g.pl / g.n),
                   fmt(static_cast<double>(g.inv_wins) / g.n), fmt(g.rhs_inv), fmt(g.rhs_pl), fmt(go.delta_hat),
                   fmt(k.noise.second_moment())});
    }
    Artifacts a;
    a.files.emplace_back("generalize.csv", to_csv(t));
    a.files.emplace_back("generalize_summary.csv", to_csv(s));
    const TheoryConstants c = TheoryConstants::from(target.activation.constants(), target.barron_bound);
    a.extra = {{"delta_hat", go.delta_hat},
               {"theory", {{"B", c.B}, {"C1", c.C1}, {"C_sigma", c.C_sigma}, {"D_sigma", c.D_sigma},
                           {"C_zeta", c.C_zeta}, {"Lambda_f", c.Lambda_f(k.delta_conf)}, {"R_f", c.R_f(k.delta_conf)}}}};
    return a;
}

Artifacts do_gamma0(const ScenarioConfig& cfg) {
    const Activation act = cfg.activation();
    CsvTable t{{"activation", "lipschitz", "sigma0", "gamma", "gamma0", "half_width", "n_points"}, {}};
    std::string g0 = "";
    if (!act.piecewise_linear()) g0 = fmt(estimate_gamma0(act, cfg.gamma0.half_width, cfg.gamma0.n_points));
    t.add_row({act.spec(), fmt(act.lipschitz()), fmt(act.value_at_zero()), fmt(act.constants().gamma), g0,
               fmt(cfg.gamma0.half_width), fmt(cfg.gamma0.n_points)});
    Artifacts a;
    a.files.emplace_back("gamma0.csv", to_csv(t));
    return a;
}

}  // namespace

RunOutput run_subcommand(const std::string& subcommand, const ScenarioConfig& cfg_in, const RunOptions& opts) {
    ScenarioConfig cfg = cfg_in;
    std::string seed_source = "config";
    if (opts.seed_override) {
        cfg.seed = *opts.seed_override;
        cfg.raw["seed"] = cfg.seed;
        seed_source = "BARRON_SYM_SEED";
    }
    Artifacts art;
    if (subcommand == "delta") {
        art = do_delta(cfg, cfg.seed);
    } else if (subcommand == "approx-scaling") {
        art = do_scaling(cfg, cfg.seed, opts);
    } else if (subcommand == "rademacher") {
        art = do_rademacher(cfg, cfg.seed, opts);
    } else if (subcommand == "generalize") {
        art = do_generalize(cfg, cfg.seed, opts);
    } else if (subcommand == "gamma0") {
        art = do_gamma0(cfg);
    } else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }

    // Everything is computed before anything is written.
    std::filesystem::create_directories(opts.out_dir);
    RunOutput out;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, contents] : art.files) {
        const auto path = opts.out_dir / name;
        write_file_atomic(path, contents);
        out.files.push_back(path);
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(contents)));
        files.push_back({{"name", name}, {"fnv1a64", hash}});
    }
    const std::string canonical = cfg.raw.dump();
    char cfg_hash[17];
    std::snprintf(cfg_hash, sizeof cfg_hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    const nlohmann::json manifest{{"tool", kVersion},
                                  {"subcommand", subcommand},
                                  {"scenario", cfg.id},
                                  {"config_hash", cfg_hash},
                                  {"seed", cfg.seed},
                                  {"seed_source", seed_source},
                                  {"group", cfg.group_spec},
                                  {"domain", cfg.domain_spec},
                                  {"constants", constants_json(cfg.activation())},
                                  {"outputs", files},
                                  {"details", art.extra},
                                  {"config", cfg.raw}};
    const auto mpath = opts.out_dir / (subcommand + "_manifest.json");
    write_file_atomic(mpath, manifest.dump(2) + "\n");
    out.files.push_back(mpath);
    return out;
}

}  // namespace barron
