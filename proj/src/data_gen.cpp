#include "barron/data_gen.hpp"

#include <charconv>
#include <cmath>

namespace barron {

DomainSpec DomainSpec::cube_pm1(int d) {
    if (d < 1) throw DomainError("domain dimension must be >= 1");
    return {DomainKind::cube_pm1, d};
}

DomainSpec DomainSpec::unit_cube(int d) {
    if (d < 1) throw DomainError("domain dimension must be >= 1");
    return {DomainKind::unit_cube, d};
}

DomainSpec DomainSpec::unit_disk() { return {DomainKind::unit_disk, 2}; }

DomainSpec DomainSpec::parse(std::string_view spec) {
    if (spec == "unit_disk") return unit_disk();
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("domain spec '" + std::string(spec) + "' must be unit_disk or kind:d");
    }
    const auto kind = spec.substr(0, colon);
    const auto arg = spec.substr(colon + 1);
    int d = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), d);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || d < 1) {
        throw ConfigError("bad dimension in domain spec '" + std::string(spec) + "'");
    }
    if (kind == "cube_pm1") return cube_pm1(d);
    if (kind == "unit_cube") return unit_cube(d);
    throw ConfigError("unknown domain kind '" + std::string(kind) + "'");
}

std::string DomainSpec::spec() const {
    switch (kind) {
        case DomainKind::cube_pm1: return "cube_pm1:" + std::to_string(dim);
        case DomainKind::unit_cube: return "unit_cube:" + std::to_string(dim);
        case DomainKind::unit_disk: return "unit_disk";
    }
    return "unknown";
}

bool DomainSpec::contains(const Vector& x, double tol) const {
    if (x.size() != dim) return false;
    switch (kind) {
        case DomainKind::cube_pm1: return x.cwiseAbs().maxCoeff() <= 1.0 + tol;
        case DomainKind::unit_cube: return x.minCoeff() >= -tol && x.maxCoeff() <= 1.0 + tol;
        case DomainKind::unit_disk: return x.norm() <= 1.0 + tol;
    }
    return false;
}

std::vector<Vector> sample_domain(const DomainSpec& domain, int n, std::uint64_t seed) {
    if (n < 1) throw DomainError("sample_domain: n must be >= 1");
    Rng rng(seed);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(n));
    Vector x(domain.dim);
    while (static_cast<int>(out.size()) < n) {
        switch (domain.kind) {
            case DomainKind::cube_pm1:
                for (int c = 0; c < domain.dim; ++c) x(c) = uniform(rng, -1.0, 1.0);
                break;
            case DomainKind::unit_cube:
                for (int c = 0; c < domain.dim; ++c) x(c) = uniform01(rng);
                break;
            case DomainKind::unit_disk:
                x(0) = uniform(rng, -1.0, 1.0);
                x(1) = uniform(rng, -1.0, 1.0);
                if (x.squaredNorm() > 1.0) continue;
                break;
        }
        out.push_back(x);
    }
    return out;
}

double NoiseSpec::second_moment() const {
    return kind == NoiseKind::uniform ? tau * tau / 3.0 : 0.0;
}

Dataset make_dataset(const TargetFunction& target, const DomainSpec& domain, int M,
                     const NoiseSpec& noise, std::uint64_t seed) {
    if (M < 1) throw DomainError("make_dataset: M must be >= 1");
    require_dim(domain.dim, target.measure.dim, "make_dataset");
    if (noise.kind == NoiseKind::uniform && !(noise.tau > 0.0)) {
        throw DomainError("uniform noise needs tau > 0");
    }
    Dataset data;
    data.dim = domain.dim;
    data.xs = sample_domain(domain, M, derive_seed(seed, 1));
    data.noise = noise;
    data.tau0 = noise.second_moment();

    const Vector clean = target_eval_many(target, data.xs);
    Rng rng(derive_seed(seed, 2));
    data.ys.resize(data.xs.size());
    for (std::size_t k = 0; k < data.xs.size(); ++k) {
        double eps = 0.0;
        if (noise.kind == NoiseKind::uniform) eps = uniform(rng, -noise.tau, noise.tau);
        data.ys[k] = clean(static_cast<Eigen::Index>(k)) + eps;
    }
    return data;
}

nlohmann::json to_json(const Dataset& data) {
    nlohmann::json xs = nlohmann::json::array();
    for (const auto& x : data.xs) xs.push_back(std::vector<double>(x.begin(), x.end()));
    nlohmann::json noise = data.noise.kind == NoiseKind::uniform
                               ? nlohmann::json{{"kind", "uniform"}, {"tau", data.noise.tau}}
                               : nlohmann::json{{"kind", "none"}, {"tau", 0.0}};
    return {{"d", data.dim},     {"M", data.xs.size()}, {"xs", std::move(xs)},
            {"ys", data.ys},     {"noise", std::move(noise)}, {"tau0", data.tau0}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset data;
    data.dim = j.at("d").get<int>();
    const auto M = j.at("M").get<std::size_t>();
    for (const auto& row : j.at("xs")) {
        const auto v = row.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != data.dim) throw ShapeError("dataset JSON: x has wrong dimension");
        data.xs.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    data.ys = j.at("ys").get<std::vector<double>>();
    if (data.xs.size() != M || data.ys.size() != M) throw ShapeError("dataset JSON: M mismatch");
    const auto& noise = j.at("noise");
    const auto kind = noise.at("kind").get<std::string>();
    if (kind == "uniform") {
        data.noise = NoiseSpec::uniform(noise.at("tau").get<double>());
    } else if (kind != "none") {
        throw ConfigError("dataset JSON: unknown noise kind '" + kind + "'");
    }
    data.tau0 = j.at("tau0").get<double>();
    return data;
}

}  // namespace barron
