#pragma once

#include "barron/core.hpp"
#include "barron/param_measures.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace barron {

enum class DomainKind { cube_pm1, unit_cube, unit_disk };

/// Input domain with its uniform sampling measure. Always inside the unit l_inf ball.
struct DomainSpec {
    DomainKind kind = DomainKind::cube_pm1;
    int dim = 1;

    static DomainSpec cube_pm1(int d);
    static DomainSpec unit_cube(int d);
    static DomainSpec unit_disk();

    /// "cube_pm1:d", "unit_cube:d" or "unit_disk".
    static DomainSpec parse(std::string_view spec);
    std::string spec() const;

    bool contains(const Vector& x, double tol = 0.0) const;
};

/// n i.i.d. uniform points; the disk uses rejection from [-1,1]^2.
std::vector<Vector> sample_domain(const DomainSpec& domain, int n, std::uint64_t seed);

enum class NoiseKind { none, uniform };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double tau = 0.0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec uniform(double tau) { return {NoiseKind::uniform, tau}; }

    /// E[eps^2]: 0 without noise, tau^2 / 3 for uniform(-tau, tau).
    double second_moment() const;
};

/// Noisy samples y = f(x) + eps with bounded, mean-zero, x-independent noise.
struct Dataset {
    int dim = 0;
    std::vector<Vector> xs;
    std::vector<double> ys;
    NoiseSpec noise;
    double tau0 = 0.0;

    std::size_t size() const { return xs.size(); }
};

Dataset make_dataset(const TargetFunction& target, const DomainSpec& domain, int M,
                     const NoiseSpec& noise, std::uint64_t seed);

nlohmann::json to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

}  // namespace barron
