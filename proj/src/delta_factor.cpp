#include "barron/delta_factor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace barron {

namespace {

constexpr int kMinProbes = 1000;
constexpr int kMaxCornerDim = 16;

long long factorial(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

std::optional<double> ratio_at(const DiscreteMeasure& measure, const Activation& act,
                               const GroupAction& group, const Vector& x) {
    require_dim(x.size(), measure.dim, "ratio_at");
    require_dim(group.dim(), measure.dim, "ratio_at group");
    const std::vector<Vector> xs = orbit(group, x);
    const double inv_order = 1.0 / static_cast<double>(group.order());

    double num = 0.0;
    double den = 0.0;
    for (const auto& atom : measure.atoms) {
        double averaged = 0.0;
        for (const auto& gx : xs) averaged += act.eval(atom.w.dot(gx) + atom.b);
        averaged *= inv_order;
        // xs[0] is x itself since the identity comes first.
        const double plain = act.eval(atom.w.dot(xs.front()) + atom.b);
        num += atom.p * (atom.a * averaged) * (atom.a * averaged);
        den += atom.p * (atom.a * plain) * (atom.a * plain);
    }
    if (den < kDeltaDenominatorFloor) {
        // 0/0 carries no information. A live numerator over a dead denominator
        // means the orbit reaches mass the plain neuron never sees: unbounded.
        if (num < kDeltaDenominatorFloor) return std::nullopt;
        return std::numeric_limits<double>::infinity();
    }
    return num / den;
}

std::vector<Vector> boundary_probes(const DomainSpec& domain, int n_probes) {
    std::vector<Vector> out;
    switch (domain.kind) {
        case DomainKind::cube_pm1:
        case DomainKind::unit_cube: {
            if (domain.dim > kMaxCornerDim) break;
            const double lo = domain.kind == DomainKind::cube_pm1 ? -1.0 : 0.0;
            const unsigned n_corners = 1u << domain.dim;
            for (unsigned mask = 0; mask < n_corners; ++mask) {
                Vector c(domain.dim);
                for (int i = 0; i < domain.dim; ++i) c(i) = (mask >> i) & 1u ? 1.0 : lo;
                out.push_back(std::move(c));
            }
            break;
        }
        case DomainKind::unit_disk: {
            const auto side = static_cast<unsigned>(std::ceil(std::sqrt(static_cast<double>(n_probes))));
            const unsigned ring = std::max(4u, std::bit_floor(side));
            for (unsigned j = 0; j < ring; ++j) {
                const double theta = 2.0 * std::numbers::pi * j / ring;
                Vector p(2);
                p << std::cos(theta), std::sin(theta);
                out.push_back(std::move(p));
            }
            break;
        }
    }
    return out;
}

DeltaEstimate estimate_delta(std::span<const NamedMeasure> gamma, const Activation& act,
                             const GroupAction& group, const DomainSpec& domain, int n_probes,
                             std::uint64_t seed) {
    if (n_probes < kMinProbes) {
        throw DomainError("estimate_delta needs n_probes >= 1000, got " + std::to_string(n_probes));
    }
    if (gamma.empty()) throw DegenerateError("estimate_delta: empty measure family");
    require_dim(group.dim(), domain.dim, "estimate_delta group");
    for (const auto& named : gamma) {
        named.measure.validate();
        require_dim(named.measure.dim, domain.dim, "estimate_delta measure");
    }

    std::vector<Vector> probes = sample_domain(domain, n_probes, seed);
    for (auto& p : boundary_probes(domain, n_probes)) probes.push_back(std::move(p));

    DeltaEstimate est;
    est.n_probes = static_cast<int>(probes.size());
    bool found = false;
    for (const auto& x : probes) {
        for (const auto& named : gamma) {
            const auto r = ratio_at(named.measure, act, group, x);
            if (!r) {
                ++est.skipped_probes;
                continue;
            }
            if (!found || *r > est.delta_star) {
                est.delta_star = *r;
                est.argmax_x = x;
                est.argmax_measure = named.id;
                found = true;
            }
        }
    }
    if (!found) {
        throw DegenerateError("estimate_delta: every probe had vanishing moments");
    }
    est.delta = std::min(1.0, est.delta_star);
    return est;
}

bool apothem_criterion(const Vector& w, double b, int n) {
    require_dim(w.size(), 2, "apothem_criterion");
    if (n < 1) throw DomainError("apothem_criterion: n must be >= 1");
    const double norm = w.norm();
    if (norm == 0.0) throw DomainError("apothem_criterion: w must be nonzero");
    return -b / norm >= std::cos(std::numbers::pi / n);
}

long long subcube_orbit_count(std::span<const int> k) {
    const int d = static_cast<int>(k.size());
    if (d < 1 || d > 7) throw DomainError("subcube_orbit_count supports 1 <= d <= 7");
    std::map<int, int> multiplicity;
    for (int v : k) ++multiplicity[v];
    long long count = factorial(d);
    for (const auto& [value, mult] : multiplicity) count /= factorial(mult);
    return count;
}

}  // namespace barron
