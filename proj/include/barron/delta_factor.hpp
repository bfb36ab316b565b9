#pragma once

#include "barron/activations.hpp"
#include "barron/data_gen.hpp"
#include "barron/group_actions.hpp"
#include "barron/param_measures.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace barron {

/// Second moments below this count as zero.
inline constexpr double kDeltaDenominatorFloor = 1e-14;

/// A member of the measure family Gamma, addressed by its config id.
struct NamedMeasure {
    std::string id;
    DiscreteMeasure measure;
};

struct DeltaEstimate {
    double delta = 1.0;       // min(1, delta_star)
    double delta_star = 0.0;  // largest observed ratio, +inf if unbounded
    Vector argmax_x;
    std::string argmax_measure;
    int n_probes = 0;         // probes evaluated, uniform plus boundary
    int skipped_probes = 0;   // (probe, measure) pairs where both moments vanish
};

/// E_rho[(a G sigma(w.x+b))^2] / E_rho[(a sigma(w.x+b))^2]. When the denominator
/// is below kDeltaDenominatorFloor: nullopt if the numerator is too, else +inf.
std::optional<double> ratio_at(const DiscreteMeasure& measure, const Activation& act,
                               const GroupAction& group, const Vector& x);

/// Deterministic boundary probes: all corners of a cube, or a power-of-two
/// resolution ring on the disk (so a larger probe budget yields a superset).
std::vector<Vector> boundary_probes(const DomainSpec& domain, int n_probes);

/// Sup of ratio_at over Gamma x (uniform probes plus boundary probes).
DeltaEstimate estimate_delta(std::span<const NamedMeasure> gamma, const Activation& act,
                             const GroupAction& group, const DomainSpec& domain, int n_probes,
                             std::uint64_t seed);

/// True iff -b / ||w||_2 >= cos(pi / n): the rotated positive half-planes of
/// w.x + b under C_n are then pairwise disjoint on the unit disk.
bool apothem_criterion(const Vector& w, double b, int n);

/// Number of distinct images of the index tuple k under S_d,
/// d! / prod_v mult(v)! over the distinct values v of k.
long long subcube_orbit_count(std::span<const int> k);

}  // namespace barron
