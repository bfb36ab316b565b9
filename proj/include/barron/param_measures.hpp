#pragma once

#include "barron/activations.hpp"
#include "barron/core.hpp"
#include "barron/group_actions.hpp"
#include "barron/shallow_net.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace barron {

/// One support point (a, w, b) of a parameter measure, carrying mass p.
struct Atom {
    double p = 0.0;
    double a = 0.0;
    Vector w;
    double b = 0.0;
};

/// Finitely supported probability measure on (a, w, b) in R^{d+2}.
struct DiscreteMeasure {
    int dim = 0;
    std::vector<Atom> atoms;

    /// Throws on negative mass, total mass off 1 by more than 1e-12, or ragged w.
    void validate() const;
};

DiscreteMeasure measure_from_json(const nlohmann::json& atoms, int dim);
nlohmann::json to_json(const DiscreteMeasure& measure);

/// sqrt(sum_j p_j |a_j|^2 (||w_j||_1 + |b_j| + 1)^2), the Barron norm of this
/// particular representation. The true norm is an infimum, so this bounds it from above.
double barron_norm_bound(const DiscreteMeasure& measure);

/// Replaces every atom by its |G| images (p/|G|, a, g^T w, b).
DiscreteMeasure symmetrize(const DiscreteMeasure& measure, const GroupAction& group);

/// m i.i.d. categorical draws over the atoms; draw i copies (a, w, b) of the chosen atom.
NetParams sample_atoms(const DiscreteMeasure& measure, int m, std::uint64_t seed);

/// f(x) = E_rho[a sigma(w . x + b)] for a discrete rho.
struct TargetFunction {
    DiscreteMeasure measure;
    Activation activation;
    double barron_bound = 0.0;
    std::optional<std::string> invariant_under;
};

/// Builds a target; when `group` is given the measure is symmetrized first and
/// the target is labelled invariant under it.
TargetFunction make_target(const DiscreteMeasure& measure, const Activation& act,
                           const GroupAction* group = nullptr);

double target_eval(const TargetFunction& target, const Vector& x);
Vector target_eval_many(const TargetFunction& target, std::span<const Vector> xs);

/// max over probes x and group elements g of |f(gx) - f(x)|, with probes uniform on [-1,1]^d.
double invariance_defect(const TargetFunction& target, const GroupAction& group, int n_probes,
                         std::uint64_t seed);

}  // namespace barron
