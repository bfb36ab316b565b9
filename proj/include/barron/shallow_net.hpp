#pragma once

#include "barron/activations.hpp"
#include "barron/core.hpp"
#include "barron/group_actions.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace barron {

/// Width-m two-layer network parameters. Row i of `w` is the inner weight w_i.
struct NetParams {
    Vector a;
    Matrix w;
    Vector b;

    NetParams() = default;
    NetParams(Vector a_, Matrix w_, Vector b_);

    static NetParams zeros(int width, int dim);

    int width() const { return static_cast<int>(a.size()); }
    int dim() const { return static_cast<int>(w.cols()); }

    /// Throws ShapeError unless a, w, b agree on the width.
    void validate() const;
};

nlohmann::json to_json(const NetParams& params);
NetParams net_params_from_json(const nlohmann::json& j);

/// Input points stacked with their group orbits, ready for batched evaluation.
///
/// Column k * |G| + s of `points` holds g_s x_k.
struct OrbitBatch {
    Eigen::MatrixXd points;
    std::size_t n_points = 0;
    std::size_t group_order = 1;
};

OrbitBatch make_orbit_batch(const GroupAction& group, std::span<const Vector> xs);

/// f_m(x) = (1/m) sum_i a_i sigma(w_i . x + b_i)
double forward(const NetParams& params, const Activation& act, const Vector& x);

/// f_m^G(x) = (1/(m|G|)) sum_i a_i sum_g sigma(w_i . g x + b_i)
double forward_invariant(const NetParams& params, const Activation& act,
                         const GroupAction& group, const Vector& x);

/// Group-averaged outputs for every point of the batch.
Vector forward_batch(const NetParams& params, const Activation& act, const OrbitBatch& batch);

/// Chunked batch evaluation for large point sets.
Vector forward_many(const NetParams& params, const Activation& act, const GroupAction& group,
                    std::span<const Vector> xs);

/// sqrt((1/m) sum_i (|a_i| (||w_i||_1 + |b_i| + 1))^2)
double path_norm(const NetParams& params);

struct ObjectiveValue {
    double loss = 0.0;       // mean squared error on the batch
    double objective = 0.0;  // loss + lambda (path_norm^2 + 1)
};

/// J_lambda at theta over a prepared batch.
ObjectiveValue objective(const NetParams& params, const Activation& act, const OrbitBatch& batch,
                         std::span<const double> ys, double lambda);

/// J_lambda and its gradient. The l1 part of the path norm uses sign(0) = 0.
ObjectiveValue objective_and_gradient(const NetParams& params, const Activation& act,
                                      const OrbitBatch& batch, std::span<const double> ys,
                                      double lambda, NetParams& grad);

/// Gradient of J_lambda(theta) = (1/M) sum (f^G(x_k) - y_k)^2 + lambda (||theta||_P^2 + 1).
NetParams grad_objective(const NetParams& params, const Activation& act,
                         const GroupAction& group, std::span<const Vector> xs,
                         std::span<const double> ys, double lambda);

}  // namespace barron
