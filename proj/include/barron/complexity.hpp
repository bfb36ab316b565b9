#pragma once

#include "barron/core.hpp"
#include "barron/group_actions.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace barron {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// (1/M) E_xi ||sum_i xi_i x_i||_inf by Monte Carlo over n_sign_draws sign vectors.
McEstimate rademacher_linear(std::span<const Vector> S, int n_sign_draws, std::uint64_t seed);

/// Same quantity with all 2^M sign patterns enumerated (M <= 24).
double rademacher_linear_exact(std::span<const Vector> S);

/// max_i ||x_i||_inf * sqrt(2 log(2d) / M)
double linear_rademacher_bound(std::span<const Vector> S);

/// 4 gamma Q sqrt(log(2d+2) / M)
double rademacher_bound(double Q, int d, int M, double gamma);

struct RademacherOptions {
    int n_sign_draws = 256;
    int restarts = 16;  // half start at l1 vertices, half in the interior
    int ascent_steps = 200;
    double gamma = 1.0;  // gamma of the activation, used only for the bound
    int jobs = 1;
};

struct RademacherResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
    int n_sign_draws = 0;
    int ascent_restarts = 0;
};

/// Euclidean projection onto {u : ||u||_1 <= radius}.
Vector project_l1_ball(const Vector& v, double radius = 1.0);

/// Sum_i xi_i (1/|G|) sum_g ReLU(u . g x~_i) with x~ = (x, 1) and G acting on
/// the first d coordinates.
class InvariantNeuronObjective {
public:
    InvariantNeuronObjective(std::span<const Vector> S, const GroupAction& group);

    int padded_dim() const { return static_cast<int>(points_.rows()); }
    int n_samples() const { return n_samples_; }

    double value(const Vector& u, std::span<const double> xi) const;
    /// A subgradient (indicator of a strictly positive pre-activation).
    Vector subgradient(const Vector& u, std::span<const double> xi) const;

    /// Max over the l1 ball. Exact by arrangement enumeration when the instance
    /// is small; otherwise projected subgradient ascent from `restarts` starts,
    /// every vertex, and an active-set polish of the best point.
    double maximize(std::span<const double> xi, int restarts, int ascent_steps,
                    std::uint64_t seed) const;

    /// Max over the 2(d+1) vertices +-e_k.
    double vertex_max(std::span<const double> xi) const;

    /// Exact max over the vertices of the kink arrangement on the l1 sphere, or
    /// nullopt when there are too many of them to enumerate.
    std::optional<double> arrangement_max(std::span<const double> xi) const;

private:
    double polish(const Vector& u, std::span<const double> xi) const;

    Eigen::MatrixXd points_;  // (d+1) x (M |G|); column i*|G|+s is g_s x~_i
    int n_samples_ = 0;
    std::size_t group_order_ = 1;
};

/// (2Q/M) E_xi sup_{||u||_1 <= 1} Sum_i xi_i GReLU(u . x~_i), with the closed-form bound.
RademacherResult rademacher_invariant_neuron(std::span<const Vector> S, const GroupAction& group,
                                             double Q, const RademacherOptions& opts,
                                             std::uint64_t seed);

struct ContractionCheck {
    double lhs = 0.0;  // E_xi max_u sum_i xi_i h(u . g_1 x~_i, ..., u . g_|G| x~_i)
    double rhs = 0.0;  // E_xi' max_u sum_{i,s} xi'_{is} u . g_s x~_i
    double factor = 0.0;  // sqrt(2) / sqrt(|G|)
    bool holds = false;
};

/// Exhaustive check of the vector contraction inequality on the l1-vertex family.
/// Requires M |G| <= 24 so both sign sets can be enumerated.
ContractionCheck vector_contraction_check(std::span<const Vector> S, const GroupAction& group);

}  // namespace barron
