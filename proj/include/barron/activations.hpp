#pragma once

#include "barron/core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace barron {

enum class ActivationKind {
    relu,
    leaky_relu,
    hard_sigmoid,
    hard_tanh,
    sigmoid,
    tanh,
    softplus,
    silu,
    gelu,
    bump,
};

struct ActivationConstants {
    double lipschitz;
    double value_at_zero;
    double gamma;
};

/// One ReLU term a * ReLU(w x + b) of an exact piecewise-linear representation.
struct ReluTerm {
    double a;
    double w;
    double b;
};

/// Exact ReLU expansion sigma(x) = offset + sum_k a_k ReLU(w_k x + b_k).
struct ReluRepresentation {
    std::vector<ReluTerm> terms;
    double offset = 0.0;

    double operator()(double x) const;
    /// sum_k |a_k| (|w_k| + |b_k|)
    double weighted_norm() const;
};

/// Activation descriptor: evaluator, derivative and the constants L, sigma(0), gamma.
///
/// gamma is exact for the piecewise-linear kinds. For smooth kinds it stays
/// empty until with_gamma0() fills it from the quadrature estimate.
class Activation {
public:
    static Activation relu();
    static Activation leaky_relu(double slope);
    static Activation hard_sigmoid();
    static Activation hard_tanh();
    static Activation sigmoid();
    static Activation tanh();
    static Activation softplus();
    static Activation silu();
    static Activation gelu();
    static Activation bump(double half_width);

    /// "relu", "leaky_relu:0.1", "bump:0.25", ... Smooth kinds come back with
    /// gamma populated from estimate_gamma0 at the default resolution.
    static Activation parse(std::string_view spec);

    ActivationKind kind() const { return kind_; }
    double param() const { return param_; }
    std::string spec() const;

    bool piecewise_linear() const;
    /// Points where the derivative jumps.
    std::vector<double> kinks() const;
    bool monotone_increasing() const;

    double eval(double x) const;
    /// Right-derivative at kinks.
    double deriv(double x) const;
    /// Analytic second derivative; only defined for the smooth kinds.
    double second_deriv(double x) const;

    /// Elementwise, skipping the NaN guard. Inputs come from finite parameters.
    void eval_inplace(Eigen::Ref<Eigen::ArrayXXd> z) const;
    void deriv_inplace(Eigen::Ref<Eigen::ArrayXXd> z) const;

    double lipschitz() const { return lipschitz_; }
    double value_at_zero() const { return value_at_zero_; }
    std::optional<double> gamma() const { return gamma_; }

    /// Throws MissingConstantError if gamma was never populated.
    ActivationConstants constants() const;

    /// The exact ReLU expansion behind gamma for piecewise-linear kinds.
    ReluRepresentation relu_representation() const;

    /// Copy with gamma set to the gamma0 quadrature estimate.
    Activation with_gamma0(double half_width = 40.0, int n_points = 200000) const;

private:
    Activation(ActivationKind kind, double param, double lipschitz, double value_at_zero,
               std::optional<double> gamma);

    ActivationKind kind_;
    double param_ = 0.0;
    double lipschitz_;
    double value_at_zero_;
    std::optional<double> gamma_;
};

/// Composite Simpson estimate of the integral of |sigma''(x)| (|x| + 1) over
/// [-half_width, half_width]. Throws NotApplicableError for piecewise-linear kinds.
double estimate_gamma0(const Activation& act, double half_width, int n_points);

}  // namespace barron
