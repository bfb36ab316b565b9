#pragma once

#include "barron/activations.hpp"
#include "barron/data_gen.hpp"
#include "barron/group_actions.hpp"
#include "barron/param_measures.hpp"
#include "barron/shallow_net.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace barron {

/// Constants of the generalization bound, all derived from (L, sigma(0), gamma, B).
struct TheoryConstants {
    double L_sigma = 0.0;
    double sigma0 = 0.0;
    double gamma = 0.0;
    double B = 0.0;
    double C1 = 0.0;       // (L + |sigma0|)(B + 1) + 1
    double C_sigma = 0.0;  // max{8 gamma C1, 3 C1^2}
    double D_sigma = 0.0;  // 4 C_sigma
    double C_zeta = 0.0;   // pi^2 / 6

    static TheoryConstants from(const ActivationConstants& act, double barron_bound);

    /// sqrt(2 log(2 C_zeta (sqrt(2) B + 1)^2 / delta_conf)) + 2
    double Lambda_f(double delta_conf) const;
    /// 1 + (2 B^2 + 1) Lambda_f
    double R_f(double delta_conf) const;
};

/// max{D_sigma sqrt(log(2d+2)/M), 3 (L + |sigma0|)^2 delta_hat B^2 / m}
double lambda_min(const TheoryConstants& c, int d, int M, int m, double delta_hat);

/// Right-hand side of the high-probability bound on the L2 test error.
double generalization_bound(const TheoryConstants& c, int M, int m, double delta_hat, double lambda,
                   double tau0, double delta_conf);

struct TrainConfig {
    int m = 32;
    double lambda = 0.0;
    double step_size = 0.1;
    int iterations = 2000;
    double init_scale = 1.0;
    std::uint64_t seed = 0;
};

struct TrainResult {
    NetParams params;
    std::vector<double> trace;  // J_lambda before each step, then the final value
    double final_loss = 0.0;
    double final_objective = 0.0;

    /// Fraction of steps where J_lambda did not increase.
    double monotone_fraction() const;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

/// Gaussian init: a ~ N(0, s^2), w and b ~ N(0, s^2 / d).
NetParams init_params(int m, int d, double init_scale, std::uint64_t seed);

/// Full-batch gradient descent on J_lambda with a fixed step.
TrainResult train(const Dataset& data, const Activation& act, const GroupAction& group,
                  const TrainConfig& cfg);

/// min(step, m / (2 lambda max_i k_i^2)) with k_i = s_i + sqrt(d+1) |a_i|,
/// s_i = ||w_i||_1 + |b_i| + 1, all at init.
/// Past that bound the path-norm term alone makes gradient descent blow up.
double stable_step(double step, double lambda, const NetParams& init);

struct GeneralizationOptions {
    int m = 32;
    std::vector<int> M_grid;
    int seeds = 10;
    int n_test = 20000;
    double kappa = 100.0;  // scaled lambda = lambda_min / kappa
    double delta_conf = 0.1;
    double delta_hat = 1.0;
    NoiseSpec noise;
    int iterations = 2000;
    double step_theory = 0.01;
    double step_scaled = 0.1;
    double init_scale = 1.0;
    int jobs = 1;
};

struct GeneralizationRow {
    int M = 0;
    int seed = 0;
    double lambda_used = 0.0;
    std::string lambda_kind;  // "theory" or "scaled"
    double err_invariant = 0.0;
    double err_plain = 0.0;
    double path_norm_invariant = 0.0;
    double path_norm_plain = 0.0;
    double rhs_invariant = 0.0;  // bound with delta_hat
    double rhs_plain = 0.0;      // bound with delta = 1
    double tau0 = 0.0;
};

/// For each (M, seed): one dataset, invariant and plain nets trained at the
/// theoretical lambda and at lambda / kappa, test error on fresh clean samples.
std::vector<GeneralizationRow> generalization_experiment(const TargetFunction& target,
                                                         const GroupAction& group,
                                                         const DomainSpec& domain,
                                                         const GeneralizationOptions& opts,
                                                         std::uint64_t seed);

}  // namespace barron
