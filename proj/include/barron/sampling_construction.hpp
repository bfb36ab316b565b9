#pragma once

#include "barron/activations.hpp"
#include "barron/data_gen.hpp"
#include "barron/group_actions.hpp"
#include "barron/param_measures.hpp"
#include "barron/shallow_net.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace barron {

/// m i.i.d. atoms of the target's measure. Evaluate with forward_invariant for
/// the group-averaged network, forward for the plain one.
NetParams construct(const TargetFunction& target, int m, std::uint64_t seed);

/// Evaluates a network (or anything else) on a batch of points.
using BatchEval = std::function<Vector(std::span<const Vector>)>;

struct ErrorEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo estimate of ||f - net||^2 in L2 of the uniform measure on the domain.
ErrorEstimate l2_error_sq(const TargetFunction& target, const BatchEval& net_eval,
                          const DomainSpec& domain, int n_mc, std::uint64_t seed);

struct ScalingRow {
    int m = 0;
    int trial = 0;
    double err_invariant = 0.0;
    double err_plain = 0.0;
    double path_norm_sq = 0.0;
};

struct ScalingPoint {
    int m = 0;
    double mean_invariant = 0.0;
    double mean_plain = 0.0;
    double ratio = 0.0;           // mean_invariant / mean_plain
    double paired_stderr = 0.0;   // stderr of err_invariant - err_plain
};

struct ScalingReport {
    std::vector<ScalingRow> rows;  // sorted by (m, trial)
    std::vector<ScalingPoint> per_m;
    double slope_invariant = 0.0;  // least squares of log mean error on log m
    double slope_plain = 0.0;
};

struct ScalingOptions {
    std::vector<int> m_grid;
    int trials = 30;
    int n_mc = 20000;
    int jobs = 1;
};

/// Paired invariant/plain errors of the sampling construction over a geometric width grid.
ScalingReport scaling_experiment(const TargetFunction& target, const GroupAction& group,
                                 const DomainSpec& domain, const ScalingOptions& opts,
                                 std::uint64_t seed);

/// Least-squares slope of log y on log x. NaN if some y is not positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace barron
