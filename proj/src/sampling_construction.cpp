#include "barron/sampling_construction.hpp"

#include "barron/parallel.hpp"

#include <cmath>
#include <limits>

namespace barron {

namespace {

constexpr int kMinMc = 1000;

ErrorEstimate squared_error_stats(const Vector& truth, const Vector& approx) {
    const Eigen::ArrayXd sq = (truth - approx).array().square();
    const double n = static_cast<double>(sq.size());
    ErrorEstimate out;
    out.value = sq.mean();
    if (sq.size() > 1) out.stderr_ = std::sqrt((sq - out.value).square().sum() / (n - 1.0) / n);
    return out;
}

void check_grid(const std::vector<int>& grid) {
    if (grid.size() < 4) throw ConfigError("m_grid needs at least 4 points");
    for (int m : grid) {
        if (m < 1) throw ConfigError("m_grid entries must be >= 1");
    }
    const double r = static_cast<double>(grid[1]) / grid[0];
    if (!(r > 1.0)) throw ConfigError("m_grid must be increasing");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double rk = static_cast<double>(grid[k]) / grid[k - 1];
        if (std::abs(rk - r) > 1e-9 * r) throw ConfigError("m_grid must be geometric");
    }
}

}  // namespace

NetParams construct(const TargetFunction& target, int m, std::uint64_t seed) {
    return sample_atoms(target.measure, m, seed);
}

ErrorEstimate l2_error_sq(const TargetFunction& target, const BatchEval& net_eval,
                          const DomainSpec& domain, int n_mc, std::uint64_t seed) {
    if (n_mc < kMinMc) throw DomainError("l2_error_sq needs n_mc >= 1000");
    const auto xs = sample_domain(domain, n_mc, seed);
    return squared_error_stats(target_eval_many(target, xs), net_eval(xs));
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("loglog_slope: need matching series of >= 2");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingReport scaling_experiment(const TargetFunction& target, const GroupAction& group,
                                 const DomainSpec& domain, const ScalingOptions& opts,
                                 std::uint64_t seed) {
    check_grid(opts.m_grid);
    if (opts.trials < 1) throw ConfigError("trials must be >= 1");
    if (opts.n_mc < kMinMc) throw ConfigError("n_mc must be >= 1000");
    require_dim(group.dim(), target.measure.dim, "scaling_experiment group");
    require_dim(domain.dim, target.measure.dim, "scaling_experiment domain");

    const GroupAction plain = make_trivial(group.dim());
    const std::size_t n_m = opts.m_grid.size();
    const auto trials = static_cast<std::size_t>(opts.trials);
    ScalingReport report;
    report.rows.resize(n_m * trials);

    parallel_for(report.rows.size(), opts.jobs, [&](std::size_t job) {
        const int m = opts.m_grid[job / trials];
        const int trial = static_cast<int>(job % trials);
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(m),
                                            static_cast<std::uint64_t>(trial));
        const NetParams theta = construct(target, m, derive_seed(s, 0));
        // Both errors share theta and the Monte Carlo points.
        const auto xs = sample_domain(domain, opts.n_mc, derive_seed(s, 1));
        const Vector truth = target_eval_many(target, xs);
        ScalingRow& row = report.rows[job];
        row.m = m;
        row.trial = trial;
        row.err_invariant =
            squared_error_stats(truth, forward_many(theta, target.activation, group, xs)).value;
        row.err_plain =
            squared_error_stats(truth, forward_many(theta, target.activation, plain, xs)).value;
        const double pn = path_norm(theta);
        row.path_norm_sq = pn * pn;
    });

    std::vector<double> ms, inv, pl;
    for (std::size_t k = 0; k < n_m; ++k) {
        ScalingPoint pt;
        pt.m = opts.m_grid[k];
        double diff_sum = 0.0, diff_sq = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& row = report.rows[k * trials + t];
            pt.mean_invariant += row.err_invariant;
            pt.mean_plain += row.err_plain;
            const double diff = row.err_invariant - row.err_plain;
            diff_sum += diff;
            diff_sq += diff * diff;
        }
        const double n = static_cast<double>(trials);
        pt.mean_invariant /= n;
        pt.mean_plain /= n;
        pt.ratio = pt.mean_plain > 0.0 ? pt.mean_invariant / pt.mean_plain
                                       : std::numeric_limits<double>::quiet_NaN();
        if (trials > 1) {
            const double mean = diff_sum / n;
            pt.paired_stderr = std::sqrt(std::max(0.0, diff_sq - n * mean * mean) / (n - 1.0) / n);
        }
        ms.push_back(pt.m);
        inv.push_back(pt.mean_invariant);
        pl.push_back(pt.mean_plain);
        report.per_m.push_back(pt);
    }
    report.slope_invariant = loglog_slope(ms, inv);
    report.slope_plain = loglog_slope(ms, pl);
    return report;
}

}  // namespace barron
