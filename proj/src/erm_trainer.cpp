#include "barron/erm_trainer.hpp"

#include "barron/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace barron {

TheoryConstants TheoryConstants::from(const ActivationConstants& act, double barron_bound) {
    if (!(barron_bound > 0.0)) throw DomainError("TheoryConstants: B must be positive");
    TheoryConstants c;
    c.L_sigma = act.lipschitz;
    c.sigma0 = act.value_at_zero;
    c.gamma = act.gamma;
    c.B = barron_bound;
    c.C1 = (c.L_sigma + std::abs(c.sigma0)) * (c.B + 1.0) + 1.0;
    c.C_sigma = std::max(8.0 * c.gamma * c.C1, 3.0 * c.C1 * c.C1);
    c.D_sigma = 4.0 * c.C_sigma;
    c.C_zeta = std::numbers::pi * std::numbers::pi / 6.0;
    return c;
}

double TheoryConstants::Lambda_f(double delta_conf) const {
    if (!(delta_conf > 0.0 && delta_conf < 1.0)) throw DomainError("delta_conf must lie in (0, 1)");
    const double r = std::sqrt(2.0) * B + 1.0;
    return std::sqrt(2.0 * std::log(2.0 * C_zeta * r * r / delta_conf)) + 2.0;
}

double TheoryConstants::R_f(double delta_conf) const {
    return 1.0 + (2.0 * B * B + 1.0) * Lambda_f(delta_conf);
}

double lambda_min(const TheoryConstants& c, int d, int M, int m, double delta_hat) {
    if (d < 1 || M < 1 || m < 1 || !(delta_hat > 0.0)) {
        throw DomainError("lambda_min: arguments must be positive");
    }
    const double stat = c.D_sigma * std::sqrt(std::log(2.0 * d + 2.0) / M);
    const double lc = c.L_sigma + std::abs(c.sigma0);
    const double approx = 3.0 * lc * lc * delta_hat * c.B * c.B / m;
    return std::max(stat, approx);
}

double generalization_bound(const TheoryConstants& c, int M, int m, double delta_hat, double lambda,
                   double tau0, double delta_conf) {
    if (M < 1 || m < 1 || !(lambda > 0.0) || tau0 < 0.0) {
        throw DomainError("generalization_bound: bad arguments");
    }
    const double lc = c.L_sigma + std::abs(c.sigma0);
    const double b2 = 2.0 * c.B * c.B + 1.0;
    const double sqrtM = std::sqrt(static_cast<double>(M));
    const double r = c.R_f(delta_conf) + tau0 / lambda + 1.0;
    return 3.0 * lc * lc * delta_hat * c.B * c.B / m + 2.0 * lambda * b2 +
           c.D_sigma * b2 * (c.Lambda_f(delta_conf) - 2.0) / sqrtM +
           c.D_sigma * r * std::sqrt(2.0 * std::log(4.0 * c.C_zeta * r / delta_conf) / M);
}

double TrainResult::monotone_fraction() const {
    if (trace.size() < 2) return 1.0;
    std::size_t ok = 0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k] <= trace[k - 1]) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(trace.size() - 1);
}

NetParams init_params(int m, int d, double init_scale, std::uint64_t seed) {
    if (m < 1 || d < 1) throw DomainError("init_params: m and d must be >= 1");
    if (!(init_scale > 0.0)) throw DomainError("init_params: init_scale must be positive");
    Rng rng(seed);
    std::normal_distribution<double> outer(0.0, init_scale);
    std::normal_distribution<double> inner(0.0, init_scale / std::sqrt(static_cast<double>(d)));
    NetParams p = NetParams::zeros(m, d);
    for (int i = 0; i < m; ++i) {
        p.a(i) = outer(rng);
        for (int c = 0; c < d; ++c) p.w(i, c) = inner(rng);
        p.b(i) = inner(rng);
    }
    return p;
}

TrainResult train(const Dataset& data, const Activation& act, const GroupAction& group,
                  const TrainConfig& cfg) {
    if (data.xs.empty()) throw DomainError("train: empty dataset");
    if (cfg.iterations < 1) throw ConfigError("train: iterations must be >= 1");
    if (cfg.lambda < 0.0) throw ConfigError("train: lambda must be >= 0");
    if (!(cfg.step_size > 0.0)) throw ConfigError("train: step_size must be positive");
    require_dim(group.dim(), data.dim, "train group");

    const OrbitBatch batch = make_orbit_batch(group, data.xs);
    TrainResult res;
    res.params = init_params(cfg.m, data.dim, cfg.init_scale, cfg.seed);
    res.trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
    NetParams grad;
    for (int it = 0; it < cfg.iterations; ++it) {
        const ObjectiveValue v =
            objective_and_gradient(res.params, act, batch, data.ys, cfg.lambda, grad);
        if (!std::isfinite(v.objective)) {
            throw DivergenceError("train: objective became non-finite at iteration " +
                                      std::to_string(it),
                                  std::move(res.trace));
        }
        res.trace.push_back(v.objective);
        res.params.a -= cfg.step_size * grad.a;
        res.params.w -= cfg.step_size * grad.w;
        res.params.b -= cfg.step_size * grad.b;
    }
    const ObjectiveValue last = objective(res.params, act, batch, data.ys, cfg.lambda);
    if (!std::isfinite(last.objective)) {
        throw DivergenceError("train: objective became non-finite", std::move(res.trace));
    }
    res.trace.push_back(last.objective);
    res.final_loss = last.loss;
    res.final_objective = last.objective;
    return res;
}

double stable_step(double step, double lambda, const NetParams& init) {
    if (!(lambda > 0.0)) return step;
    // Per neuron the penalty is (lambda/m) a^2 s^2, s linear in (w, b) with
    // gradient norm sqrt(d+1); this bounds its top Hessian eigenvalue.
    const double root = std::sqrt(static_cast<double>(init.dim()) + 1.0);
    double k2 = 0.0;
    for (int i = 0; i < init.width(); ++i) {
        const double s = init.w.row(i).lpNorm<1>() + std::abs(init.b(i)) + 1.0;
        const double k = s + root * std::abs(init.a(i));
        k2 = std::max(k2, k * k);
    }
    return std::min(step, init.width() / (2.0 * lambda * k2));
}

std::vector<GeneralizationRow> generalization_experiment(const TargetFunction& target,
                                                         const GroupAction& group,
                                                         const DomainSpec& domain,
                                                         const GeneralizationOptions& opts,
                                                         std::uint64_t seed) {
    if (opts.M_grid.empty()) throw ConfigError("M_grid must not be empty");
    for (int M : opts.M_grid) {
        if (M < 1) throw ConfigError("M_grid entries must be >= 1");
    }
    if (opts.seeds < 1 || opts.m < 1 || opts.n_test < 1) {
        throw ConfigError("seeds, m and n_test must be >= 1");
    }
    if (!(opts.kappa > 0.0)) throw ConfigError("kappa must be positive");
    require_dim(group.dim(), target.measure.dim, "generalization_experiment group");
    require_dim(domain.dim, target.measure.dim, "generalization_experiment domain");
    if (invariance_defect(target, group, 256, derive_seed(seed, 0xD1F)) > 1e-9) {
        throw DomainError("generalization_experiment: target is not invariant under " + group.name());
    }

    const TheoryConstants consts = TheoryConstants::from(target.activation.constants(), target.barron_bound);
    const GroupAction plain = make_trivial(group.dim());
    const int d = domain.dim;
    const auto seeds = static_cast<std::size_t>(opts.seeds);
    const std::size_t n_jobs = opts.M_grid.size() * seeds;
    std::vector<std::array<GeneralizationRow, 2>> results(n_jobs);

    parallel_for(n_jobs, opts.jobs, [&](std::size_t job) {
        const int M = opts.M_grid[job / seeds];
        const int s = static_cast<int>(job % seeds);
        const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(M),
                                               static_cast<std::uint64_t>(s));
        const Dataset data = make_dataset(target, domain, M, opts.noise, derive_seed(base, 0));
        const auto test_xs = sample_domain(domain, opts.n_test, derive_seed(base, 1));
        const Vector truth = target_eval_many(target, test_xs);
        const double lam_theory = lambda_min(consts, d, M, opts.m, opts.delta_hat);

        const auto test_error = [&](const NetParams& p, const GroupAction& g) {
            return (forward_many(p, target.activation, g, test_xs) - truth).squaredNorm() /
                   static_cast<double>(opts.n_test);
        };

        const std::uint64_t init_seed = derive_seed(base, 2);  // same init for both nets
        const NetParams init = init_params(opts.m, d, opts.init_scale, init_seed);
        for (int kind = 0; kind < 2; ++kind) {
            TrainConfig cfg;
            cfg.m = opts.m;
            cfg.lambda = kind == 0 ? lam_theory : lam_theory / opts.kappa;
            cfg.step_size = stable_step(kind == 0 ? opts.step_theory : opts.step_scaled, cfg.lambda, init);
            cfg.iterations = opts.iterations;
            cfg.init_scale = opts.init_scale;
            cfg.seed = init_seed;

            const TrainResult inv = train(data, target.activation, group, cfg);
            const TrainResult pl = train(data, target.activation, plain, cfg);

            GeneralizationRow& row = results[job][static_cast<std::size_t>(kind)];
            row.M = M;
            row.seed = s;
            row.lambda_used = cfg.lambda;
            row.lambda_kind = kind == 0 ? "theory" : "scaled";
            row.err_invariant = test_error(inv.params, group);
            row.err_plain = test_error(pl.params, plain);
            row.path_norm_invariant = path_norm(inv.params);
            row.path_norm_plain = path_norm(pl.params);
            row.tau0 = data.tau0;
            row.rhs_invariant = generalization_bound(consts, M, opts.m, opts.delta_hat, cfg.lambda,
                                            data.tau0, opts.delta_conf);
            row.rhs_plain = generalization_bound(consts, M, opts.m, 1.0, cfg.lambda, data.tau0,
                                        opts.delta_conf);
        }
    });

    std::vector<GeneralizationRow> rows;
    rows.reserve(2 * n_jobs);
    for (const auto& pair : results) {
        for (const auto& row : pair) rows.push_back(row);
    }
    return rows;
}

}  // namespace barron
