#include "barron/erm_trainer.hpp"
#include "barron/experiments.hpp"
#include "barron/sampling_construction.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace barron;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out(k++) = x;
    return out;
}

ScenarioConfig scenario(const std::string& name) { return scenario_from_json(builtin_scenario(name)); }

double objective_value(const NetParams& p, const Activation& act, const GroupAction& g, const Dataset& data,
                       double lambda) {
    return objective(p, act, make_orbit_batch(g, data.xs), data.ys, lambda).objective;
}

}  // namespace

TEST_CASE("theory constants: relu, B = 2.5") {
    const TheoryConstants c = TheoryConstants::from(Activation::relu().constants(), 2.5);
    CHECK(c.C1 == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(c.C_sigma == doctest::Approx(60.75).epsilon(1e-15));
    CHECK(c.D_sigma == 4 * c.C_sigma);
    CHECK(c.D_sigma == doctest::Approx(243).epsilon(1e-15));
    CHECK(c.C_zeta == doctest::Approx(std::numbers::pi * std::numbers::pi / 6));

    // Lambda_f and R_f by hand at delta = 0.1
    const double r = std::sqrt(2.0) * 2.5 + 1.0;
    const double lam = std::sqrt(2.0 * std::log(2.0 * c.C_zeta * r * r / 0.1)) + 2.0;
    CHECK(c.Lambda_f(0.1) == doctest::Approx(lam).epsilon(1e-14));
    CHECK(c.R_f(0.1) == doctest::Approx(1.0 + 13.5 * lam).epsilon(1e-14));
    CHECK_THROWS_AS(c.Lambda_f(0.0), DomainError);
    CHECK_THROWS_AS(c.Lambda_f(1.0), DomainError);
    CHECK_THROWS_AS(TheoryConstants::from(Activation::relu().constants(), 0.0), DomainError);

    // the 8 gamma C1 branch wins for a large gamma
    const TheoryConstants g = TheoryConstants::from({1.0, 0.0, 10.0}, 2.5);
    CHECK(g.C_sigma == doctest::Approx(360.0));

    // smooth kinds need gamma first
    CHECK_THROWS_AS(TheoryConstants::from(Activation::sigmoid().constants(), 1.0), MissingConstantError);
}

TEST_CASE("lambda_min") {
    const TheoryConstants c = TheoryConstants::from(Activation::relu().constants(), 2.5);
    CHECK(lambda_min(c, 1, 100, 32, 1.0) == doctest::Approx(243 * std::sqrt(std::log(4.0) / 100)));
    CHECK(lambda_min(c, 1, 1 << 30, 1 << 30, 1.0) < 1e-2);

    // large M leaves only the approximation branch, which is linear in delta_hat
    const int bigM = 1 << 30;
    const double full = lambda_min(c, 1, bigM, 4, 1.0);
    CHECK(full == doctest::Approx(3 * 6.25 / 4));
    CHECK(lambda_min(c, 1, bigM, 4, 0.5) == doctest::Approx(full / 2));

    double prev = INFINITY;
    for (int M = 1; M <= 1 << 20; M *= 4) {
        const double v = lambda_min(c, 2, M, 32, 0.5);
        CHECK(v <= prev);
        prev = v;
    }
    prev = INFINITY;
    for (int m = 1; m <= 1 << 20; m *= 4) {
        const double v = lambda_min(c, 2, 1 << 24, m, 0.5);
        CHECK(v <= prev);
        prev = v;
    }
    prev = 0.0;
    for (double dh = 0.05; dh <= 1.0; dh += 0.05) {
        const double v = lambda_min(c, 2, 1 << 24, 2, dh);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(lambda_min(c, 1, 0, 1, 1.0), DomainError);
}

TEST_CASE("generalization_bound by hand") {
    const TheoryConstants c = TheoryConstants::from(Activation::relu().constants(), 2.0);
    const double lam = 0.3, tau0 = 1.0 / 3.0, dc = 0.1;
    const int M = 500, m = 16;
    const double b2 = 9.0;
    const double r = c.R_f(dc) + tau0 / lam + 1.0;
    const double want = 3.0 * 0.5 * 4.0 / m + 2 * lam * b2 + c.D_sigma * b2 * (c.Lambda_f(dc) - 2) / std::sqrt(500.0) +
                        c.D_sigma * r * std::sqrt(2 * std::log(4 * c.C_zeta * r / dc) / M);
    CHECK(generalization_bound(c, M, m, 0.5, lam, tau0, dc) == doctest::Approx(want).epsilon(1e-14));
    CHECK(generalization_bound(c, M, m, 0.5, lam, tau0, dc) < generalization_bound(c, M, m, 1.0, lam, tau0, dc));
    CHECK_THROWS_AS(generalization_bound(c, M, m, 0.5, 0.0, tau0, dc), DomainError);
}

TEST_CASE("init_params statistics") {
    const NetParams p = init_params(20000, 4, 2.0, 3);
    auto sd = [](const auto& v) { return std::sqrt((v.array() - v.mean()).square().mean()); };
    CHECK(sd(p.a) == doctest::Approx(2.0).epsilon(0.03));
    CHECK(sd(p.b) == doctest::Approx(1.0).epsilon(0.03));
    const Eigen::VectorXd w0 = p.w.col(0);
    CHECK(sd(w0) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("train: huge lambda shrinks the network") {
    const ScenarioConfig cfg = scenario("reflection-disjoint");
    const TargetFunction t = cfg.target();
    const Dataset data = make_dataset(t, cfg.domain(), 64, NoiseSpec::none(), 1);
    TrainConfig tc;
    tc.m = 8;
    tc.lambda = 1e3;
    tc.step_size = 1e-4;
    tc.iterations = 3000;
    tc.seed = 2;
    const TrainResult r = train(data, t.activation, cfg.group(), tc);
    CHECK(path_norm(r.params) < 0.1);
}

TEST_CASE("train: interpolation without regularization") {
    // target realised by a width-4 tanh network with distinct atoms
    const DiscreteMeasure m{1,
                            {{0.25, 1.5, vec({2.0}), 0.5},
                             {0.25, -1.0, vec({1.0}), -0.3},
                             {0.25, 0.8, vec({-1.5}), 0.2},
                             {0.25, 1.2, vec({0.7}), 0.9}}};
    const Activation act = Activation::parse("tanh");
    const TargetFunction t = make_target(m, act, nullptr);
    const Dataset data = make_dataset(t, DomainSpec::cube_pm1(1), 20, NoiseSpec::none(), 5);
    TrainConfig tc;
    tc.m = 4;
    tc.lambda = 0.0;
    tc.step_size = 0.5;
    tc.iterations = 4000;
    tc.seed = 6;
    const TrainResult r = train(data, act, make_trivial(1), tc);
    CHECK(r.final_loss < 1e-3);
    CHECK(r.final_objective == r.final_loss);
}

TEST_CASE("train: deterministic, monotone trace, errors") {
    const ScenarioConfig cfg = scenario("reflection-disjoint");
    const TargetFunction t = cfg.target();
    const Dataset data = make_dataset(t, cfg.domain(), 64, NoiseSpec::uniform(0.05), 7);
    TrainConfig tc;
    tc.m = 32;
    tc.lambda = 1e-3;
    tc.iterations = 1000;
    tc.seed = 8;
    const TrainResult a = train(data, t.activation, cfg.group(), tc);
    const TrainResult b = train(data, t.activation, cfg.group(), tc);
    CHECK(a.params.a == b.params.a);
    CHECK(a.params.w == b.params.w);
    CHECK(a.params.b == b.params.b);
    CHECK(a.trace == b.trace);
    CHECK(a.trace.size() == 1001);
    CHECK(a.monotone_fraction() >= 0.95);
    CHECK(a.trace.back() == a.final_objective);

    tc.step_size = 1e6;
    tc.iterations = 400;
    try {
        train(data, t.activation, cfg.group(), tc);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK_FALSE(e.trace().empty());
        for (double v : e.trace()) CHECK(std::isfinite(v));
    }

    tc.step_size = 0.1;
    tc.iterations = 0;
    CHECK_THROWS_AS(train(data, t.activation, cfg.group(), tc), ConfigError);
    tc.iterations = 10;
    tc.lambda = -1;
    CHECK_THROWS_AS(train(data, t.activation, cfg.group(), tc), ConfigError);
    tc.lambda = 0;
    CHECK_THROWS_AS(train(Dataset{}, t.activation, cfg.group(), tc), DomainError);
}

TEST_CASE("property: training beats the sampling construction on J_lambda") {
    const ScenarioConfig cfg = scenario("reflection-disjoint");
    const TargetFunction t = cfg.target();
    const GroupAction g = cfg.group();
    const int m = 16;
    const double lambda = 1e-3;
    int wins = 0;
    const int n_seeds = 10;
    for (int s = 0; s < n_seeds; ++s) {
        const Dataset data = make_dataset(t, cfg.domain(), 64, NoiseSpec::uniform(0.05), 100 + static_cast<std::uint64_t>(s));
        TrainConfig tc;
        tc.m = m;
        tc.lambda = lambda;
        tc.step_size = 1.0;
        tc.iterations = 2000;
        tc.seed = 200 + static_cast<std::uint64_t>(s);
        const TrainResult r = train(data, t.activation, g, tc);
        const NetParams theta = construct(t, m, 300 + static_cast<std::uint64_t>(s));
        const double j_construct = objective_value(theta, t.activation, g, data, lambda);
        if (r.final_objective <= j_construct) ++wins;
    }
    CHECK(wins >= 9);
}

TEST_CASE("property: invariant test error ignores a group transform of the inputs") {
    const ScenarioConfig cfg = scenario("c4-corners");
    const TargetFunction t = cfg.target();
    const GroupAction g = cfg.group();
    const Dataset data = make_dataset(t, cfg.domain(), 64, NoiseSpec::none(), 9);
    TrainConfig tc;
    tc.m = 8;
    tc.lambda = 1e-4;
    tc.iterations = 300;
    tc.step_size = 0.5;
    tc.seed = 10;
    const TrainResult r = train(data, t.activation, g, tc);
    const auto xs = sample_domain(cfg.domain(), 4000, 11);
    const Vector truth = target_eval_many(t, xs);
    const double base = (forward_many(r.params, t.activation, g, xs) - truth).squaredNorm() / 4000;
    for (std::size_t s = 1; s < g.order(); ++s) {
        std::vector<Vector> moved;
        for (const auto& x : xs) moved.push_back(g.apply(s, x));
        const double err = (forward_many(r.params, t.activation, g, moved) - target_eval_many(t, moved)).squaredNorm() / 4000;
        CHECK(err == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("generalization_experiment: small grid") {
    const ScenarioConfig cfg = scenario("reflection-disjoint");
    const TargetFunction t = cfg.target();
    GeneralizationOptions opts;
    opts.m = 8;
    opts.M_grid = {16, 32};
    opts.seeds = 2;
    opts.n_test = 2000;
    opts.kappa = 1e5;
    opts.noise = NoiseSpec::uniform(1.0);
    opts.iterations = 50;
    opts.step_scaled = 1.0;
    opts.delta_hat = 0.5;
    const auto rows = generalization_experiment(t, cfg.group(), cfg.domain(), opts, 12);
    REQUIRE(rows.size() == 8);
    for (const auto& row : rows) {
        CHECK(row.tau0 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK((row.lambda_kind == "theory" || row.lambda_kind == "scaled"));
        CHECK(row.err_invariant >= 0.0);
        CHECK(row.err_plain >= 0.0);
        // the bound is vacuous at this scale, so it clears the measured error easily
        CHECK(row.rhs_invariant >= row.err_invariant);
        CHECK(row.rhs_invariant <= row.rhs_plain);
    }
    CHECK(rows[0].lambda_used == doctest::Approx(rows[1].lambda_used * 1e5));

    // parallel run is identical
    opts.jobs = 3;
    const auto again = generalization_experiment(t, cfg.group(), cfg.domain(), opts, 12);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].err_invariant == again[k].err_invariant);
        CHECK(rows[k].err_plain == again[k].err_plain);
    }

    opts.M_grid = {0};
    CHECK_THROWS_AS(generalization_experiment(t, cfg.group(), cfg.domain(), opts, 12), ConfigError);

    // a non-invariant target is refused
    const TargetFunction lone = make_target({1, {{1.0, 1.0, vec({1.0}), -0.5}}}, Activation::relu(), nullptr);
    opts.M_grid = {16};
    CHECK_THROWS_AS(generalization_experiment(lone, cfg.group(), cfg.domain(), opts, 12), DomainError);
}

TEST_CASE("stable_step") {
    // one neuron in d = 3: s = 1 + 2 + 0.5 + 1 = 4.5, k = 4.5 + 2 * 1.5 = 7.5
    NetParams p = NetParams::zeros(1, 3);
    p.a(0) = -1.5;
    p.w(0, 0) = 1.0;
    p.w(0, 2) = -2.0;
    p.b(0) = 0.5;
    CHECK(stable_step(1.0, 0.01, p) == doctest::Approx(1.0 / (2.0 * 0.01 * 56.25)));
    CHECK(stable_step(1e-4, 0.01, p) == 1e-4);
    CHECK(stable_step(3.0, 0.0, p) == 3.0);

    // small width at the theoretical lambda used to blow up here
    for (const char* name : {"c4-corners", "cn-disk", "s2-bump-offdiag", "s2-bump-diag"}) {
        CAPTURE(name);
        const ScenarioConfig cfg = scenario(name);
        GeneralizationOptions opts;
        opts.m = 8;
        opts.M_grid = {32};
        opts.seeds = 2;
        opts.n_test = 1000;
        opts.iterations = 50;
        opts.step_theory = 1.0;
        const auto rows = generalization_experiment(cfg.target(), cfg.group(), cfg.domain(), opts, 7);
        for (const auto& row : rows) {
            CHECK(std::isfinite(row.err_invariant));
            CHECK(std::isfinite(row.err_plain));
        }
    }
}
