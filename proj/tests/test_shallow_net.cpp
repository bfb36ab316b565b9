#include "barron/param_measures.hpp"
#include "barron/shallow_net.hpp"

#include <doctest.h>

#include <cmath>

using namespace barron;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out(k++) = x;
    return out;
}

NetParams net(std::initializer_list<double> a, std::initializer_list<std::initializer_list<double>> w,
              std::initializer_list<double> b) {
    Matrix W(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : w) W.row(i++) = vec(row).transpose();
    return NetParams(vec(a), W, vec(b));
}

NetParams random_net(Rng& rng, int m, int d, double scale = 1.0) {
    NetParams p = NetParams::zeros(m, d);
    for (int i = 0; i < m; ++i) {
        p.a(i) = uniform(rng, -scale, scale);
        for (int c = 0; c < d; ++c) p.w(i, c) = uniform(rng, -scale, scale);
        p.b(i) = uniform(rng, -scale, scale);
    }
    return p;
}

Vector random_point(Rng& rng, int d) {
    Vector x(d);
    for (auto& v : x) v = uniform(rng, -1, 1);
    return x;
}

// Direct double loop, no batching.
double naive_invariant(const NetParams& p, const Activation& act, const GroupAction& g, const Vector& x) {
    double acc = 0.0;
    for (int i = 0; i < p.width(); ++i) {
        for (std::size_t s = 0; s < g.order(); ++s) {
            const Vector gx = g.element(s) * x;
            acc += p.a(i) * act.eval(p.w.row(i).dot(gx) + p.b(i));
        }
    }
    return acc / (p.width() * static_cast<double>(g.order()));
}

double naive_objective(const NetParams& p, const Activation& act, const GroupAction& g,
                       const std::vector<Vector>& xs, const std::vector<double>& ys, double lambda) {
    double loss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = naive_invariant(p, act, g, xs[k]) - ys[k];
        loss += r * r;
    }
    loss /= static_cast<double>(xs.size());
    double pn2 = 0.0;
    for (int i = 0; i < p.width(); ++i) {
        const double t = std::abs(p.a(i)) * (p.w.row(i).lpNorm<1>() + std::abs(p.b(i)) + 1.0);
        pn2 += t * t;
    }
    return loss + lambda * (pn2 / p.width() + 1.0);
}

// Central differences over every coordinate, on the naive objective.
NetParams fd_gradient(const NetParams& p, const Activation& act, const GroupAction& g,
                      const std::vector<Vector>& xs, const std::vector<double>& ys, double lambda, double h) {
    NetParams out = NetParams::zeros(p.width(), p.dim());
    auto bump = [&](auto&& ref, double& slot) {
        const double keep = slot;
        slot = keep + h;
        const double up = naive_objective(ref, act, g, xs, ys, lambda);
        slot = keep - h;
        const double down = naive_objective(ref, act, g, xs, ys, lambda);
        slot = keep;
        return (up - down) / (2 * h);
    };
    NetParams q = p;
    for (int i = 0; i < p.width(); ++i) {
        out.a(i) = bump(q, q.a(i));
        out.b(i) = bump(q, q.b(i));
        for (int c = 0; c < p.dim(); ++c) out.w(i, c) = bump(q, q.w(i, c));
    }
    return out;
}

// Smallest distance from any pre-activation (or l1 kink at a zero parameter) to a kink.
double kink_margin(const NetParams& p, const Activation& act, const GroupAction& g, const std::vector<Vector>& xs) {
    double margin = INFINITY;
    for (const auto& x : xs) {
        for (int i = 0; i < p.width(); ++i) {
            for (std::size_t s = 0; s < g.order(); ++s) {
                const double z = p.w.row(i).dot(g.element(s) * x) + p.b(i);
                for (double k : act.kinks()) margin = std::min(margin, std::abs(z - k));
            }
        }
    }
    for (int i = 0; i < p.width(); ++i) {
        margin = std::min(margin, std::abs(p.a(i)));
        margin = std::min(margin, std::abs(p.b(i)));
        for (int c = 0; c < p.dim(); ++c) margin = std::min(margin, std::abs(p.w(i, c)));
    }
    return margin;
}

void check_gradient(const NetParams& analytic, const NetParams& fd, double rel_tol) {
    auto close = [&](double x, double y) { return std::abs(x - y) <= rel_tol * std::max(1.0, std::abs(y)); };
    for (int i = 0; i < analytic.width(); ++i) {
        CHECK(close(analytic.a(i), fd.a(i)));
        CHECK(close(analytic.b(i), fd.b(i)));
        for (int c = 0; c < analytic.dim(); ++c) CHECK(close(analytic.w(i, c), fd.w(i, c)));
    }
}

}  // namespace

TEST_CASE("forward examples") {
    const Activation relu = Activation::relu();
    CHECK(forward(net({1}, {{1}}, {0}), relu, vec({0.5})) == 0.5);

    Rng rng(1);
    const NetParams one = random_net(rng, 1, 3);
    NetParams two = NetParams::zeros(2, 3);
    for (int i = 0; i < 2; ++i) {
        two.a(i) = one.a(0);
        two.w.row(i) = one.w.row(0);
        two.b(i) = one.b(0);
    }
    const Vector x = random_point(rng, 3);
    CHECK(forward(two, relu, x) == doctest::Approx(forward(one, relu, x)).epsilon(1e-15));

    const NetParams pair = net({1, 1}, {{1}, {-1}}, {-0.5, -0.5});
    CHECK(forward(pair, relu, vec({0.75})) == doctest::Approx(0.125).epsilon(1e-15));
    const DiscreteMeasure m{1, {{0.5, 1.0, vec({1}), -0.5}, {0.5, 1.0, vec({-1}), -0.5}}};
    CHECK(forward(pair, relu, vec({0.75})) == doctest::Approx(target_eval(make_target(m, relu), vec({0.75}))));

    CHECK_THROWS_AS(forward(pair, relu, vec({0.1, 0.2})), ShapeError);
}

TEST_CASE("forward_invariant examples") {
    const Activation relu = Activation::relu();
    CHECK(forward_invariant(net({1}, {{1}}, {-0.5}), relu, make_reflection(1), vec({0.75})) ==
          doctest::Approx(0.125).epsilon(1e-15));

    Rng rng(2);
    const NetParams p = random_net(rng, 7, 3);
    const Activation act = Activation::gelu();
    for (int k = 0; k < 50; ++k) {
        const Vector x = random_point(rng, 3);
        // trivial group: bit-for-bit
        CHECK(forward_invariant(p, act, make_trivial(3), x) == forward(p, act, x));
        // agreement with the direct double loop
        for (const auto& g : {make_reflection(3), make_symmetric(3)}) {
            CHECK(forward_invariant(p, act, g, x) == doctest::Approx(naive_invariant(p, act, g, x)).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(forward_invariant(p, act, make_cyclic_2d(4), random_point(rng, 3)), ShapeError);
}

TEST_CASE("property: group-averaged network is invariant") {
    Rng rng(3);
    const std::vector<GroupAction> groups{make_reflection(2), make_cyclic_2d(4), make_cyclic_2d(6),
                                          make_symmetric(2)};
    const std::vector<Activation> acts{Activation::relu(), Activation::sigmoid(), Activation::bump(0.5)};
    for (const auto& g : groups) {
        for (const auto& act : acts) {
            const NetParams p = random_net(rng, 9, 2, 2.0);
            for (int k = 0; k < 50; ++k) {
                const Vector x = random_point(rng, 2);
                const double fx = forward_invariant(p, act, g, x);
                for (std::size_t s = 0; s < g.order(); ++s) {
                    CHECK(std::abs(forward_invariant(p, act, g, g.apply(s, x)) - fx) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("batched evaluation agrees with pointwise") {
    Rng rng(4);
    const NetParams p = random_net(rng, 300, 3);
    const GroupAction g = make_symmetric(3);
    std::vector<Vector> xs;
    for (int k = 0; k < 1500; ++k) xs.push_back(random_point(rng, 3));
    const Vector many = forward_many(p, Activation::silu(), g, xs);
    for (int k = 0; k < 1500; k += 37) {
        CHECK(many(k) == doctest::Approx(forward_invariant(p, Activation::silu(), g, xs[k])).epsilon(1e-14));
    }
}

TEST_CASE("path_norm examples") {
    CHECK(path_norm(net({1}, {{1, 1}}, {-1.5})) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(path_norm(net({0, 0}, {{1, 1}, {3, 2}}, {-1.5, 7})) == 0.0);

    // law of large numbers against the measure's bound
    const DiscreteMeasure m{2,
                            {{0.3, 1.0, vec({1, 1}), -1.5}, {0.5, -2.0, vec({0.5, -1}), 0.2}, {0.2, 0.5, vec({0, 3}), 1}}};
    const NetParams p = sample_atoms(m, 100000, 5);
    const double pn = path_norm(p);
    const double b = barron_norm_bound(m);
    CHECK(std::abs(pn * pn - b * b) <= 0.02 * b * b);
}

TEST_CASE("uniform bound |f| <= (L + |sigma(0)|) path_norm") {
    Rng rng(5);
    const std::vector<GroupAction> groups{make_reflection(1), make_reflection(3), make_symmetric(2), make_symmetric(3)};
    const std::vector<Activation> acts{Activation::relu(), Activation::sigmoid(), Activation::softplus(),
                                       Activation::hard_tanh(), Activation::bump(0.3)};
    for (int trial = 0; trial < 2500; ++trial) {
        const GroupAction& g = groups[static_cast<std::size_t>(trial) % groups.size()];
        const Activation& act = acts[static_cast<std::size_t>(trial / 4) % acts.size()];
        const NetParams p = random_net(rng, 1 + trial % 6, g.dim(), 3.0);
        const Vector x = random_point(rng, g.dim());
        const double bound = (act.lipschitz() + std::abs(act.value_at_zero())) * path_norm(p);
        CHECK(std::abs(forward_invariant(p, act, g, x)) <= bound * (1 + 1e-12));
    }
}

TEST_CASE("gradient examples") {
    // exact fit, lambda = 0: zero gradient
    Rng rng(6);
    const NetParams p = random_net(rng, 4, 2);
    const GroupAction g = make_cyclic_2d(4);
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int k = 0; k < 10; ++k) {
        xs.push_back(random_point(rng, 2));
        ys.push_back(forward_invariant(p, Activation::tanh(), g, xs.back()));
    }
    const NetParams zero = grad_objective(p, Activation::tanh(), g, xs, ys, 0.0);
    CHECK(std::sqrt(zero.a.squaredNorm() + zero.w.squaredNorm() + zero.b.squaredNorm()) < 1e-12);

    // regularizer alone: d/da (|a| (||w||_1 + |b| + 1))^2 / m = 2 a s^2 = 40.5
    const NetParams q = net({1}, {{1, 1}}, {-1.5});
    const std::vector<Vector> far{vec({-1, -1})};  // relu dead zone, so the data term is flat
    const std::vector<double> y0{0.0};
    const double lambda = 0.3;
    const NetParams gr = grad_objective(q, Activation::relu(), make_trivial(2), far, y0, lambda);
    CHECK(gr.a(0) == doctest::Approx(40.5 * lambda).epsilon(1e-14));
    // d/dw_c = 2 a^2 s sign(w_c), d/db = 2 a^2 s sign(b)
    CHECK(gr.w(0, 0) == doctest::Approx(9.0 * lambda).epsilon(1e-14));
    CHECK(gr.b(0) == doctest::Approx(-9.0 * lambda).epsilon(1e-14));

    // sign(0) = 0 keeps a zero weight still under the regularizer
    const NetParams z = net({1}, {{0, 1}}, {-1.5});
    CHECK(grad_objective(z, Activation::relu(), make_trivial(2), far, y0, lambda).w(0, 0) == 0.0);

    CHECK_THROWS_AS(grad_objective(q, Activation::relu(), make_trivial(2), {}, {}, 0.0), DomainError);
    CHECK_THROWS_AS(grad_objective(q, Activation::relu(), make_trivial(2), far, y0, -1.0), DomainError);
}

TEST_CASE("gradient matches finite differences: C_4, sigmoid, m = 3") {
    Rng rng(7);
    const GroupAction g = make_cyclic_2d(4);
    const Activation act = Activation::sigmoid();
    const NetParams p = random_net(rng, 3, 2);
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int k = 0; k < 8; ++k) {
        xs.push_back(random_point(rng, 2));
        ys.push_back(uniform(rng, -1, 1));
    }
    for (double lambda : {0.0, 0.05}) {
        check_gradient(grad_objective(p, act, g, xs, ys, lambda), fd_gradient(p, act, g, xs, ys, lambda, 1e-6), 1e-4);
    }
}

TEST_CASE("property: gradient check for every activation and group") {
    Rng rng(8);
    const std::vector<Activation> acts{Activation::relu(),     Activation::leaky_relu(0.2), Activation::hard_sigmoid(),
                                       Activation::hard_tanh(), Activation::sigmoid(),       Activation::tanh(),
                                       Activation::softplus(), Activation::silu(),          Activation::gelu(),
                                       Activation::bump(1.5)};
    for (const auto& act : acts) {
        CAPTURE(act.spec());
        for (const auto& g : {make_trivial(2), make_reflection(2), make_cyclic_2d(4), make_symmetric(2)}) {
            CAPTURE(g.name());
            int done = 0;
            while (done < 3) {
                const NetParams p = random_net(rng, 3, 2);
                std::vector<Vector> xs;
                std::vector<double> ys;
                for (int k = 0; k < 6; ++k) {
                    xs.push_back(random_point(rng, 2));
                    ys.push_back(uniform(rng, -1, 1));
                }
                if (kink_margin(p, act, g, xs) < 1e-3) continue;
                ++done;
                check_gradient(grad_objective(p, act, g, xs, ys, 0.01),
                               fd_gradient(p, act, g, xs, ys, 0.01, 1e-6), 1e-4);
            }
        }
    }
}

TEST_CASE("NetParams JSON round trip and shape checks") {
    Rng rng(9);
    const NetParams p = random_net(rng, 4, 3);
    const nlohmann::json j = to_json(p);
    CHECK(j.at("m") == 4);
    const NetParams back = net_params_from_json(j);
    CHECK(back.a == p.a);
    CHECK(back.w == p.w);
    CHECK(back.b == p.b);
    CHECK_THROWS_AS(NetParams(vec({1, 2}), Matrix::Zero(3, 2), vec({0, 0})), ShapeError);
    CHECK_THROWS_AS(net_params_from_json(nlohmann::json::parse(R"({"m":2,"a":[1],"w":[[1]],"b":[0]})")), ShapeError);
}
