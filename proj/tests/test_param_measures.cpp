#include "barron/param_measures.hpp"

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

DiscreteMeasure pair_measure(double b) {
    return {1, {{0.5, 1.0, vec({1.0}), b}, {0.5, 1.0, vec({-1.0}), b}}};
}

DiscreteMeasure random_measure(Rng& rng, int dim, int n_atoms) {
    DiscreteMeasure m{dim, {}};
    double total = 0.0;
    for (int j = 0; j < n_atoms; ++j) {
        Atom a;
        a.p = uniform(rng, 0.1, 1.0);
        total += a.p;
        a.a = uniform(rng, -2, 2);
        a.w = Vector(dim);
        for (auto& v : a.w) v = uniform(rng, -2, 2);
        a.b = uniform(rng, -1, 1);
        m.atoms.push_back(a);
    }
    for (auto& a : m.atoms) a.p /= total;
    // exact renormalization so the mass check passes
    double s = 0.0;
    for (auto& a : m.atoms) s += a.p;
    m.atoms.back().p += 1.0 - s;
    return m;
}

}  // namespace

TEST_CASE("barron_norm_bound examples") {
    CHECK(barron_norm_bound(pair_measure(-0.5)) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(barron_norm_bound({1, {{1.0, 0.0, vec({3.0}), 2.0}}}) == 0.0);
    CHECK(barron_norm_bound({2, {{1.0, 1.0, vec({1.0, 1.0}), -1.5}}}) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK_THROWS_AS(barron_norm_bound({1, {}}), DegenerateError);
}

TEST_CASE("measure validation") {
    CHECK_THROWS_AS(DiscreteMeasure({1, {{0.6, 1.0, vec({1.0}), 0.0}}}).validate(), DomainError);
    CHECK_THROWS_AS(DiscreteMeasure({1, {{1.5, 1.0, vec({1.0}), 0.0}, {-0.5, 1.0, vec({1.0}), 0.0}}}).validate(),
                    DomainError);
    CHECK_THROWS_AS(DiscreteMeasure({2, {{1.0, 1.0, vec({1.0}), 0.0}}}).validate(), ShapeError);
    CHECK_NOTHROW(pair_measure(0.5).validate());
}

TEST_CASE("target_eval examples") {
    const TargetFunction f = make_target(pair_measure(-0.5), Activation::relu());
    CHECK(target_eval(f, vec({0.75})) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(target_eval(f, vec({0.2})) == 0.0);  // both pre-activations negative
    CHECK(f.barron_bound == doctest::Approx(2.5).epsilon(1e-15));

    const TargetFunction c = make_target({2, {{1.0, 2.0, vec({0.0, 0.0}), 1.0}}}, Activation::relu());
    Rng rng(1);
    for (int k = 0; k < 20; ++k) CHECK(target_eval(c, vec({uniform(rng, -1, 1), uniform(rng, -1, 1)})) == 2.0);

    CHECK_THROWS_AS(target_eval(f, vec({0.1, 0.2})), ShapeError);
}

TEST_CASE("symmetrize examples") {
    const DiscreteMeasure one{1, {{1.0, 1.0, vec({1.0}), -0.5}}};
    const DiscreteMeasure s = symmetrize(one, make_reflection(1));
    REQUIRE(s.atoms.size() == 2);
    CHECK(s.atoms[0].p == 0.5);
    CHECK(s.atoms[1].p == 0.5);
    CHECK(s.atoms[0].w(0) == 1.0);
    CHECK(s.atoms[1].w(0) == -1.0);
    CHECK(s.atoms[1].b == -0.5);

    const DiscreteMeasure corner{2, {{1.0, 1.0, vec({1.0, 1.0}), -1.5}}};
    const DiscreteMeasure c4 = symmetrize(corner, make_cyclic_2d(4));
    REQUIRE(c4.atoms.size() == 4);
    // g^T w over C_4 visits the four diagonal directions
    std::vector<std::pair<double, double>> seen;
    for (const auto& a : c4.atoms) {
        CHECK(a.p == 0.25);
        seen.emplace_back(std::round(a.w(0)), std::round(a.w(1)));
        CHECK((a.w - a.w.array().round().matrix()).norm() < 1e-15);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<std::pair<double, double>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});

    // already symmetric: values unchanged
    Rng rng(2);
    const TargetFunction f0 = make_target(pair_measure(-0.3), Activation::relu());
    const TargetFunction f1 = make_target(symmetrize(pair_measure(-0.3), make_reflection(1)), Activation::relu());
    for (int k = 0; k < 1000; ++k) {
        const Vector x = vec({uniform(rng, -1, 1)});
        CHECK(std::abs(target_eval(f0, x) - target_eval(f1, x)) <= 1e-12);
    }

    CHECK_THROWS_AS(symmetrize(corner, make_reflection(1)), ShapeError);
}

TEST_CASE("sample_atoms examples") {
    const DiscreteMeasure one{2, {{1.0, 0.7, vec({0.3, -0.2}), 0.1}}};
    const NetParams p = sample_atoms(one, 5, 9);
    REQUIRE(p.width() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(p.a(i) == 0.7);
        CHECK(p.w(i, 0) == 0.3);
        CHECK(p.w(i, 1) == -0.2);
        CHECK(p.b(i) == 0.1);
    }

    const NetParams big = sample_atoms(pair_measure(-0.5), 100000, 1234);
    int first = 0;
    for (int i = 0; i < big.width(); ++i) first += big.w(i, 0) > 0 ? 1 : 0;
    const double freq = first / 100000.0;
    CHECK(freq >= 0.49);
    CHECK(freq <= 0.51);

    const NetParams again = sample_atoms(pair_measure(-0.5), 100000, 1234);
    CHECK(big.a == again.a);
    CHECK(big.w == again.w);
    CHECK(big.b == again.b);

    // categorical frequencies follow p for unequal weights (chi-square style check)
    const DiscreteMeasure tri{1, {{0.2, 1.0, vec({1.0}), 0.0}, {0.3, 2.0, vec({1.0}), 0.0}, {0.5, 3.0, vec({1.0}), 0.0}}};
    const NetParams t = sample_atoms(tri, 60000, 5);
    double counts[3] = {0, 0, 0};
    for (int i = 0; i < t.width(); ++i) counts[static_cast<int>(t.a(i)) - 1] += 1;
    const double probs[3] = {0.2, 0.3, 0.5};
    for (int j = 0; j < 3; ++j) {
        const double sd = std::sqrt(60000 * probs[j] * (1 - probs[j]));
        CHECK(std::abs(counts[j] - 60000 * probs[j]) < 4 * sd);
    }
    CHECK_THROWS_AS(sample_atoms(tri, 0, 1), DomainError);
}

TEST_CASE("property: symmetrization preserves mass, invariance and signed-permutation norms") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        for (const auto& g : {make_reflection(1), make_reflection(3), make_symmetric(3), make_cyclic_2d(4),
                              make_cyclic_2d(6)}) {
            CAPTURE(g.name());
            const DiscreteMeasure base = random_measure(rng, g.dim(), 3);
            const DiscreteMeasure sym = symmetrize(base, g);
            double mass = 0.0;
            for (const auto& a : sym.atoms) mass += a.p;
            CHECK(std::abs(mass - 1.0) < 1e-12);
            CHECK(sym.atoms.size() == base.atoms.size() * g.order());
            const bool signed_perm = g.name().rfind("cyclic2d:6", 0) != 0;
            if (signed_perm) CHECK(std::abs(barron_norm_bound(sym) - barron_norm_bound(base)) < 1e-12);

            const TargetFunction f = make_target(base, Activation::tanh().with_gamma0(), &g);
            CHECK(f.invariant_under.has_value());
            CHECK(invariance_defect(f, g, 1000, 77) < 1e-10);
        }
    }
    // reflection: exact equality of the bound
    const DiscreteMeasure base = random_measure(rng, 2, 4);
    CHECK(barron_norm_bound(symmetrize(base, make_reflection(2))) == barron_norm_bound(base));
}

TEST_CASE("non-symmetrized target fails the invariance probe") {
    const TargetFunction f = make_target({1, {{1.0, 1.0, vec({1.0}), -0.5}}}, Activation::relu());
    CHECK_FALSE(f.invariant_under.has_value());
    CHECK(invariance_defect(f, make_reflection(1), 1000, 3) > 0.1);
}

TEST_CASE("measure JSON") {
    const nlohmann::json atoms = nlohmann::json::parse(R"([{"p":0.5,"a":1.0,"w":[1.0],"b":-0.5},
                                                           {"p":0.5,"a":1.0,"w":[-1.0],"b":-0.5}])");
    const DiscreteMeasure m = measure_from_json(atoms, 1);
    CHECK(barron_norm_bound(m) == doctest::Approx(2.5));
    const DiscreteMeasure back = measure_from_json(to_json(m), 1);
    REQUIRE(back.atoms.size() == 2);
    CHECK(back.atoms[1].w(0) == -1.0);
    CHECK_THROWS(measure_from_json(atoms, 2));
    CHECK_THROWS(measure_from_json(nlohmann::json::parse(R"([{"p":0.5,"a":1.0,"w":[1.0],"b":-0.5}])"), 1));
}
