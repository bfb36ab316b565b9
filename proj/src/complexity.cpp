#include "barron/complexity.hpp"

#include "barron/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace barron {

namespace {

// Flop budget for exact enumeration, a few milliseconds of work.
constexpr double kArrangementBudget = 4e6;

constexpr int kMaxEnumerationBits = 24;

void require_samples(std::span<const Vector> S, const char* what) {
    if (S.empty()) throw DomainError(std::string(what) + ": empty sample");
    const auto d = S.front().size();
    for (const auto& x : S) require_dim(x.size(), d, what);
}

double sup_norm_of_signed_sum(std::span<const Vector> S, const std::vector<double>& xi) {
    Vector acc = Vector::Zero(S.front().size());
    for (std::size_t i = 0; i < S.size(); ++i) acc += xi[i] * S[i];
    return acc.cwiseAbs().maxCoeff();
}

McEstimate mean_and_stderr(const std::vector<double>& v) {
    McEstimate out;
    const double n = static_cast<double>(v.size());
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

std::vector<double> draw_signs(Rng& rng, std::size_t n) {
    std::vector<double> xi(n);
    for (auto& s : xi) s = (rng() >> 63) ? 1.0 : -1.0;
    return xi;
}

}  // namespace

McEstimate rademacher_linear(std::span<const Vector> S, int n_sign_draws, std::uint64_t seed) {
    require_samples(S, "rademacher_linear");
    if (n_sign_draws < 1) throw DomainError("rademacher_linear: n_sign_draws must be >= 1");
    const double M = static_cast<double>(S.size());
    std::vector<double> vals(static_cast<std::size_t>(n_sign_draws));
    for (int r = 0; r < n_sign_draws; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        vals[static_cast<std::size_t>(r)] = sup_norm_of_signed_sum(S, draw_signs(rng, S.size())) / M;
    }
    return mean_and_stderr(vals);
}

double rademacher_linear_exact(std::span<const Vector> S) {
    require_samples(S, "rademacher_linear_exact");
    if (S.size() > static_cast<std::size_t>(kMaxEnumerationBits)) {
        throw DomainError("rademacher_linear_exact: M too large to enumerate");
    }
    const std::size_t M = S.size();
    const std::uint64_t patterns = std::uint64_t{1} << M;
    std::vector<double> xi(M);
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        for (std::size_t i = 0; i < M; ++i) xi[i] = (mask >> i) & 1u ? 1.0 : -1.0;
        total += sup_norm_of_signed_sum(S, xi);
    }
    return total / static_cast<double>(patterns) / static_cast<double>(M);
}

double linear_rademacher_bound(std::span<const Vector> S) {
    require_samples(S, "linear_rademacher_bound");
    double sup = 0.0;
    for (const auto& x : S) sup = std::max(sup, x.cwiseAbs().maxCoeff());
    const double d = static_cast<double>(S.front().size());
    return sup * std::sqrt(2.0 * std::log(2.0 * d) / static_cast<double>(S.size()));
}

double rademacher_bound(double Q, int d, int M, double gamma) {
    if (!(Q > 0.0) || d < 1 || M < 1 || !(gamma > 0.0)) {
        throw DomainError("rademacher_bound: arguments must be positive");
    }
    return 4.0 * gamma * Q * std::sqrt(std::log(2.0 * d + 2.0) / M);
}

Vector project_l1_ball(const Vector& v, double radius) {
    if (!(radius > 0.0)) throw DomainError("project_l1_ball: radius must be positive");
    const Vector mag = v.cwiseAbs();
    if (mag.sum() <= radius) return v;
    // Simplex projection of |v|, then restore signs.
    std::vector<double> sorted(mag.begin(), mag.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumsum += sorted[j];
        const double t = (cumsum - radius) / static_cast<double>(j + 1);
        if (sorted[j] - t > 0.0) theta = t;
    }
    Vector out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double shrunk = std::max(mag(k) - theta, 0.0);
        out(k) = v(k) < 0.0 ? -shrunk : shrunk;
    }
    return out;
}

InvariantNeuronObjective::InvariantNeuronObjective(std::span<const Vector> S,
                                                   const GroupAction& group) {
    require_samples(S, "InvariantNeuronObjective");
    const int d = group.dim();
    require_dim(S.front().size(), d, "InvariantNeuronObjective");
    n_samples_ = static_cast<int>(S.size());
    group_order_ = group.order();
    points_.resize(d + 1, static_cast<Eigen::Index>(S.size() * group_order_));
    Eigen::Index col = 0;
    for (const auto& x : S) {
        for (std::size_t s = 0; s < group_order_; ++s, ++col) {
            points_.col(col).head(d) = group.apply(s, x);
            points_(d, col) = 1.0;
        }
    }
}

double InvariantNeuronObjective::value(const Vector& u, std::span<const double> xi) const {
    const Eigen::RowVectorXd z = (u.transpose() * points_).cwiseMax(0.0);
    double total = 0.0;
    Eigen::Index col = 0;
    for (int i = 0; i < n_samples_; ++i) {
        double avg = 0.0;
        for (std::size_t s = 0; s < group_order_; ++s, ++col) avg += z(col);
        total += xi[static_cast<std::size_t>(i)] * avg;
    }
    return total / static_cast<double>(group_order_);
}

Vector InvariantNeuronObjective::subgradient(const Vector& u, std::span<const double> xi) const {
    const Eigen::RowVectorXd z = u.transpose() * points_;
    Eigen::VectorXd coef(points_.cols());
    Eigen::Index col = 0;
    for (int i = 0; i < n_samples_; ++i) {
        for (std::size_t s = 0; s < group_order_; ++s, ++col) {
            coef(col) = z(col) > 0.0 ? xi[static_cast<std::size_t>(i)] : 0.0;
        }
    }
    return points_ * coef / static_cast<double>(group_order_);
}

double InvariantNeuronObjective::vertex_max(std::span<const double> xi) const {
    double best = 0.0;  // u = 0 is feasible
    Vector u = Vector::Zero(padded_dim());
    for (int k = 0; k < padded_dim(); ++k) {
        for (double sgn : {1.0, -1.0}) {
            u.setZero();
            u(k) = sgn;
            best = std::max(best, value(u, xi));
        }
    }
    return best;
}

// Near the optimum the ascent iterate zig-zags across kink hyperplanes. Snap it
// onto nearly active kinks and nearly zero coordinates, then rescale to the
// sphere; the objective is positively homogeneous so scaling up never hurts
// once the value is positive. Every candidate is feasible, so this only tightens.
double InvariantNeuronObjective::polish(const Vector& u, std::span<const double> xi) const {
    double best = value(u, xi);
    const double scale = u.cwiseAbs().maxCoeff();
    if (scale == 0.0) return best;
    for (double tol : {1e-4, 1e-3, 1e-2, 5e-2}) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index k = 0; k < u.size(); ++k) {
            if (std::abs(u(k)) > tol * scale) free.push_back(k);
        }
        if (free.empty()) continue;
        const Eigen::RowVectorXd z = u.transpose() * points_;
        std::vector<Eigen::Index> active;
        for (Eigen::Index c = 0; c < points_.cols(); ++c) {
            const double norm = points_.col(c).norm();
            if (std::abs(z(c)) <= tol * norm) active.push_back(c);
        }
        Vector cand = Vector::Zero(u.size());
        Vector uf(static_cast<Eigen::Index>(free.size()));
        for (std::size_t j = 0; j < free.size(); ++j) uf(static_cast<Eigen::Index>(j)) = u(free[j]);
        if (!active.empty()) {
            Eigen::MatrixXd A(static_cast<Eigen::Index>(active.size()),
                              static_cast<Eigen::Index>(free.size()));
            for (std::size_t r = 0; r < active.size(); ++r) {
                for (std::size_t j = 0; j < free.size(); ++j) {
                    A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                        points_(free[j], active[r]);
                }
            }
            // Orthogonal projection of uf onto null(A).
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A * A.transpose());
            uf -= A.transpose() * cod.solve(A * uf);
        }
        for (std::size_t j = 0; j < free.size(); ++j) cand(free[j]) = uf(static_cast<Eigen::Index>(j));
        const double l1 = cand.cwiseAbs().sum();
        if (!(l1 > 0.0)) continue;
        cand /= l1;
        best = std::max(best, value(cand, xi));
    }
    return best;
}

// The objective is positively homogeneous and linear on each cone cut out by the
// kink hyperplanes u . x~ = 0, so its max over the ball sits at a point of the
// sphere lying on D-1 independent hyperplanes drawn from the kinks and the
// coordinate planes u_k = 0. Each such choice pins a line; try both directions.
std::optional<double> InvariantNeuronObjective::arrangement_max(std::span<const double> xi) const {
    const int D = padded_dim();
    const auto n_cols = static_cast<double>(points_.cols());
    const Eigen::Index R = points_.cols() + D;
    double combos = 1.0;
    for (int k = 0; k < D - 1; ++k) combos = combos * static_cast<double>(R - k) / (k + 1);
    if (combos * n_cols * D > kArrangementBudget) return std::nullopt;

    Eigen::MatrixXd rows(R, D);
    rows.topRows(points_.cols()) = points_.transpose();
    rows.bottomRows(D) = Eigen::MatrixXd::Identity(D, D);

    double best = 0.0;
    const auto consider = [&](Vector v) {
        const double l1 = v.cwiseAbs().sum();
        if (!(l1 > 1e-14)) return;
        v /= l1;
        best = std::max({best, value(v, xi), value(-v, xi)});
    };
    if (D == 1) {
        consider(Vector::Ones(1));
        return best;
    }
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(D - 1));
    for (int k = 0; k < D - 1; ++k) pick[static_cast<std::size_t>(k)] = k;
    Eigen::MatrixXd A(D - 1, D);
    while (true) {
        if (D == 2) {
            consider(Vector{{-rows(pick[0], 1), rows(pick[0], 0)}});
        } else if (D == 3) {
            const Eigen::Vector3d a = rows.row(pick[0]).transpose();
            const Eigen::Vector3d b = rows.row(pick[1]).transpose();
            consider(a.cross(b));
        } else {
            for (int k = 0; k < D - 1; ++k) A.row(k) = rows.row(pick[static_cast<std::size_t>(k)]);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (lu.rank() == D - 1) consider(lu.kernel().col(0));
        }
        // next combination in lexicographic order
        int k = D - 2;
        while (k >= 0 && pick[static_cast<std::size_t>(k)] == R - (D - 1) + k) --k;
        if (k < 0) break;
        ++pick[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < D - 1; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

double InvariantNeuronObjective::maximize(std::span<const double> xi, int restarts,
                                          int ascent_steps, std::uint64_t seed) const {
    if (const auto exact = arrangement_max(xi)) return *exact;
    const int D = padded_dim();
    Rng rng(seed);
    double best = vertex_max(xi);
    Vector best_u = Vector::Zero(D);
    double best_ascent = 0.0;
    std::exponential_distribution<double> expo(1.0);

    for (int r = 0; r < restarts; ++r) {
        Vector u = Vector::Zero(D);
        if (r < restarts / 2) {
            const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(D));
            u(k) = (rng() >> 63) ? 1.0 : -1.0;
        } else {
            // Random direction on the l1 sphere, pulled to a random radius.
            for (Eigen::Index k = 0; k < D; ++k) u(k) = ((rng() >> 63) ? 1.0 : -1.0) * expo(rng);
            u *= uniform01(rng) / u.cwiseAbs().sum();
        }
        for (int t = 1; t <= ascent_steps; ++t) {
            const double v = value(u, xi);
            if (v > best_ascent) {
                best_ascent = v;
                best_u = u;
            }
            u = project_l1_ball(u + (0.1 / std::sqrt(static_cast<double>(t))) * subgradient(u, xi));
        }
        const double v = value(u, xi);
        if (v > best_ascent) {
            best_ascent = v;
            best_u = u;
        }
    }
    best = std::max(best, best_ascent);
    return std::max(best, polish(best_u, xi));
}

RademacherResult rademacher_invariant_neuron(std::span<const Vector> S, const GroupAction& group,
                                             double Q, const RademacherOptions& opts,
                                             std::uint64_t seed) {
    if (!(Q > 0.0)) throw DomainError("rademacher_invariant_neuron: Q must be positive");
    if (opts.n_sign_draws < 1 || opts.restarts < 0 || opts.ascent_steps < 0) {
        throw DomainError("rademacher_invariant_neuron: bad ascent options");
    }
    const InvariantNeuronObjective obj(S, group);
    const auto M = static_cast<std::size_t>(obj.n_samples());
    std::vector<double> sups(static_cast<std::size_t>(opts.n_sign_draws));
    parallel_for(sups.size(), opts.jobs, [&](std::size_t r) {
        // Signs and restart starts come from separate streams, so a run with a
        // different group on the same S sees the same signs.
        Rng sign_rng(derive_seed(seed, r, 0));
        const auto xi = draw_signs(sign_rng, M);
        sups[r] = obj.maximize(xi, opts.restarts, opts.ascent_steps, derive_seed(seed, r, 1));
    });
    const McEstimate mc = mean_and_stderr(sups);
    const double scale = 2.0 * Q / static_cast<double>(M);

    RademacherResult res;
    res.estimate = scale * mc.mean;
    res.stderr_ = scale * mc.stderr_;
    res.bound = rademacher_bound(Q, group.dim(), static_cast<int>(M), opts.gamma);
    res.n_sign_draws = opts.n_sign_draws;
    res.ascent_restarts = opts.restarts;
    return res;
}

ContractionCheck vector_contraction_check(std::span<const Vector> S, const GroupAction& group) {
    require_samples(S, "vector_contraction_check");
    const int d = group.dim();
    require_dim(S.front().size(), d, "vector_contraction_check");
    const std::size_t M = S.size();
    const std::size_t G = group.order();
    if (M * G > static_cast<std::size_t>(kMaxEnumerationBits)) {
        throw DomainError("vector_contraction_check: M |G| must be <= 24");
    }
    // y(k, i*G + s) = (g_s x~_i)_k, so u = +-e_k picks row k up to sign.
    Eigen::MatrixXd y(d + 1, static_cast<Eigen::Index>(M * G));
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t s = 0; s < G; ++s) {
            const auto col = static_cast<Eigen::Index>(i * G + s);
            y.col(col).head(d) = group.apply(s, S[i]);
            y(d, col) = 1.0;
        }
    }
    // h over the vertex family: value(k, sgn, i) = mean_s ReLU(sgn * y(k, i*G+s)).
    Eigen::MatrixXd h_pos(d + 1, static_cast<Eigen::Index>(M));
    Eigen::MatrixXd h_neg(d + 1, static_cast<Eigen::Index>(M));
    for (Eigen::Index k = 0; k <= d; ++k) {
        for (std::size_t i = 0; i < M; ++i) {
            double p = 0.0;
            double n = 0.0;
            for (std::size_t s = 0; s < G; ++s) {
                const double v = y(k, static_cast<Eigen::Index>(i * G + s));
                p += std::max(v, 0.0);
                n += std::max(-v, 0.0);
            }
            h_pos(k, static_cast<Eigen::Index>(i)) = p / static_cast<double>(G);
            h_neg(k, static_cast<Eigen::Index>(i)) = n / static_cast<double>(G);
        }
    }

    double lhs = 0.0;
    const std::uint64_t n_lhs = std::uint64_t{1} << M;
    for (std::uint64_t mask = 0; mask < n_lhs; ++mask) {
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k <= d; ++k) {
            double p = 0.0;
            double n = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                const double xi = (mask >> i) & 1u ? 1.0 : -1.0;
                p += xi * h_pos(k, static_cast<Eigen::Index>(i));
                n += xi * h_neg(k, static_cast<Eigen::Index>(i));
            }
            best = std::max({best, p, n});
        }
        lhs += best;
    }
    lhs /= static_cast<double>(n_lhs);

    double rhs = 0.0;
    const std::size_t n_bits = M * G;
    const std::uint64_t n_rhs = std::uint64_t{1} << n_bits;
    for (std::uint64_t mask = 0; mask < n_rhs; ++mask) {
        double best = 0.0;
        for (Eigen::Index k = 0; k <= d; ++k) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n_bits; ++c) {
                acc += ((mask >> c) & 1u ? 1.0 : -1.0) * y(k, static_cast<Eigen::Index>(c));
            }
            best = std::max(best, std::abs(acc));
        }
        rhs += best;
    }
    rhs /= static_cast<double>(n_rhs);

    ContractionCheck out;
    out.lhs = lhs;
    out.rhs = rhs;
    out.factor = std::sqrt(2.0) / std::sqrt(static_cast<double>(G));
    out.holds = lhs <= out.factor * rhs + 1e-12;
    return out;
}

}  // namespace barron
