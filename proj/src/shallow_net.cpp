#include "barron/shallow_net.hpp"

#include <algorithm>
#include <cmath>

namespace barron {

namespace {

// Keep each chunk's activation matrix around 1 MB so it stays off the mmap path.
constexpr std::size_t kChunkEntries = 1 << 17;

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Pre-activations w_i . g x_k + b_i, one column per orbit point.
Eigen::ArrayXXd preactivations(const NetParams& params, const OrbitBatch& batch) {
    Eigen::ArrayXXd z = (params.w * batch.points).array();
    z.colwise() += params.b.array();
    return z;
}

Vector group_average(const NetParams& params, const Eigen::ArrayXXd& s, const OrbitBatch& batch) {
    const auto m = static_cast<double>(params.width());
    const auto order = batch.group_order;
    const Eigen::RowVectorXd weighted = params.a.transpose() * s.matrix();
    Vector out(static_cast<Eigen::Index>(batch.n_points));
    for (std::size_t k = 0; k < batch.n_points; ++k) {
        double acc = 0.0;
        for (std::size_t g = 0; g < order; ++g) {
            acc += weighted(static_cast<Eigen::Index>(k * order + g));
        }
        out(static_cast<Eigen::Index>(k)) = acc / (m * static_cast<double>(order));
    }
    return out;
}

void check_batch(const NetParams& params, const OrbitBatch& batch) {
    params.validate();
    require_dim(batch.points.rows(), params.dim(), "network input");
}

}  // namespace

NetParams::NetParams(Vector a_, Matrix w_, Vector b_)
    : a(std::move(a_)), w(std::move(w_)), b(std::move(b_)) {
    validate();
}

NetParams NetParams::zeros(int width, int dim) {
    return {Vector::Zero(width), Matrix::Zero(width, dim), Vector::Zero(width)};
}

void NetParams::validate() const {
    if (w.rows() != a.size() || b.size() != a.size()) {
        throw ShapeError("NetParams: a, w, b disagree on width");
    }
    if (a.size() == 0) throw ShapeError("NetParams: width must be positive");
}

nlohmann::json to_json(const NetParams& params) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < params.w.rows(); ++i) {
        w.push_back(std::vector<double>(params.w.row(i).begin(), params.w.row(i).end()));
    }
    return {{"m", params.width()},
            {"a", std::vector<double>(params.a.begin(), params.a.end())},
            {"w", std::move(w)},
            {"b", std::vector<double>(params.b.begin(), params.b.end())}};
}

NetParams net_params_from_json(const nlohmann::json& j) {
    const auto a = j.at("a").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    const auto rows = j.at("w").get<std::vector<std::vector<double>>>();
    const int m = j.at("m").get<int>();
    if (static_cast<std::size_t>(m) != a.size() || rows.size() != a.size()) {
        throw ShapeError("NetParams JSON: width mismatch");
    }
    const auto d = rows.empty() ? 0 : rows.front().size();
    Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw ShapeError("NetParams JSON: ragged w");
        for (std::size_t c = 0; c < d; ++c) {
            w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    return {Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size())), std::move(w),
            Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()))};
}

OrbitBatch make_orbit_batch(const GroupAction& group, std::span<const Vector> xs) {
    OrbitBatch batch;
    batch.n_points = xs.size();
    batch.group_order = group.order();
    batch.points.resize(group.dim(), static_cast<Eigen::Index>(xs.size() * group.order()));
    for (std::size_t k = 0; k < xs.size(); ++k) {
        require_dim(xs[k].size(), group.dim(), "orbit batch point");
        for (std::size_t s = 0; s < group.order(); ++s) {
            batch.points.col(static_cast<Eigen::Index>(k * group.order() + s)) =
                group.element(s) * xs[k];
        }
    }
    return batch;
}

Vector forward_batch(const NetParams& params, const Activation& act, const OrbitBatch& batch) {
    check_batch(params, batch);
    Eigen::ArrayXXd s = preactivations(params, batch);
    act.eval_inplace(s);
    return group_average(params, s, batch);
}

double forward(const NetParams& params, const Activation& act, const Vector& x) {
    return forward_invariant(params, act, make_trivial(static_cast<int>(x.size())), x);
}

double forward_invariant(const NetParams& params, const Activation& act,
                         const GroupAction& group, const Vector& x) {
    require_dim(x.size(), params.dim(), "forward");
    require_dim(group.dim(), params.dim(), "forward group");
    const OrbitBatch batch = make_orbit_batch(group, std::span<const Vector>(&x, 1));
    return forward_batch(params, act, batch)(0);
}

Vector forward_many(const NetParams& params, const Activation& act, const GroupAction& group,
                    std::span<const Vector> xs) {
    Vector out(static_cast<Eigen::Index>(xs.size()));
    const std::size_t per_point = static_cast<std::size_t>(std::max(1, params.width())) * group.order();
    const std::size_t chunk = std::clamp<std::size_t>(kChunkEntries / per_point, 8, 512);
    for (std::size_t start = 0; start < xs.size(); start += chunk) {
        const std::size_t len = std::min(chunk, xs.size() - start);
        const OrbitBatch batch = make_orbit_batch(group, xs.subspan(start, len));
        out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) =
            forward_batch(params, act, batch);
    }
    return out;
}

double path_norm(const NetParams& params) {
    params.validate();
    double acc = 0.0;
    for (int i = 0; i < params.width(); ++i) {
        const double s = params.w.row(i).lpNorm<1>() + std::abs(params.b(i)) + 1.0;
        const double t = std::abs(params.a(i)) * s;
        acc += t * t;
    }
    return std::sqrt(acc / params.width());
}

ObjectiveValue objective(const NetParams& params, const Activation& act, const OrbitBatch& batch,
                         std::span<const double> ys, double lambda) {
    if (batch.n_points == 0) throw DomainError("objective: empty batch");
    if (ys.size() != batch.n_points) throw ShapeError("objective: xs and ys differ in length");
    const Vector f = forward_batch(params, act, batch);
    double loss = 0.0;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double r = f(static_cast<Eigen::Index>(k)) - ys[k];
        loss += r * r;
    }
    loss /= static_cast<double>(ys.size());
    const double pn = path_norm(params);
    return {loss, loss + lambda * (pn * pn + 1.0)};
}

ObjectiveValue objective_and_gradient(const NetParams& params, const Activation& act,
                                      const OrbitBatch& batch, std::span<const double> ys,
                                      double lambda, NetParams& grad) {
    check_batch(params, batch);
    if (batch.n_points == 0) throw DomainError("grad_objective: empty batch");
    if (ys.size() != batch.n_points) throw ShapeError("grad_objective: xs and ys differ in length");
    if (lambda < 0.0) throw DomainError("grad_objective: lambda must be >= 0");

    const int m = params.width();
    const auto order = batch.group_order;
    const auto n = static_cast<double>(batch.n_points);

    const Eigen::ArrayXXd z = preactivations(params, batch);
    Eigen::ArrayXXd s = z;
    act.eval_inplace(s);
    Eigen::ArrayXXd ds = z;
    act.deriv_inplace(ds);

    const Vector f = group_average(params, s, batch);

    // Per-column weight: (2/M) r_k / (m |G|), repeated over the orbit of x_k.
    const double scale = 2.0 / (n * m * static_cast<double>(order));
    Eigen::ArrayXd coef(static_cast<Eigen::Index>(batch.n_points * order));
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.n_points; ++k) {
        const double r = f(static_cast<Eigen::Index>(k)) - ys[k];
        loss += r * r;
        for (std::size_t g = 0; g < order; ++g) {
            coef(static_cast<Eigen::Index>(k * order + g)) = scale * r;
        }
    }
    loss /= n;

    ds.rowwise() *= coef.transpose();
    grad.a = s.matrix() * coef.matrix();
    grad.w = (ds.matrix() * batch.points.transpose()).array().colwise() * params.a.array();
    grad.b = ds.rowwise().sum().matrix().cwiseProduct(params.a);

    double pn_sq = 0.0;
    for (int i = 0; i < m; ++i) {
        const double sum_i = params.w.row(i).lpNorm<1>() + std::abs(params.b(i)) + 1.0;
        const double a_i = params.a(i);
        pn_sq += a_i * a_i * sum_i * sum_i;
        const double c = lambda * 2.0 / m;
        grad.a(i) += c * a_i * sum_i * sum_i;
        const double tail = c * a_i * a_i * sum_i;
        for (int j = 0; j < params.dim(); ++j) grad.w(i, j) += tail * sign0(params.w(i, j));
        grad.b(i) += tail * sign0(params.b(i));
    }
    pn_sq /= m;
    return {loss, loss + lambda * (pn_sq + 1.0)};
}

NetParams grad_objective(const NetParams& params, const Activation& act,
                         const GroupAction& group, std::span<const Vector> xs,
                         std::span<const double> ys, double lambda) {
    if (xs.empty()) throw DomainError("grad_objective: empty batch");
    require_dim(group.dim(), params.dim(), "grad_objective group");
    const OrbitBatch batch = make_orbit_batch(group, xs);
    NetParams grad = NetParams::zeros(params.width(), params.dim());
    objective_and_gradient(params, act, batch, ys, lambda, grad);
    return grad;
}

}  // namespace barron
