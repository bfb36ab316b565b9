#include "barron/group_actions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace barron {

namespace {

constexpr int kMaxSymmetricDim = 7;

double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Index of the element closest to m, with its deviation.
std::pair<std::size_t, double> nearest_element(const std::vector<Matrix>& elements,
                                               const Matrix& m) {
    std::size_t best = 0;
    double best_dev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const double dev = max_abs_diff(elements[k], m);
        if (dev < best_dev) {
            best_dev = dev;
            best = k;
        }
    }
    return {best, best_dev};
}

int parse_int(std::string_view text, std::string_view spec) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("bad integer in group spec '" + std::string(spec) + "'");
    }
    return value;
}

}  // namespace

GroupAction::GroupAction(std::string name, int dim, std::vector<Matrix> elements)
    : name_(std::move(name)), dim_(dim), elements_(std::move(elements)) {
    if (dim_ < 1) throw ShapeError("group dimension must be positive");
    if (elements_.empty()) throw ShapeError("group must have at least one element");
    for (const auto& e : elements_) {
        if (e.rows() != dim_ || e.cols() != dim_) {
            throw ShapeError("group element is not " + std::to_string(dim_) + "x" +
                             std::to_string(dim_));
        }
    }
}

Vector GroupAction::apply(std::size_t s, const Vector& x) const {
    require_dim(x.size(), dim_, "GroupAction::apply");
    return elements_.at(s) * x;
}

Vector GroupAction::apply_transpose(std::size_t s, const Vector& w) const {
    require_dim(w.size(), dim_, "GroupAction::apply_transpose");
    return elements_.at(s).transpose() * w;
}

GroupAction make_trivial(int d) {
    if (d < 1) throw ShapeError("trivial group needs d >= 1");
    return GroupAction("trivial:" + std::to_string(d), d, {Matrix::Identity(d, d)});
}

GroupAction make_reflection(int d) {
    if (d < 1) throw ShapeError("reflection group needs d >= 1");
    Matrix id = Matrix::Identity(d, d);
    Matrix neg = -id;
    return GroupAction("reflection:" + std::to_string(d), d, {id, neg});
}

GroupAction make_cyclic_2d(int n) {
    if (n < 1) throw DomainError("cyclic group order must be >= 1, got " + std::to_string(n));
    std::vector<Matrix> elements;
    elements.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Matrix r(2, 2);
        if (4 * k % n == 0) {
            // Quarter turns get exact entries so C_4 is exactly a signed permutation group.
            const int quarter = (4 * k / n) % 4;
            static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
            static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
            r << c[quarter], -s[quarter], s[quarter], c[quarter];
        } else {
            const double theta = 2.0 * std::numbers::pi * k / n;
            r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        }
        elements.push_back(std::move(r));
    }
    return GroupAction("cyclic2d:" + std::to_string(n), 2, std::move(elements));
}

GroupAction make_symmetric(int d) {
    if (d < 1) throw ShapeError("symmetric group needs d >= 1");
    if (d > kMaxSymmetricDim) {
        throw DomainError("symmetric group capped at d <= 7 (d! elements), got " +
                          std::to_string(d));
    }
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<Matrix> elements;
    // (g x)_i = x_{perm[i]}; lexicographic order starts at the identity.
    do {
        Matrix p = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
        elements.push_back(std::move(p));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return GroupAction("symmetric:" + std::to_string(d), d, std::move(elements));
}

GroupAction parse_group(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("group spec '" + std::string(spec) + "' must look like kind:N");
    }
    const auto kind = spec.substr(0, colon);
    const int n = parse_int(spec.substr(colon + 1), spec);
    if (kind == "reflection") return make_reflection(n);
    if (kind == "cyclic2d") return make_cyclic_2d(n);
    if (kind == "symmetric") return make_symmetric(n);
    if (kind == "trivial") return make_trivial(n);
    throw ConfigError("unknown group kind '" + std::string(kind) + "'");
}

GroupVerification verify_group(const GroupAction& group, double tol) {
    GroupVerification report;
    const auto& el = group.elements();
    const int d = group.dim();
    const Matrix id = Matrix::Identity(d, d);

    const double id_dev = max_abs_diff(el.front(), id);
    report.max_deviation = id_dev;
    report.identity_first = id_dev <= tol;

    report.closure = true;
    for (const auto& gi : el) {
        for (const auto& gj : el) {
            auto [k, dev] = nearest_element(el, gi * gj);
            (void)k;
            report.max_deviation = std::max(report.max_deviation, dev);
            if (dev > tol) report.closure = false;
        }
    }

    report.inverses = true;
    for (const auto& gi : el) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& gj : el) best = std::min(best, max_abs_diff(gi * gj, id));
        report.max_deviation = std::max(report.max_deviation, best);
        if (best > tol) report.inverses = false;
    }

    report.distinct = true;
    for (std::size_t i = 0; i < el.size(); ++i) {
        for (std::size_t j = i + 1; j < el.size(); ++j) {
            if (max_abs_diff(el[i], el[j]) <= tol) report.distinct = false;
        }
    }
    return report;
}

std::vector<Vector> orbit(const GroupAction& group, const Vector& x) {
    require_dim(x.size(), group.dim(), "orbit");
    std::vector<Vector> out;
    out.reserve(group.order());
    for (const auto& g : group.elements()) out.emplace_back(g * x);
    return out;
}

}  // namespace barron
