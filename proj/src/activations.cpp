#include "barron/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace barron {

namespace {

constexpr double kSiluLipschitz = 1.0998393201288669;  // sup |silu'| at x ~ 2.3994
constexpr double kGeluLipschitz = 1.1289041451851548;  // sup |gelu'| at x = sqrt(2)
// sup_u 6 u (1 - u^2)^2 at u = 1/sqrt(5), before dividing by the half-width.
const double kBumpSlope = 96.0 / (25.0 * std::sqrt(5.0));

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double parse_double(std::string_view text, std::string_view spec) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("bad number in activation spec '" + std::string(spec) + "'");
    }
    return value;
}

void check_finite(double x) {
    if (std::isnan(x)) throw DomainError("activation evaluated at NaN");
}

}  // namespace

double ReluRepresentation::operator()(double x) const {
    double s = offset;
    for (const auto& t : terms) s += t.a * std::max(t.w * x + t.b, 0.0);
    return s;
}

double ReluRepresentation::weighted_norm() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.a) * (std::abs(t.w) + std::abs(t.b));
    return s;
}

Activation::Activation(ActivationKind kind, double param, double lipschitz,
                       double value_at_zero, std::optional<double> gamma)
    : kind_(kind),
      param_(param),
      lipschitz_(lipschitz),
      value_at_zero_(value_at_zero),
      gamma_(gamma) {}

Activation Activation::relu() { return {ActivationKind::relu, 0.0, 1.0, 0.0, 1.0}; }

Activation Activation::leaky_relu(double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw DomainError("leaky_relu slope must lie in (0, 1)");
    }
    return {ActivationKind::leaky_relu, slope, 1.0, 0.0, 1.0 + slope};
}

Activation Activation::hard_sigmoid() {
    return {ActivationKind::hard_sigmoid, 0.0, 0.5, 0.5, 2.0};
}

Activation Activation::hard_tanh() { return {ActivationKind::hard_tanh, 0.0, 1.0, 0.0, 4.0}; }

Activation Activation::sigmoid() {
    return {ActivationKind::sigmoid, 0.0, 0.25, 0.5, std::nullopt};
}

Activation Activation::tanh() { return {ActivationKind::tanh, 0.0, 1.0, 0.0, std::nullopt}; }

Activation Activation::softplus() {
    return {ActivationKind::softplus, 0.0, 1.0, std::numbers::ln2, std::nullopt};
}

Activation Activation::silu() {
    return {ActivationKind::silu, 0.0, kSiluLipschitz, 0.0, std::nullopt};
}

Activation Activation::gelu() {
    return {ActivationKind::gelu, 0.0, kGeluLipschitz, 0.0, std::nullopt};
}

Activation Activation::bump(double half_width) {
    if (!(half_width > 0.0)) throw DomainError("bump half-width must be positive");
    return {ActivationKind::bump, half_width, kBumpSlope / half_width, 1.0, std::nullopt};
}

Activation Activation::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    const auto name = spec.substr(0, colon);
    const bool has_arg = colon != std::string_view::npos;
    auto arg = [&]() {
        if (!has_arg) throw ConfigError("activation '" + std::string(name) + "' needs a parameter");
        return parse_double(spec.substr(colon + 1), spec);
    };
    auto no_arg = [&](Activation act) {
        if (has_arg) throw ConfigError("activation '" + std::string(name) + "' takes no parameter");
        return act;
    };

    try {
        if (name == "relu") return no_arg(relu());
        if (name == "leaky_relu") return leaky_relu(arg());
        if (name == "hard_sigmoid") return no_arg(hard_sigmoid());
        if (name == "hard_tanh") return no_arg(hard_tanh());
        if (name == "sigmoid") return no_arg(sigmoid()).with_gamma0();
        if (name == "tanh") return no_arg(tanh()).with_gamma0();
        if (name == "softplus") return no_arg(softplus()).with_gamma0();
        if (name == "silu") return no_arg(silu()).with_gamma0();
        if (name == "gelu") return no_arg(gelu()).with_gamma0();
        if (name == "bump") return bump(arg()).with_gamma0();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown activation '" + std::string(spec) + "'");
}

std::string Activation::spec() const {
    auto num = [](double v) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        return std::string(buf, ptr);
    };
    switch (kind_) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::leaky_relu: return "leaky_relu:" + num(param_);
        case ActivationKind::hard_sigmoid: return "hard_sigmoid";
        case ActivationKind::hard_tanh: return "hard_tanh";
        case ActivationKind::sigmoid: return "sigmoid";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::softplus: return "softplus";
        case ActivationKind::silu: return "silu";
        case ActivationKind::gelu: return "gelu";
        case ActivationKind::bump: return "bump:" + num(param_);
    }
    return "unknown";
}

bool Activation::piecewise_linear() const {
    switch (kind_) {
        case ActivationKind::relu:
        case ActivationKind::leaky_relu:
        case ActivationKind::hard_sigmoid:
        case ActivationKind::hard_tanh: return true;
        default: return false;
    }
}

std::vector<double> Activation::kinks() const {
    switch (kind_) {
        case ActivationKind::relu:
        case ActivationKind::leaky_relu: return {0.0};
        case ActivationKind::hard_sigmoid:
        case ActivationKind::hard_tanh: return {-1.0, 1.0};
        default: return {};
    }
}

bool Activation::monotone_increasing() const {
    switch (kind_) {
        case ActivationKind::silu:
        case ActivationKind::gelu:
        case ActivationKind::bump: return false;
        default: return true;
    }
}

double Activation::eval(double x) const {
    check_finite(x);
    switch (kind_) {
        case ActivationKind::relu: return std::max(x, 0.0);
        case ActivationKind::leaky_relu: return x >= 0.0 ? x : param_ * x;
        case ActivationKind::hard_sigmoid: return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
        case ActivationKind::hard_tanh: return std::clamp(x, -1.0, 1.0);
        case ActivationKind::sigmoid: return logistic(x);
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::softplus: return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
        case ActivationKind::silu: return x * logistic(x);
        case ActivationKind::gelu: return x * std_normal_cdf(x);
        case ActivationKind::bump: {
            const double u = x / param_;
            if (std::abs(u) >= 1.0) return 0.0;
            const double v = 1.0 - u * u;
            return v * v * v;
        }
    }
    return 0.0;
}

double Activation::deriv(double x) const {
    check_finite(x);
    switch (kind_) {
        case ActivationKind::relu: return x >= 0.0 ? 1.0 : 0.0;
        case ActivationKind::leaky_relu: return x >= 0.0 ? 1.0 : param_;
        case ActivationKind::hard_sigmoid: return (x >= -1.0 && x < 1.0) ? 0.5 : 0.0;
        case ActivationKind::hard_tanh: return (x >= -1.0 && x < 1.0) ? 1.0 : 0.0;
        case ActivationKind::sigmoid: {
            const double s = logistic(x);
            return s * (1.0 - s);
        }
        case ActivationKind::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::softplus: return logistic(x);
        case ActivationKind::silu: {
            const double s = logistic(x);
            return s * (1.0 + x * (1.0 - s));
        }
        case ActivationKind::gelu: return std_normal_cdf(x) + x * std_normal_pdf(x);
        case ActivationKind::bump: {
            const double u = x / param_;
            if (std::abs(u) >= 1.0) return 0.0;
            const double v = 1.0 - u * u;
            return -6.0 * u * v * v / param_;
        }
    }
    return 0.0;
}

double Activation::second_deriv(double x) const {
    check_finite(x);
    switch (kind_) {
        case ActivationKind::sigmoid:
        case ActivationKind::softplus: {
            // softplus'' = sigmoid' and sigmoid'' = s(1-s)(1-2s)
            const double s = logistic(x);
            return kind_ == ActivationKind::softplus ? s * (1.0 - s)
                                                     : s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case ActivationKind::tanh: {
            const double t = std::tanh(x);
            return -2.0 * t * (1.0 - t * t);
        }
        case ActivationKind::silu: {
            const double s = logistic(x);
            return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
        }
        case ActivationKind::gelu: return std_normal_pdf(x) * (2.0 - x * x);
        case ActivationKind::bump: {
            const double u = x / param_;
            if (std::abs(u) >= 1.0) return 0.0;
            return -6.0 * (1.0 - u * u) * (1.0 - 5.0 * u * u) / (param_ * param_);
        }
        default:
            throw NotApplicableError("second derivative is a sum of Dirac masses for " + spec());
    }
}

void Activation::eval_inplace(Eigen::Ref<Eigen::ArrayXXd> z) const {
    switch (kind_) {
        case ActivationKind::relu: z = z.max(0.0); return;
        case ActivationKind::leaky_relu: z = (z >= 0.0).select(z, param_ * z); return;
        case ActivationKind::hard_sigmoid: z = (0.5 * (z + 1.0)).max(0.0).min(1.0); return;
        case ActivationKind::hard_tanh: z = z.max(-1.0).min(1.0); return;
        case ActivationKind::tanh: z = z.tanh(); return;
        default: z = z.unaryExpr([this](double v) { return eval(v); }); return;
    }
}

void Activation::deriv_inplace(Eigen::Ref<Eigen::ArrayXXd> z) const {
    switch (kind_) {
        case ActivationKind::relu: z = (z >= 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()), 0.0); return;
        default: z = z.unaryExpr([this](double v) { return deriv(v); }); return;
    }
}

ActivationConstants Activation::constants() const {
    if (!gamma_) {
        throw MissingConstantError("gamma not populated for " + spec() +
                                   "; call with_gamma0() first");
    }
    return {lipschitz_, value_at_zero_, *gamma_};
}

ReluRepresentation Activation::relu_representation() const {
    switch (kind_) {
        case ActivationKind::relu: return {{{1.0, 1.0, 0.0}}, 0.0};
        case ActivationKind::leaky_relu: return {{{1.0, 1.0, 0.0}, {-param_, -1.0, 0.0}}, 0.0};
        case ActivationKind::hard_sigmoid: return {{{0.5, 1.0, 1.0}, {-0.5, 1.0, -1.0}}, 0.0};
        // The constant -1 is carried as an offset and does not enter the weighted norm.
        case ActivationKind::hard_tanh: return {{{1.0, 1.0, 1.0}, {-1.0, 1.0, -1.0}}, -1.0};
        default:
            throw NotApplicableError(spec() + " has no exact finite ReLU representation");
    }
}

Activation Activation::with_gamma0(double half_width, int n_points) const {
    Activation out = *this;
    out.gamma_ = estimate_gamma0(*this, half_width, n_points);
    return out;
}

double estimate_gamma0(const Activation& act, double half_width, int n_points) {
    if (act.piecewise_linear()) {
        throw NotApplicableError("gamma is exact for piecewise-linear " + act.spec());
    }
    if (!(half_width > 0.0) || n_points < 2) {
        throw DomainError("estimate_gamma0 needs half_width > 0 and n_points >= 2");
    }
    // The bump's second derivative jumps at the edge of its support, which
    // Simpson handles badly, so stop there.
    const double a = act.kind() == ActivationKind::bump ? std::min(half_width, act.param()) : half_width;
    const int n = n_points % 2 == 0 ? n_points : n_points + 1;
    const double h = 2.0 * a / n;
    auto f = [&](double x) { return std::abs(act.second_deriv(x)) * (std::abs(x) + 1.0); };

    double sum = f(-a) + f(a);
    for (int k = 1; k < n; ++k) {
        const double x = -a + k * h;
        sum += (k % 2 == 1 ? 4.0 : 2.0) * f(x);
    }
    return sum * h / 3.0;
}

}  // namespace barron
