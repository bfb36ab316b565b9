#include "barron/param_measures.hpp"

#include <algorithm>
#include <cmath>

namespace barron {

namespace {

constexpr double kMassTol = 1e-12;
constexpr std::size_t kEvalChunk = 512;

}  // namespace

void DiscreteMeasure::validate() const {
    if (atoms.empty()) throw DegenerateError("empty measure: no atoms");
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!(atom.p >= 0.0)) throw DomainError("measure atom has negative mass");
        require_dim(atom.w.size(), dim, "measure atom w");
        total += atom.p;
    }
    if (std::abs(total - 1.0) > kMassTol) {
        throw DomainError("measure mass sums to " + std::to_string(total) + ", not 1");
    }
}

DiscreteMeasure measure_from_json(const nlohmann::json& atoms, int dim) {
    DiscreteMeasure measure{dim, {}};
    for (const auto& item : atoms) {
        const auto w = item.at("w").get<std::vector<double>>();
        measure.atoms.push_back({item.at("p").get<double>(), item.at("a").get<double>(),
                                 Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())),
                                 item.at("b").get<double>()});
    }
    measure.validate();
    return measure;
}

nlohmann::json to_json(const DiscreteMeasure& measure) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& atom : measure.atoms) {
        out.push_back({{"p", atom.p},
                       {"a", atom.a},
                       {"w", std::vector<double>(atom.w.begin(), atom.w.end())},
                       {"b", atom.b}});
    }
    return out;
}

double barron_norm_bound(const DiscreteMeasure& measure) {
    measure.validate();
    double acc = 0.0;
    for (const auto& atom : measure.atoms) {
        const double s = atom.w.lpNorm<1>() + std::abs(atom.b) + 1.0;
        acc += atom.p * atom.a * atom.a * s * s;
    }
    return std::sqrt(acc);
}

DiscreteMeasure symmetrize(const DiscreteMeasure& measure, const GroupAction& group) {
    measure.validate();
    require_dim(group.dim(), measure.dim, "symmetrize");
    const double inv_order = 1.0 / static_cast<double>(group.order());
    DiscreteMeasure out{measure.dim, {}};
    out.atoms.reserve(measure.atoms.size() * group.order());
    for (const auto& atom : measure.atoms) {
        for (std::size_t s = 0; s < group.order(); ++s) {
            out.atoms.push_back({atom.p * inv_order, atom.a, group.apply_transpose(s, atom.w), atom.b});
        }
    }
    return out;
}

NetParams sample_atoms(const DiscreteMeasure& measure, int m, std::uint64_t seed) {
    measure.validate();
    if (m < 1) throw DomainError("sample_atoms: m must be >= 1");
    std::vector<double> cumulative;
    cumulative.reserve(measure.atoms.size());
    double acc = 0.0;
    for (const auto& atom : measure.atoms) cumulative.push_back(acc += atom.p);

    Rng rng(seed);
    NetParams out = NetParams::zeros(m, measure.dim);
    for (int i = 0; i < m; ++i) {
        const double u = uniform01(rng) * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        const auto& atom = measure.atoms[static_cast<std::size_t>(it - cumulative.begin())];
        out.a(i) = atom.a;
        out.w.row(i) = atom.w.transpose();
        out.b(i) = atom.b;
    }
    return out;
}

TargetFunction make_target(const DiscreteMeasure& measure, const Activation& act,
                           const GroupAction* group) {
    TargetFunction target{group ? symmetrize(measure, *group) : measure, act, 0.0, std::nullopt};
    target.measure.validate();
    target.barron_bound = barron_norm_bound(target.measure);
    if (group) target.invariant_under = group->name();
    return target;
}

double target_eval(const TargetFunction& target, const Vector& x) {
    require_dim(x.size(), target.measure.dim, "target_eval");
    double acc = 0.0;
    for (const auto& atom : target.measure.atoms) {
        acc += atom.p * atom.a * target.activation.eval(atom.w.dot(x) + atom.b);
    }
    return acc;
}

Vector target_eval_many(const TargetFunction& target, std::span<const Vector> xs) {
    const auto& atoms = target.measure.atoms;
    const auto n_atoms = static_cast<Eigen::Index>(atoms.size());
    const int d = target.measure.dim;
    Matrix w(n_atoms, d);
    Eigen::ArrayXd bias(n_atoms);
    Vector pa(n_atoms);
    for (Eigen::Index j = 0; j < n_atoms; ++j) {
        const auto& atom = atoms[static_cast<std::size_t>(j)];
        w.row(j) = atom.w.transpose();
        bias(j) = atom.b;
        pa(j) = atom.p * atom.a;
    }

    Vector out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t start = 0; start < xs.size(); start += kEvalChunk) {
        const std::size_t len = std::min(kEvalChunk, xs.size() - start);
        Eigen::MatrixXd pts(d, static_cast<Eigen::Index>(len));
        for (std::size_t k = 0; k < len; ++k) {
            require_dim(xs[start + k].size(), d, "target_eval");
            pts.col(static_cast<Eigen::Index>(k)) = xs[start + k];
        }
        Eigen::ArrayXXd z = (w * pts).array();
        z.colwise() += bias;
        target.activation.eval_inplace(z);
        out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) =
            (pa.transpose() * z.matrix()).transpose();
    }
    return out;
}

double invariance_defect(const TargetFunction& target, const GroupAction& group, int n_probes,
                         std::uint64_t seed) {
    require_dim(group.dim(), target.measure.dim, "invariance_defect");
    Rng rng(seed);
    double worst = 0.0;
    Vector x(group.dim());
    for (int k = 0; k < n_probes; ++k) {
        for (int c = 0; c < group.dim(); ++c) x(c) = uniform(rng, -1.0, 1.0);
        const double fx = target_eval(target, x);
        for (std::size_t s = 1; s < group.order(); ++s) {
            worst = std::max(worst, std::abs(target_eval(target, group.apply(s, x)) - fx));
        }
    }
    return worst;
}

}  // namespace barron
