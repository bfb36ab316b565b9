#pragma once

#include "barron/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace barron {

/// A finite group acting linearly on R^d, stored as its list of matrices.
///
/// Element 0 is always the identity. The remaining order is deterministic
/// (generator powers for cyclic groups, lexicographic permutations for S_d)
/// so that anything indexed by group element is reproducible.
class GroupAction {
public:
    /// Takes ownership of an explicit element list. No axioms are checked
    /// here; use verify_group() for that.
    GroupAction(std::string name, int dim, std::vector<Matrix> elements);

    int dim() const { return dim_; }
    std::size_t order() const { return elements_.size(); }
    const std::string& name() const { return name_; }
    const std::vector<Matrix>& elements() const { return elements_; }
    const Matrix& element(std::size_t s) const { return elements_.at(s); }

    /// g_s x
    Vector apply(std::size_t s, const Vector& x) const;
    /// g_s^T w, the action carried over to weight space.
    Vector apply_transpose(std::size_t s, const Vector& w) const;

    bool is_trivial() const { return elements_.size() == 1; }

private:
    std::string name_;
    int dim_;
    std::vector<Matrix> elements_;
};

GroupAction make_trivial(int d);
GroupAction make_reflection(int d);
GroupAction make_cyclic_2d(int n);
GroupAction make_symmetric(int d);

/// Parses "reflection:d", "cyclic2d:n", "symmetric:d" or "trivial:d".
GroupAction parse_group(std::string_view spec);

struct GroupVerification {
    bool identity_first = false;
    bool closure = false;
    bool inverses = false;
    bool distinct = false;
    double max_deviation = 0.0;  // worst entrywise miss over all matched checks

    bool ok() const { return identity_first && closure && inverses && distinct; }
};

GroupVerification verify_group(const GroupAction& group, double tol = 1e-12);

/// Entry s is element(s) * x.
std::vector<Vector> orbit(const GroupAction& group, const Vector& x);

}  // namespace barron
