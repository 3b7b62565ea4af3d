#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "qrel/errors.hpp"
#include "qrel/hilbert.hpp"
#include "qrel/linalg.hpp"

namespace qrel {

/// Singular values below this count as zero when deciding Schmidt rank.
inline constexpr double kSchmidtRankTol = 1e-9;
/// Coefficient deviation allowed before a basis change counts as a change.
inline constexpr double kRotationInvarianceTol = 1e-9;

/// Unit vector over the ordered product basis {|00>, |01>, |10>, |11>}.
class CompositeState {
  public:
    explicit CompositeState(const Vec4 &coefficients) : c_(coefficients) {
        if (!c_.is_unit()) {
            throw InputError("composite state must have unit norm");
        }
    }

    const Vec4 &coefficients() const { return c_; }
    /// Coefficient of |ij>.
    double coefficient(std::size_t i, std::size_t j) const { return c_[2 * i + j]; }

  private:
    Vec4 c_;
};

/// 4x4 symmetric observable on the pair space, squaring to identity.
class CompositeObservable {
  public:
    explicit CompositeObservable(const Mat4 &m) : matrix_(m) {
        if (!m.is_symmetric(kStructuralTol)) {
            throw InputError("composite observable must be symmetric");
        }
        if ((m * m).max_abs_diff(Mat4::identity()) > kStructuralTol) {
            throw InputError("composite observable must square to the identity");
        }
    }

    const Mat4 &matrix() const { return matrix_; }

  private:
    Mat4 matrix_;
};

struct SchmidtDecomposition {
    std::array<double, 2> singular_values{0.0, 0.0}; ///< descending
    int rank = 0;                                    ///< values above kSchmidtRankTol
};

enum class BellStateKind { phi_plus };

inline CompositeState tensor_product(const Vec2 &d1, const Vec2 &d2) {
    if (!d1.is_unit() || !d2.is_unit()) {
        throw InputError("tensor product requires unit-norm factors");
    }
    return CompositeState(
        Vec4{{d1.x * d2.x, d1.x * d2.y, d1.y * d2.x, d1.y * d2.y}});
}

inline CompositeObservable tensor_observable(const Observable &a,
                                             const Observable &b) {
    return CompositeObservable(Mat4::kronecker(a.matrix(), b.matrix()));
}

/// <psi| M |psi>.
inline double composite_expectation(const CompositeObservable &obs,
                                    const CompositeState &psi) {
    return psi.coefficients().dot(obs.matrix() * psi.coefficients());
}

inline CompositeState bell_state(BellStateKind kind) {
    switch (kind) {
    case BellStateKind::phi_plus: {
        const double r = std::sqrt(0.5);
        return CompositeState(Vec4{{r, 0.0, 0.0, r}});
    }
    }
    throw InputError("unknown Bell state kind");
}

/// Closed-form singular values of the 2x2 coefficient matrix
/// [[c00, c01], [c10, c11]]. For a unit state they satisfy s1^2 + s2^2 = 1;
/// rank 1 means the state is a tensor product.
inline SchmidtDecomposition schmidt_decompose(const CompositeState &psi) {
    const Vec4 &c = psi.coefficients();
    const double frob2 = c.squared_norm();
    const double det = c[0] * c[3] - c[1] * c[2];
    const double plus = std::sqrt(std::max(0.0, frob2 + 2.0 * std::abs(det)));
    const double minus = std::sqrt(std::max(0.0, frob2 - 2.0 * std::abs(det)));
    SchmidtDecomposition out;
    out.singular_values = {(plus + minus) / 2.0, (plus - minus) / 2.0};
    out.rank = 0;
    for (const double s : out.singular_values) {
        if (s > kSchmidtRankTol) ++out.rank;
    }
    return out;
}

struct RotationCheckEntry {
    Basis2 basis;
    std::array<double, 4> coefficients{}; ///< psi re-expressed in basis x basis
    double max_deviation = 0.0;           ///< against the original coefficients
};

struct RotationInvarianceReport {
    bool invariant = true;
    std::vector<RotationCheckEntry> entries;
};

/// Re-expresses psi in each supplied product basis, applying the same basis
/// to both factors, and reports whether every coefficient set matches the
/// original within kRotationInvarianceTol. Bell states pass for every basis;
/// product states do not.
inline RotationInvarianceReport
rotational_invariance_check(const CompositeState &psi,
                            std::span<const Basis2> bases) {
    RotationInvarianceReport report;
    report.entries.reserve(bases.size());
    for (const Basis2 &basis : bases) {
        if (!basis.is_orthonormal()) {
            throw InputError("rotational invariance check requires orthonormal bases");
        }
        const Vec2 e[2] = {basis.first, basis.second};
        RotationCheckEntry entry;
        entry.basis = basis;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                double coeff = 0.0;
                for (std::size_t k = 0; k < 2; ++k) {
                    for (std::size_t l = 0; l < 2; ++l) {
                        const double factor = (k == 0 ? e[i].x : e[i].y) *
                                              (l == 0 ? e[j].x : e[j].y);
                        coeff += factor * psi.coefficient(k, l);
                    }
                }
                entry.coefficients[2 * i + j] = coeff;
                entry.max_deviation =
                    std::max(entry.max_deviation,
                             std::abs(coeff - psi.coefficient(i, j)));
            }
        }
        if (entry.max_deviation > kRotationInvarianceTol) report.invariant = false;
        report.entries.push_back(entry);
    }
    return report;
}

} // namespace qrel
