#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrel/errors.hpp"
#include "qrel/linalg.hpp"

namespace qrel {

/// Name of one relevance dimension. Each dimension acts as a measurement
/// basis of the document's two-dimensional state space.
class DimensionId {
  public:
    DimensionId() = default;
    explicit DimensionId(std::string name) : name_(std::move(name)) {
        if (name_.empty()) throw InputError("dimension name must be non-empty");
    }

    const std::string &name() const { return name_; }
    auto operator<=>(const DimensionId &) const = default;

  private:
    std::string name_;
};

/// The seven default relevance dimensions, in canonical order.
inline std::vector<DimensionId> default_dimensions() {
    return {DimensionId("topicality"),        DimensionId("reliability"),
            DimensionId("understandability"), DimensionId("interest"),
            DimensionId("habit"),             DimensionId("scope"),
            DimensionId("novelty")};
}

/// Superposition coefficients (alpha, beta) of a document over a dimension's
/// relevant / non-relevant basis. alpha^2 + beta^2 = 1 within 1e-12.
class AmplitudePair {
  public:
    AmplitudePair(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (std::abs(alpha * alpha + beta * beta - 1.0) > kNormTol) {
            throw InputError("amplitude pair is not normalized");
        }
    }

    /// Rescales (alpha, beta) to unit norm. Accepts inputs that are only
    /// approximately normalized, e.g. values quoted to four digits.
    static AmplitudePair normalized(double alpha, double beta) {
        const double n = std::sqrt(alpha * alpha + beta * beta);
        if (!(n > 0.0)) throw InputError("cannot normalize zero amplitudes");
        return AmplitudePair(alpha / n, beta / n, 0);
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    Vec2 vec() const { return {alpha_, beta_}; }

  private:
    AmplitudePair(double alpha, double beta, int) : alpha_(alpha), beta_(beta) {}
    double alpha_;
    double beta_;
};

/// A document's state expressed in each configured dimension basis, plus the
/// dimension chosen as the coordinate frame (the "standard" basis).
class DocumentState {
  public:
    DocumentState(std::string doc_id, DimensionId standard,
                  std::map<DimensionId, AmplitudePair> amplitudes)
        : doc_id_(std::move(doc_id)), standard_(std::move(standard)),
          amplitudes_(std::move(amplitudes)) {
        if (!amplitudes_.contains(standard_)) {
            throw InputError("standard dimension '" + standard_.name() +
                             "' missing from document '" + doc_id_ + "'");
        }
    }

    const std::string &doc_id() const { return doc_id_; }
    const DimensionId &standard_dimension() const { return standard_; }
    const std::map<DimensionId, AmplitudePair> &amplitudes() const {
        return amplitudes_;
    }

    bool has(const DimensionId &dim) const { return amplitudes_.contains(dim); }

    const AmplitudePair &amplitude(const DimensionId &dim) const {
        const auto it = amplitudes_.find(dim);
        if (it == amplitudes_.end()) {
            throw InputError("dimension '" + dim.name() +
                             "' missing from document '" + doc_id_ + "'");
        }
        return it->second;
    }

    /// Coordinates of the document state in the standard basis.
    Vec2 state_vector() const { return amplitude(standard_).vec(); }

    /// Same amplitudes viewed from a different standard basis.
    DocumentState with_standard(const DimensionId &dim) const {
        return DocumentState(doc_id_, dim, amplitudes_);
    }

    /// The relevant basis vector of `dim` in standard coordinates.
    Vec2 basis_vector(const DimensionId &dim) const;

  private:
    std::string doc_id_;
    DimensionId standard_;
    std::map<DimensionId, AmplitudePair> amplitudes_;
};

/// A +/-1 valued measurement: real symmetric, traceless, squares to identity.
class Observable {
  public:
    explicit Observable(const Mat2 &m) : matrix_(m) {
        if (!m.is_symmetric(kStructuralTol)) {
            throw InputError("observable matrix must be symmetric");
        }
        if (std::abs(m.trace()) > kStructuralTol) {
            throw InputError("observable matrix must be traceless");
        }
        if ((m * m).max_abs_diff(Mat2::identity()) > kStructuralTol) {
            throw InputError("observable matrix must square to the identity");
        }
    }

    /// Spectral form 2|v><v| - I: +1 along `plus`, -1 along its orthogonal.
    static Observable from_plus_eigenvector(const Vec2 &plus) {
        if (!plus.is_unit(1e-9)) {
            throw InputError("observable eigenvector must be unit length");
        }
        const double u = plus.x, v = plus.y;
        return Observable(Mat2{u * u - v * v, 2.0 * u * v,   //
                               2.0 * u * v, v * v - u * u});
    }

    /// Measurement direction at `angle` from the standard relevant axis.
    static Observable from_angle(double angle) {
        return from_plus_eigenvector({std::cos(angle), std::sin(angle)});
    }

    const Mat2 &matrix() const { return matrix_; }

    Vec2 plus_eigenvector() const {
        // matrix = [[p, q], [q, -p]] with p^2 + q^2 = 1; (1+p, q) lies along
        // the +1 eigenvector except at p = -1.
        const double p = matrix_.m00, q = matrix_.m01;
        if (p <= -1.0 + 1e-14 && std::abs(q) < 1e-14) return {0.0, 1.0};
        const Vec2 raw = p >= 0.0 ? Vec2{1.0 + p, q} : Vec2{q, 1.0 - p};
        return raw.normalized();
    }

    Vec2 minus_eigenvector() const { return plus_eigenvector().orthogonal(); }

  private:
    Mat2 matrix_;
};

/// Pure-state density matrix |d><d|.
class DensityMatrix {
  public:
    explicit DensityMatrix(const Mat2 &m) : matrix_(m) {
        if (!m.is_symmetric(kStructuralTol)) {
            throw InputError("density matrix must be symmetric");
        }
        if (std::abs(m.trace() - 1.0) > kNormTol) {
            throw InputError("density matrix must have unit trace");
        }
        if (m.m00 < -kNormTol || m.m11 < -kNormTol ||
            std::abs(m.det()) > kStructuralTol) {
            throw InputError("density matrix must be a rank-1 projector");
        }
    }

    static DensityMatrix pure(const Vec2 &state) {
        if (!state.is_unit()) {
            throw InputError("density matrix state must be unit length");
        }
        return DensityMatrix(Mat2::outer(state, state));
    }

    const Mat2 &matrix() const { return matrix_; }

  private:
    Mat2 matrix_;
};

/// Amplitudes for one document of a query from the raw per-dimension scores
/// of all its documents: alpha = sqrt(minmax(score)), beta = sqrt(1-alpha^2).
/// A degenerate range (max == min) maps to the maximally uncertain 0.5.
inline AmplitudePair amplitudes_from_scores(std::span<const double> scores,
                                            std::size_t target_index) {
    if (scores.empty()) throw InputError("score list must be non-empty");
    if (target_index >= scores.size()) {
        throw InputError("score target index out of range");
    }
    double lo = scores[0], hi = scores[0];
    for (const double s : scores) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const double normalized =
        hi == lo ? 0.5 : (scores[target_index] - lo) / (hi - lo);
    const double alpha = std::sqrt(normalized);
    return AmplitudePair(alpha, std::sqrt(1.0 - alpha * alpha));
}

struct BasisChange {
    Vec2 relevant;   ///< C expressed in the (A, B) frame.
    Vec2 orthogonal; ///< D expressed in the (A, B) frame.
};

/// Expresses the basis (C, D) in the frame (A, B), given one state written
/// in both: psi = a|A> + b|B> = c|C> + d|D>. Then
///   C = (ac+bd)|A> + (bc-ad)|B>,  D = (ad-bc)|A> + (ac+bd)|B>.
inline BasisChange basis_change(const AmplitudePair &psi,
                                const AmplitudePair &psi_alt) {
    const double a = psi.alpha(), b = psi.beta();
    const double c = psi_alt.alpha(), d = psi_alt.beta();
    const double u = a * c + b * d;
    const double v = b * c - a * d;
    return {{u, v}, {-v, u}};
}

/// Born rule |<basis|state>|^2.
inline double projection_probability(const Vec2 &state, const Vec2 &basis_vector) {
    if (!state.is_unit() || !basis_vector.is_unit()) {
        throw InputError("projection requires unit-norm vectors");
    }
    const double amp = basis_vector.dot(state);
    return amp * amp;
}

/// Probability of the judgment chain state -> b1 -> b2 -> ...: the product of
/// successive squared overlaps. Order matters whenever the bases differ.
inline double sequential_projection(const Vec2 &state,
                                    std::span<const Vec2> ordered_bases) {
    if (ordered_bases.empty()) {
        throw InputError("sequential projection requires at least one basis");
    }
    double probability = 1.0;
    Vec2 current = state;
    for (const Vec2 &basis : ordered_bases) {
        probability *= projection_probability(current, basis);
        current = basis;
    }
    return probability;
}

inline Vec2 DocumentState::basis_vector(const DimensionId &dim) const {
    if (dim == standard_) return {1.0, 0.0};
    return basis_change(amplitude(standard_), amplitude(dim)).relevant;
}

/// Observable measuring relevance along `dim`, written in the document's
/// standard frame. The +1 eigenvector is the dimension's relevant vector.
inline Observable observable_from_dimension(const DocumentState &doc,
                                            const DimensionId &dim) {
    if (dim == doc.standard_dimension()) {
        return Observable(Mat2::diagonal(1.0, -1.0));
    }
    return Observable::from_plus_eigenvector(doc.basis_vector(dim));
}

/// Trace-rule expectation tr(obs * rho).
inline double expectation(const Observable &obs, const DensityMatrix &rho) {
    const Mat2 &a = obs.matrix(), &r = rho.matrix();
    return a.m00 * r.m00 + a.m01 * r.m10 + a.m10 * r.m01 + a.m11 * r.m11;
}

} // namespace qrel
