#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrel/composite.hpp"
#include "qrel/errors.hpp"
#include "qrel/hilbert.hpp"

namespace qrel {

/// Excess over a bound that counts as a genuine violation rather than noise.
inline constexpr double kViolationTol = 1e-10;

enum class BellForm { chsh_trace, chsh_probability, n_settings, chsh_composite };

inline std::string_view bell_form_name(BellForm form) {
    switch (form) {
    case BellForm::chsh_trace: return "chsh_trace";
    case BellForm::chsh_probability: return "chsh_probability";
    case BellForm::n_settings: return "n_settings";
    case BellForm::chsh_composite: return "chsh_composite";
    }
    return "unknown";
}

inline BellForm bell_form_from_name(std::string_view name) {
    if (name == "chsh_trace") return BellForm::chsh_trace;
    if (name == "chsh_probability") return BellForm::chsh_probability;
    if (name == "n_settings") return BellForm::n_settings;
    if (name == "chsh_composite") return BellForm::chsh_composite;
    throw InputError("unknown Bell form '" + std::string(name) + "'");
}

enum class DocumentSlot { first, second };

/// One measurement choice: a dimension measured on one side of the pair.
struct MeasurementSetting {
    DocumentSlot document_slot = DocumentSlot::first;
    DimensionId dimension;
};

inline void require_setting(const DocumentState &first,
                            const DocumentState &second,
                            const MeasurementSetting &setting) {
    const DocumentState &doc =
        setting.document_slot == DocumentSlot::first ? first : second;
    if (!doc.has(setting.dimension)) {
        throw InputError("dimension '" + setting.dimension.name() +
                         "' missing from document '" + doc.doc_id() + "'");
    }
}

/// Outcome of one inequality evaluation.
///
/// `statistic` is the flagged quantity: the absolute combination for the
/// CHSH trace/composite forms, the plain probability sum for the probability
/// form, and the signed double sum for n_settings (whose bounds are the
/// symmetric pair [-b, b]). `signed_statistic` always carries the
/// combination before any absolute value.
struct BellResult {
    BellForm form = BellForm::chsh_trace;
    double statistic = 0.0;
    double signed_statistic = 0.0;
    std::optional<double> bound_low;
    double bound_high = 0.0;
    bool violated = false;
    std::map<std::string, double> terms;
    std::vector<std::string> dimensions; ///< setting labels A1, A2, ... in order
    std::string standard;                ///< observable frame ("" for composite)
};

inline bool outside_bounds(double statistic, const std::optional<double> &low,
                           double high) {
    if (statistic > high + kViolationTol) return true;
    return low.has_value() && statistic < *low - kViolationTol;
}

/// Expectation of the +/-1 product under the independence assumption
/// P(AB) = P(A)P(B), with single-document probabilities from the Born rule.
/// Equals (2*p1 - 1)(2*p2 - 1) for relevance probabilities p1, p2.
inline double pair_expectation_independent(const DocumentState &d1,
                                           const DimensionId &dim_a,
                                           const DocumentState &d2,
                                           const DimensionId &dim_b) {
    require_setting(d1, d2, {DocumentSlot::first, dim_a});
    require_setting(d1, d2, {DocumentSlot::second, dim_b});
    const double a1 = d1.amplitude(dim_a).alpha();
    const double a2 = d2.amplitude(dim_b).alpha();
    const double p1 = a1 * a1, p2 = a2 * a2;
    return p1 * p2 + (1.0 - p1) * (1.0 - p2) - p1 * (1.0 - p2) -
           (1.0 - p1) * p2;
}

/// CHSH in probability form: the sum of the four joint agreement terms,
/// expanded with the independence assumption, lies in [1, 3] classically.
inline BellResult chsh_probability(const DocumentState &d1,
                                   const DocumentState &d2,
                                   const DimensionId &dim_a,
                                   const DimensionId &dim_b) {
    for (const DimensionId &dim : {dim_a, dim_b}) {
        require_setting(d1, d2, {DocumentSlot::first, dim});
        require_setting(d1, d2, {DocumentSlot::second, dim});
    }
    const auto relevance = [](const DocumentState &doc, const DimensionId &dim) {
        const double a = doc.amplitude(dim).alpha();
        return a * a;
    };
    const double pa1 = relevance(d1, dim_a), pb1 = relevance(d1, dim_b);
    const double pa2 = relevance(d2, dim_a), pb2 = relevance(d2, dim_b);

    const auto agree = [](double p, double q) {
        return p * q + (1.0 - p) * (1.0 - q);
    };
    const auto disagree = [](double p, double q) {
        return p * (1.0 - q) + (1.0 - p) * q;
    };

    BellResult result;
    result.form = BellForm::chsh_probability;
    result.terms["P(A1*B1=+1)"] = agree(pa1, pa2);
    result.terms["P(A1*B2=+1)"] = agree(pa1, pb2);
    result.terms["P(A2*B1=+1)"] = agree(pb1, pa2);
    result.terms["P(A2*B2=-1)"] = disagree(pb1, pb2);
    double sum = 0.0;
    for (const auto &[label, value] : result.terms) sum += value;
    result.statistic = sum;
    result.signed_statistic = sum;
    result.bound_low = 1.0;
    result.bound_high = 3.0;
    result.violated = outside_bounds(sum, result.bound_low, result.bound_high);
    result.dimensions = {dim_a.name(), dim_b.name()};
    return result;
}

namespace detail {

/// Product-of-traces expectation E(X1 Y2) of two dimension observables, with
/// both documents rebased to `frame` for observable construction.
inline double trace_pair_expectation(const DocumentState &d1_framed,
                                     const DensityMatrix &rho1,
                                     const DocumentState &d2_framed,
                                     const DensityMatrix &rho2,
                                     const DimensionId &dim_on_1,
                                     const DimensionId &dim_on_2) {
    const double e1 =
        expectation(observable_from_dimension(d1_framed, dim_on_1), rho1);
    const double e2 =
        expectation(observable_from_dimension(d2_framed, dim_on_2), rho2);
    return e1 * e2;
}

} // namespace detail

/// CHSH via the trace rule, |E11 + E12 + E21 - E22| <= 2, with each E the
/// product of single-document trace expectations. The first dimension of the
/// pair serves as the standard basis for observable construction.
inline BellResult chsh_trace(const DocumentState &d1, const DocumentState &d2,
                             const DimensionId &dim_a, const DimensionId &dim_b) {
    for (const DimensionId &dim : {dim_a, dim_b}) {
        require_setting(d1, d2, {DocumentSlot::first, dim});
        require_setting(d1, d2, {DocumentSlot::second, dim});
    }
    const DocumentState e1 = d1.with_standard(dim_a);
    const DocumentState e2 = d2.with_standard(dim_a);
    const DensityMatrix rho1 = DensityMatrix::pure(e1.state_vector());
    const DensityMatrix rho2 = DensityMatrix::pure(e2.state_vector());

    BellResult result;
    result.form = BellForm::chsh_trace;
    const auto term = [&](const DimensionId &on_first, const DimensionId &on_second) {
        return detail::trace_pair_expectation(e1, rho1, e2, rho2, on_first,
                                              on_second);
    };
    const double e11 = term(dim_a, dim_a);
    const double e12 = term(dim_a, dim_b);
    const double e21 = term(dim_b, dim_a);
    const double e22 = term(dim_b, dim_b);
    result.terms["E(A1*B1)"] = e11;
    result.terms["E(A1*B2)"] = e12;
    result.terms["E(A2*B1)"] = e21;
    result.terms["E(A2*B2)"] = e22;
    result.signed_statistic = e11 + e12 + e21 - e22;
    result.statistic = std::abs(result.signed_statistic);
    result.bound_high = 2.0;
    result.violated = outside_bounds(result.statistic, result.bound_low,
                                     result.bound_high);
    result.dimensions = {dim_a.name(), dim_b.name()};
    result.standard = dim_a.name();
    return result;
}

/// CHSH over an arbitrary composite state. Product states stay below 2;
/// entangled states can reach 2*sqrt(2). This is the evaluator the
/// entangled-state oracle certifies.
inline BellResult chsh_composite(const CompositeState &psi, const Observable &a1,
                                 const Observable &a2, const Observable &b1,
                                 const Observable &b2) {
    BellResult result;
    result.form = BellForm::chsh_composite;
    const auto term = [&](const Observable &a, const Observable &b) {
        return composite_expectation(tensor_observable(a, b), psi);
    };
    const double e11 = term(a1, b1);
    const double e12 = term(a1, b2);
    const double e21 = term(a2, b1);
    const double e22 = term(a2, b2);
    result.terms["E(A1*B1)"] = e11;
    result.terms["E(A1*B2)"] = e12;
    result.terms["E(A2*B1)"] = e21;
    result.terms["E(A2*B2)"] = e22;
    result.signed_statistic = e11 + e12 + e21 - e22;
    result.statistic = std::abs(result.signed_statistic);
    result.bound_high = 2.0;
    result.violated = outside_bounds(result.statistic, result.bound_low,
                                     result.bound_high);
    return result;
}

/// The CHSH-optimal measurement set for phi_plus: directions at angles
/// pi/4 and 0 on the first side, pi/8 and 3*pi/8 on the second. Yields a
/// statistic of exactly 2*sqrt(2) on phi_plus.
struct ChshObservables {
    Observable a1, a2, b1, b2;
};

inline ChshObservables optimal_chsh_observables() {
    constexpr double pi = 3.14159265358979323846;
    return {Observable::from_angle(pi / 4.0), Observable::from_angle(0.0),
            Observable::from_angle(pi / 8.0),
            Observable::from_angle(3.0 * pi / 8.0)};
}

/// n-settings generalization: the double sum
///   sum_j ( sum_{k<=n+1-j} E(Aj*Bk) - sum_{k>n+1-j} E(Aj*Bk) )
/// stays within +/- floor((n^2+1)/2) classically (25 for n = 7). The signed
/// value is recorded; the violation flag uses its absolute value.
inline BellResult n_settings(const DocumentState &d1, const DocumentState &d2,
                             std::span<const DimensionId> dims) {
    const std::size_t n = dims.size();
    if (n < 2) throw InputError("n_settings requires at least two dimensions");
    for (const DimensionId &dim : dims) {
        require_setting(d1, d2, {DocumentSlot::first, dim});
        require_setting(d1, d2, {DocumentSlot::second, dim});
    }
    const DocumentState e1 = d1.with_standard(dims[0]);
    const DocumentState e2 = d2.with_standard(dims[0]);
    const DensityMatrix rho1 = DensityMatrix::pure(e1.state_vector());
    const DensityMatrix rho2 = DensityMatrix::pure(e2.state_vector());

    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = expectation(observable_from_dimension(e1, dims[i]), rho1);
        y[i] = expectation(observable_from_dimension(e2, dims[i]), rho2);
    }

    BellResult result;
    result.form = BellForm::n_settings;
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        double row = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double e = x[j - 1] * y[k - 1];
            result.terms["E(A" + std::to_string(j) + "*B" + std::to_string(k) +
                         ")"] = e;
            row += k <= n + 1 - j ? e : -e;
        }
        total += row;
    }
    result.signed_statistic = total;
    result.statistic = total;
    result.bound_high = std::floor((static_cast<double>(n) * n + 1.0) / 2.0);
    result.bound_low = -result.bound_high;
    result.violated = outside_bounds(result.statistic, result.bound_low,
                                     result.bound_high);
    result.dimensions.reserve(n);
    for (const DimensionId &dim : dims) result.dimensions.push_back(dim.name());
    result.standard = dims[0].name();
    return result;
}

struct SuiteConfig {
    std::vector<DimensionId> dimensions;
    std::vector<BellForm> forms = {BellForm::chsh_trace,
                                   BellForm::chsh_probability,
                                   BellForm::n_settings};
};

/// Runs the configured forms over a document pair: every unordered dimension
/// pair for the CHSH forms, the full dimension list once for n_settings.
/// Result order is deterministic: forms in config order, pairs in config
/// index order.
inline std::vector<BellResult> run_suite(const DocumentState &d1,
                                         const DocumentState &d2,
                                         const SuiteConfig &config) {
    if (config.dimensions.size() < 2) {
        throw InputError("suite requires at least two dimensions");
    }
    for (const DimensionId &dim : config.dimensions) {
        if (!d1.has(dim) || !d2.has(dim)) {
            throw InputError("documents '" + d1.doc_id() + "' and '" +
                             d2.doc_id() + "' do not share dimension '" +
                             dim.name() + "'");
        }
    }
    std::vector<BellResult> results;
    for (const BellForm form : config.forms) {
        switch (form) {
        case BellForm::chsh_trace:
        case BellForm::chsh_probability:
            for (std::size_t i = 0; i < config.dimensions.size(); ++i) {
                for (std::size_t j = i + 1; j < config.dimensions.size(); ++j) {
                    const DimensionId &a = config.dimensions[i];
                    const DimensionId &b = config.dimensions[j];
                    results.push_back(form == BellForm::chsh_trace
                                          ? chsh_trace(d1, d2, a, b)
                                          : chsh_probability(d1, d2, a, b));
                }
            }
            break;
        case BellForm::n_settings:
            results.push_back(n_settings(d1, d2, config.dimensions));
            break;
        case BellForm::chsh_composite:
            throw InputError("chsh_composite takes explicit observables and is "
                             "not part of the per-pair suite");
        }
    }
    return results;
}

} // namespace qrel
