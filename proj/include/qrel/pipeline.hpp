#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qrel/bell.hpp"
#include "qrel/composite.hpp"
#include "qrel/errors.hpp"
#include "qrel/hilbert.hpp"
#include "qrel/loglab.hpp"

namespace qrel {

/// Analysis configuration, echoed verbatim into every report.
struct RunConfig {
    std::vector<std::string> dimensions;
    std::string standard; ///< empty means the first configured dimension
    std::vector<PairCase> cases = {PairCase::one, PairCase::two, PairCase::three};
    std::vector<BellForm> forms = {BellForm::chsh_trace,
                                   BellForm::chsh_probability,
                                   BellForm::n_settings};
    int min_cooccurrence = 2;
    double half_tolerance = 0.0;
    bool oracle_mode = false;
    std::string format = "json";

    static RunConfig defaults() {
        RunConfig config;
        for (const DimensionId &dim : default_dimensions()) {
            config.dimensions.push_back(dim.name());
        }
        config.standard = config.dimensions.front();
        return config;
    }

    DimensionSet dimension_set() const {
        std::vector<DimensionId> dims;
        dims.reserve(dimensions.size());
        for (const std::string &name : dimensions) dims.emplace_back(name);
        return DimensionSet(std::move(dims));
    }

    DimensionId standard_dimension() const {
        if (standard.empty()) {
            if (dimensions.empty()) throw InputError("no dimensions configured");
            return DimensionId(dimensions.front());
        }
        const DimensionId dim(standard);
        if (std::find(dimensions.begin(), dimensions.end(), standard) ==
            dimensions.end()) {
            throw InputError("standard dimension '" + standard +
                             "' is not in the configured dimension list");
        }
        return dim;
    }

    void validate() const {
        dimension_set();
        standard_dimension();
        if (format != "json" && format != "csv") {
            throw InputError("output format must be json or csv");
        }
        if (min_cooccurrence < 1) {
            throw InputError("min-cooccurrence must be at least 1");
        }
        if (half_tolerance < 0.0 || half_tolerance > 0.5) {
            throw InputError("half-tolerance must lie in [0, 0.5]");
        }
    }
};

struct OrderEffectRow {
    std::string dim_a;
    std::string dim_b;
    double forward = 0.0;          ///< chain d -> A -> B
    double reverse = 0.0;          ///< chain d -> B -> A
    std::optional<double> ratio;   ///< reverse / forward, absent when forward = 0
};

struct OrderEffectTable {
    std::string query_id;
    std::string doc_id;
    std::vector<OrderEffectRow> rows;
};

struct PairAnalysis {
    PairCase pair_case = PairCase::one;
    std::string doc1;
    std::string doc2;
    PairProvenance provenance;
    std::vector<BellResult> bell;
    SchmidtDecomposition schmidt;
};

struct OracleBlock {
    BellResult chsh;
    SchmidtDecomposition schmidt;
    bool rotationally_invariant = false;
    int rotation_angles = 0;
};

struct Aggregates {
    int pairs_tested = 0;
    std::map<std::string, int> pairs_by_case; ///< "I", "II", "III"
    int results_total = 0;
    int violations = 0;
    std::map<std::string, double> max_statistic; ///< by form name
};

struct Report {
    RunConfig config;
    std::vector<PairAnalysis> pairs;
    std::vector<OrderEffectTable> order_effects;
    int case3_correlated_pairs = 0;
    std::optional<OracleBlock> oracle;
    Aggregates aggregates;
};

inline double order_effect_probability(const DocumentState &doc,
                                       const DimensionId &first,
                                       const DimensionId &second) {
    const Vec2 chain[2] = {doc.basis_vector(first), doc.basis_vector(second)};
    return sequential_projection(doc.state_vector(), chain);
}

/// Forward/reverse chain probabilities for every unordered dimension pair,
/// in configured order.
inline std::vector<OrderEffectRow> order_effect_rows(const DocumentState &doc,
                                                     const DimensionSet &dims) {
    std::vector<OrderEffectRow> rows;
    const auto &list = dims.dimensions();
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size(); ++j) {
            OrderEffectRow row;
            row.dim_a = list[i].name();
            row.dim_b = list[j].name();
            row.forward = order_effect_probability(doc, list[i], list[j]);
            row.reverse = order_effect_probability(doc, list[j], list[i]);
            if (row.forward > 0.0) row.ratio = row.reverse / row.forward;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

/// Evaluates the entangled-state oracle: CHSH on phi_plus with the optimal
/// observables (statistic 2*sqrt(2), violated), its Schmidt decomposition,
/// and rotational invariance over eight angles.
inline OracleBlock run_oracle() {
    constexpr double pi = 3.14159265358979323846;
    const CompositeState phi = bell_state(BellStateKind::phi_plus);
    const ChshObservables obs = optimal_chsh_observables();

    OracleBlock block;
    block.chsh = chsh_composite(phi, obs.a1, obs.a2, obs.b1, obs.b2);
    block.schmidt = schmidt_decompose(phi);
    std::vector<Basis2> bases;
    for (int k = 1; k <= 8; ++k) {
        bases.push_back(Basis2::rotation(k * pi / 8.0));
    }
    block.rotationally_invariant = rotational_invariance_check(phi, bases).invariant;
    block.rotation_angles = static_cast<int>(bases.size());
    return block;
}

inline Aggregates compute_aggregates(const std::vector<PairAnalysis> &pairs) {
    Aggregates agg;
    agg.pairs_tested = static_cast<int>(pairs.size());
    for (const PairAnalysis &pair : pairs) {
        agg.pairs_by_case[std::string(pair_case_name(pair.pair_case))] += 1;
        for (const BellResult &result : pair.bell) {
            agg.results_total += 1;
            if (result.violated) agg.violations += 1;
            const std::string name(bell_form_name(result.form));
            const auto it = agg.max_statistic.find(name);
            if (it == agg.max_statistic.end()) {
                agg.max_statistic.emplace(name, result.statistic);
            } else {
                it->second = std::max(it->second, result.statistic);
            }
        }
    }
    return agg;
}

namespace detail {

inline PairAnalysis evaluate_pair(const DocumentPair &pair,
                                  const SuiteConfig &suite) {
    try {
        PairAnalysis analysis;
        analysis.pair_case = pair.pair_case;
        analysis.doc1 = pair.d1.doc_id();
        analysis.doc2 = pair.d2.doc_id();
        analysis.provenance = pair.provenance;
        analysis.bell = run_suite(pair.d1, pair.d2, suite);
        analysis.schmidt = schmidt_decompose(
            tensor_product(pair.d1.state_vector(), pair.d2.state_vector()));
        return analysis;
    } catch (const InputError &e) {
        throw InputError("pair (" + pair.d1.doc_id() + ", " + pair.d2.doc_id() +
                         ") from query '" +
                         (pair.provenance.query_ids.empty()
                              ? std::string("?")
                              : pair.provenance.query_ids.back()) +
                         "': " + e.what());
    }
}

} // namespace detail

/// Runs the full analysis over a judgment log: select pairs per configured
/// case, evaluate the Bell suite and Schmidt decomposition per pair, tabulate
/// order effects per involved document, aggregate. Pair evaluation may run on
/// several threads; results merge in pair-index order, so the report does not
/// depend on the thread count.
inline Report run_pipeline(std::istream &log, const RunConfig &config,
                           unsigned threads = 1) {
    config.validate();
    const DimensionSet dims = config.dimension_set();
    const DimensionId standard = config.standard_dimension();

    Report report;
    report.config = config;

    const std::vector<PreparedQuery> queries =
        prepare_queries(parse_log(log, dims), standard, dims);

    std::vector<DocumentPair> pairs;
    const auto wants = [&](PairCase c) {
        return std::find(config.cases.begin(), config.cases.end(), c) !=
               config.cases.end();
    };
    if (wants(PairCase::one)) {
        auto selected = select_case1(queries);
        std::move(selected.begin(), selected.end(), std::back_inserter(pairs));
    }
    if (wants(PairCase::two)) {
        auto selected = select_case2(queries);
        std::move(selected.begin(), selected.end(), std::back_inserter(pairs));
    }
    if (wants(PairCase::three)) {
        auto selection = select_case3(
            queries, {config.min_cooccurrence, config.half_tolerance});
        report.case3_correlated_pairs = selection.correlated_pairs;
        std::move(selection.pairs.begin(), selection.pairs.end(),
                  std::back_inserter(pairs));
    }

    SuiteConfig suite;
    suite.dimensions = dims.dimensions();
    suite.forms = config.forms;

    report.pairs.resize(pairs.size());
    const auto evaluate_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            report.pairs[i] = detail::evaluate_pair(pairs[i], suite);
        }
    };
    if (threads <= 1 || pairs.size() < 2) {
        evaluate_range(0, pairs.size());
    } else {
        const std::size_t worker_count =
            std::min<std::size_t>(threads, pairs.size());
        std::vector<std::thread> workers;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const std::size_t chunk =
            (pairs.size() + worker_count - 1) / worker_count;
        for (std::size_t w = 0; w < worker_count; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(pairs.size(), begin + chunk);
            workers.emplace_back([&, begin, end] {
                try {
                    evaluate_range(begin, end);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (std::thread &worker : workers) worker.join();
        if (failure) std::rethrow_exception(failure);
    }

    // One order-effect table per distinct (state query, document).
    std::set<std::pair<std::string, std::string>> table_keys;
    for (const PairAnalysis &analysis : report.pairs) {
        table_keys.insert({analysis.provenance.state_query_d1, analysis.doc1});
        table_keys.insert({analysis.provenance.state_query_d2, analysis.doc2});
    }
    for (const auto &[query_id, doc_id] : table_keys) {
        for (const PreparedQuery &query : queries) {
            if (query.group.query_id != query_id) continue;
            OrderEffectTable table;
            table.query_id = query_id;
            table.doc_id = doc_id;
            table.rows = order_effect_rows(query.state_of(doc_id), dims);
            report.order_effects.push_back(std::move(table));
            break;
        }
    }

    if (config.oracle_mode) report.oracle = run_oracle();
    report.aggregates = compute_aggregates(report.pairs);
    return report;
}

} // namespace qrel
