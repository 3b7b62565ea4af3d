#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrel/errors.hpp"
#include "qrel/hilbert.hpp"

namespace qrel {

/// The configured, ordered set of relevance dimensions. Names are unique and
/// there are at least two of them.
class DimensionSet {
  public:
    explicit DimensionSet(std::vector<DimensionId> dimensions)
        : dimensions_(std::move(dimensions)) {
        if (dimensions_.size() < 2) {
            throw InputError("at least two dimensions must be configured");
        }
        std::set<DimensionId> seen;
        for (const DimensionId &dim : dimensions_) {
            if (!seen.insert(dim).second) {
                throw InputError("duplicate dimension '" + dim.name() + "'");
            }
        }
    }

    static DimensionSet defaults() { return DimensionSet(default_dimensions()); }

    const std::vector<DimensionId> &dimensions() const { return dimensions_; }
    std::size_t size() const { return dimensions_.size(); }
    bool contains(const DimensionId &dim) const {
        return std::find(dimensions_.begin(), dimensions_.end(), dim) !=
               dimensions_.end();
    }

  private:
    std::vector<DimensionId> dimensions_;
};

/// One (query, document) judgment row: raw learning-to-rank scores per
/// dimension plus the click / satisfied-click flags.
struct JudgmentRecord {
    std::string query_id;
    std::string doc_id;
    std::map<DimensionId, double> scores;
    bool clicked = false;
    bool sat_clicked = false;
};

struct QueryGroup {
    std::string query_id;
    std::vector<JudgmentRecord> records;
};

/// Parses UTF-8 JSON lines, one record per line:
///   {"query_id": "...", "doc_id": "...", "scores": {dim: number, ...},
///    "clicked": bool, "sat_clicked": bool}
/// Unknown top-level fields are ignored; unknown dimension names and missing
/// dimension scores are rejected. Records are grouped by query_id in first
/// appearance order, preserving input order within each group. Blank lines
/// are skipped.
inline std::vector<QueryGroup> parse_log(std::istream &input,
                                         const DimensionSet &dims) {
    std::vector<QueryGroup> groups;
    std::map<std::string, std::size_t> group_index;
    std::set<std::pair<std::string, std::string>> seen_docs;

    std::string line;
    std::size_t line_number = 0;
    while (std::getline(input, line)) {
        ++line_number;
        const auto where = [&] { return " (line " + std::to_string(line_number) + ")"; };
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception &e) {
            throw InputError("malformed record: " + std::string(e.what()) + where());
        }
        if (!row.is_object()) {
            throw InputError("record is not a JSON object" + where());
        }

        JudgmentRecord record;
        try {
            record.query_id = row.at("query_id").get<std::string>();
            record.doc_id = row.at("doc_id").get<std::string>();
            record.clicked = row.at("clicked").get<bool>();
            record.sat_clicked = row.at("sat_clicked").get<bool>();
        } catch (const nlohmann::json::exception &e) {
            throw InputError("bad record field: " + std::string(e.what()) + where());
        }
        if (record.sat_clicked && !record.clicked) {
            throw InputError("record for document '" + record.doc_id +
                             "' is sat_clicked but not clicked" + where());
        }

        const auto scores_it = row.find("scores");
        if (scores_it == row.end() || !scores_it->is_object()) {
            throw InputError("record is missing the scores object" + where());
        }
        for (const auto &[name, value] : scores_it->items()) {
            const DimensionId dim(name);
            if (!dims.contains(dim)) {
                throw InputError("unknown dimension '" + name + "'" + where());
            }
            if (!value.is_number()) {
                throw InputError("score for dimension '" + name +
                                 "' is not a number" + where());
            }
            record.scores.emplace(dim, value.get<double>());
        }
        for (const DimensionId &dim : dims.dimensions()) {
            if (!record.scores.contains(dim)) {
                throw InputError("missing score for dimension '" + dim.name() +
                                 "'" + where());
            }
        }

        if (!seen_docs.insert({record.query_id, record.doc_id}).second) {
            throw InputError("duplicate document '" + record.doc_id +
                             "' in query '" + record.query_id + "'" + where());
        }

        const auto [it, inserted] =
            group_index.try_emplace(record.query_id, groups.size());
        if (inserted) groups.push_back({record.query_id, {}});
        groups[it->second].records.push_back(std::move(record));
    }
    return groups;
}

/// Builds one DocumentState per record: for each dimension, min-max over the
/// group's scores, then sqrt to amplitudes. Normalization is local to the
/// group; other queries never influence these states.
inline std::vector<DocumentState> build_states(const QueryGroup &group,
                                               const DimensionId &standard,
                                               const DimensionSet &dims) {
    if (group.records.empty()) {
        throw InputError("query group '" + group.query_id + "' has no records");
    }
    if (!dims.contains(standard)) {
        throw InputError("standard dimension '" + standard.name() +
                         "' is not configured");
    }
    std::vector<DocumentState> states;
    states.reserve(group.records.size());
    std::map<DimensionId, std::vector<double>> columns;
    for (const DimensionId &dim : dims.dimensions()) {
        auto &column = columns[dim];
        column.reserve(group.records.size());
        for (const JudgmentRecord &record : group.records) {
            column.push_back(record.scores.at(dim));
        }
    }
    for (std::size_t i = 0; i < group.records.size(); ++i) {
        std::map<DimensionId, AmplitudePair> amplitudes;
        for (const DimensionId &dim : dims.dimensions()) {
            amplitudes.emplace(dim, amplitudes_from_scores(columns.at(dim), i));
        }
        states.emplace_back(group.records[i].doc_id, standard,
                            std::move(amplitudes));
    }
    return states;
}

/// A parsed query with its built document states, ready for pair selection.
struct PreparedQuery {
    QueryGroup group;
    std::vector<DocumentState> states;

    const DocumentState &state_of(std::string_view doc_id) const {
        for (const DocumentState &state : states) {
            if (state.doc_id() == doc_id) return state;
        }
        throw InputError("document '" + std::string(doc_id) +
                         "' not found in query '" + group.query_id + "'");
    }
};

inline std::vector<PreparedQuery> prepare_queries(std::vector<QueryGroup> groups,
                                                  const DimensionId &standard,
                                                  const DimensionSet &dims) {
    std::vector<PreparedQuery> prepared;
    prepared.reserve(groups.size());
    for (QueryGroup &group : groups) {
        std::vector<DocumentState> states = build_states(group, standard, dims);
        prepared.push_back({std::move(group), std::move(states)});
    }
    return prepared;
}

enum class PairCase { one = 1, two = 2, three = 3 };

inline std::string_view pair_case_name(PairCase c) {
    switch (c) {
    case PairCase::one: return "I";
    case PairCase::two: return "II";
    case PairCase::three: return "III";
    }
    return "?";
}

struct PairProvenance {
    std::vector<std::string> query_ids; ///< contributing queries, input order
    std::string state_query_d1;         ///< query whose scores define d1
    std::string state_query_d2;
    int cooccurrences = 0; ///< case III
    int both_sat = 0;
    int both_unclicked = 0;
    std::string sat_doc_id; ///< case II roles
    std::string unclicked_doc_id;
};

/// A selected document pair. d1.doc_id < d2.doc_id always.
struct DocumentPair {
    PairCase pair_case = PairCase::one;
    DocumentState d1;
    DocumentState d2;
    PairProvenance provenance;
};

namespace detail {

inline DocumentPair make_pair(PairCase pair_case, const DocumentState &a,
                              const DocumentState &b, PairProvenance provenance,
                              const std::string &query_a,
                              const std::string &query_b) {
    const bool in_order = a.doc_id() < b.doc_id();
    provenance.state_query_d1 = in_order ? query_a : query_b;
    provenance.state_query_d2 = in_order ? query_b : query_a;
    if (in_order) return {pair_case, a, b, std::move(provenance)};
    return {pair_case, b, a, std::move(provenance)};
}

inline bool unclicked(const JudgmentRecord &record) { return !record.clicked; }

} // namespace detail

/// Case I: queries with exactly two satisfied-clicked documents contribute
/// that document pair.
inline std::vector<DocumentPair> select_case1(std::span<const PreparedQuery> queries) {
    std::vector<DocumentPair> pairs;
    for (const PreparedQuery &query : queries) {
        std::vector<std::size_t> sat;
        for (std::size_t i = 0; i < query.group.records.size(); ++i) {
            if (query.group.records[i].sat_clicked) sat.push_back(i);
        }
        if (sat.size() != 2) continue;
        PairProvenance provenance;
        provenance.query_ids = {query.group.query_id};
        pairs.push_back(detail::make_pair(
            PairCase::one, query.states[sat[0]], query.states[sat[1]],
            std::move(provenance), query.group.query_id, query.group.query_id));
    }
    return pairs;
}

/// Case II: each satisfied-clicked document paired, one by one, with each
/// unclicked document of the same query.
inline std::vector<DocumentPair> select_case2(std::span<const PreparedQuery> queries) {
    std::vector<DocumentPair> pairs;
    for (const PreparedQuery &query : queries) {
        for (std::size_t i = 0; i < query.group.records.size(); ++i) {
            if (!query.group.records[i].sat_clicked) continue;
            for (std::size_t j = 0; j < query.group.records.size(); ++j) {
                if (!detail::unclicked(query.group.records[j])) continue;
                PairProvenance provenance;
                provenance.query_ids = {query.group.query_id};
                provenance.sat_doc_id = query.group.records[i].doc_id;
                provenance.unclicked_doc_id = query.group.records[j].doc_id;
                pairs.push_back(detail::make_pair(
                    PairCase::two, query.states[i], query.states[j],
                    std::move(provenance), query.group.query_id,
                    query.group.query_id));
            }
        }
    }
    return pairs;
}

struct Case3Options {
    int min_cooccurrence = 2;
    double half_tolerance = 0.0;
};

struct Case3Selection {
    std::vector<DocumentPair> pairs; ///< the half/half subset
    int correlated_pairs = 0;        ///< pairs whose co-occurrences are all correlated
};

/// Case III: document pairs that co-occur in at least min_cooccurrence
/// queries, always judged together (both SAT-clicked or both unclicked), and
/// SAT-clicked in half of those queries within half_tolerance. States come
/// from the latest co-occurring query in input order.
inline Case3Selection select_case3(std::span<const PreparedQuery> queries,
                                   const Case3Options &options = {}) {
    struct Occurrence {
        std::size_t query_index;
        bool both_sat;
        bool both_unclicked;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Occurrence>> cooc;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto &records = queries[qi].group.records;
        for (std::size_t i = 0; i < records.size(); ++i) {
            for (std::size_t j = i + 1; j < records.size(); ++j) {
                auto key = std::minmax(records[i].doc_id, records[j].doc_id);
                cooc[{key.first, key.second}].push_back(
                    {qi, records[i].sat_clicked && records[j].sat_clicked,
                     detail::unclicked(records[i]) &&
                         detail::unclicked(records[j])});
            }
        }
    }

    Case3Selection selection;
    for (const auto &[docs, occurrences] : cooc) {
        if (occurrences.size() < static_cast<std::size_t>(options.min_cooccurrence))
            continue;
        int both_sat = 0, both_unclicked = 0;
        bool correlated = true;
        for (const Occurrence &occ : occurrences) {
            if (occ.both_sat) ++both_sat;
            else if (occ.both_unclicked) ++both_unclicked;
            else correlated = false;
        }
        if (!correlated) continue;
        ++selection.correlated_pairs;

        const double fraction =
            static_cast<double>(both_sat) / static_cast<double>(occurrences.size());
        if (std::abs(fraction - 0.5) > options.half_tolerance + 1e-12) continue;

        const std::size_t latest = occurrences.back().query_index;
        PairProvenance provenance;
        for (const Occurrence &occ : occurrences) {
            provenance.query_ids.push_back(queries[occ.query_index].group.query_id);
        }
        provenance.cooccurrences = static_cast<int>(occurrences.size());
        provenance.both_sat = both_sat;
        provenance.both_unclicked = both_unclicked;
        selection.pairs.push_back(detail::make_pair(
            PairCase::three, queries[latest].state_of(docs.first),
            queries[latest].state_of(docs.second), std::move(provenance),
            queries[latest].group.query_id, queries[latest].group.query_id));
    }
    return selection;
}

} // namespace qrel
