#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrel/errors.hpp"
#include "qrel/pipeline.hpp"

namespace qrel {

/// Shortest-form decimal with 12 significant digits.
inline std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

/// Rounds to the double nearest the 12-significant-digit decimal form, so the
/// JSON and CSV writers emit identical numeric content.
inline double round12(double value) {
    return std::strtod(format_number(value).c_str(), nullptr);
}

namespace detail {

inline nlohmann::json to_json(const BellResult &result) {
    nlohmann::json j;
    j["form"] = std::string(bell_form_name(result.form));
    j["statistic"] = round12(result.statistic);
    j["signed_statistic"] = round12(result.signed_statistic);
    if (result.bound_low) j["bound_low"] = round12(*result.bound_low);
    else j["bound_low"] = nullptr;
    j["bound_high"] = round12(result.bound_high);
    j["violated"] = result.violated;
    nlohmann::json terms = nlohmann::json::object();
    for (const auto &[label, value] : result.terms) terms[label] = round12(value);
    j["terms"] = std::move(terms);
    j["dimensions"] = result.dimensions;
    j["standard"] = result.standard;
    return j;
}

inline BellResult bell_result_from_json(const nlohmann::json &j) {
    BellResult result;
    result.form = bell_form_from_name(j.at("form").get<std::string>());
    result.statistic = j.at("statistic").get<double>();
    result.signed_statistic = j.at("signed_statistic").get<double>();
    if (!j.at("bound_low").is_null()) {
        result.bound_low = j.at("bound_low").get<double>();
    }
    result.bound_high = j.at("bound_high").get<double>();
    result.violated = j.at("violated").get<bool>();
    for (const auto &[label, value] : j.at("terms").items()) {
        result.terms[label] = value.get<double>();
    }
    result.dimensions = j.at("dimensions").get<std::vector<std::string>>();
    result.standard = j.at("standard").get<std::string>();
    return result;
}

inline nlohmann::json to_json(const SchmidtDecomposition &schmidt) {
    return {{"singular_values",
             {round12(schmidt.singular_values[0]), round12(schmidt.singular_values[1])}},
            {"rank", schmidt.rank}};
}

inline SchmidtDecomposition schmidt_from_json(const nlohmann::json &j) {
    SchmidtDecomposition schmidt;
    schmidt.singular_values[0] = j.at("singular_values").at(0).get<double>();
    schmidt.singular_values[1] = j.at("singular_values").at(1).get<double>();
    schmidt.rank = j.at("rank").get<int>();
    return schmidt;
}

inline nlohmann::json to_json(const RunConfig &config) {
    nlohmann::json j;
    j["dimensions"] = config.dimensions;
    j["standard"] = config.standard;
    std::vector<std::string> cases;
    for (const PairCase c : config.cases) cases.emplace_back(pair_case_name(c));
    j["cases"] = cases;
    std::vector<std::string> forms;
    for (const BellForm f : config.forms) forms.emplace_back(bell_form_name(f));
    j["forms"] = forms;
    j["min_cooccurrence"] = config.min_cooccurrence;
    j["half_tolerance"] = round12(config.half_tolerance);
    j["oracle"] = config.oracle_mode;
    j["format"] = config.format;
    return j;
}

inline PairCase pair_case_from_name(const std::string &name) {
    if (name == "I") return PairCase::one;
    if (name == "II") return PairCase::two;
    if (name == "III") return PairCase::three;
    throw InputError("unknown pair case '" + name + "'");
}

inline RunConfig config_from_json(const nlohmann::json &j) {
    RunConfig config;
    config.dimensions = j.at("dimensions").get<std::vector<std::string>>();
    config.standard = j.at("standard").get<std::string>();
    config.cases.clear();
    for (const auto &name : j.at("cases")) {
        config.cases.push_back(pair_case_from_name(name.get<std::string>()));
    }
    config.forms.clear();
    for (const auto &name : j.at("forms")) {
        config.forms.push_back(bell_form_from_name(name.get<std::string>()));
    }
    config.min_cooccurrence = j.at("min_cooccurrence").get<int>();
    config.half_tolerance = j.at("half_tolerance").get<double>();
    config.oracle_mode = j.at("oracle").get<bool>();
    config.format = j.at("format").get<std::string>();
    return config;
}

} // namespace detail

inline nlohmann::json to_json(const Report &report) {
    nlohmann::json j;
    j["config"] = detail::to_json(report.config);

    nlohmann::json pairs = nlohmann::json::array();
    for (const PairAnalysis &pair : report.pairs) {
        nlohmann::json p;
        p["case"] = std::string(pair_case_name(pair.pair_case));
        p["doc1"] = pair.doc1;
        p["doc2"] = pair.doc2;
        p["query_ids"] = pair.provenance.query_ids;
        p["state_query_doc1"] = pair.provenance.state_query_d1;
        p["state_query_doc2"] = pair.provenance.state_query_d2;
        if (pair.pair_case == PairCase::two) {
            p["sat_doc"] = pair.provenance.sat_doc_id;
            p["unclicked_doc"] = pair.provenance.unclicked_doc_id;
        }
        if (pair.pair_case == PairCase::three) {
            p["cooccurrences"] = pair.provenance.cooccurrences;
            p["both_sat"] = pair.provenance.both_sat;
            p["both_unclicked"] = pair.provenance.both_unclicked;
        }
        nlohmann::json bell = nlohmann::json::array();
        for (const BellResult &result : pair.bell) {
            bell.push_back(detail::to_json(result));
        }
        p["bell"] = std::move(bell);
        p["schmidt"] = detail::to_json(pair.schmidt);
        pairs.push_back(std::move(p));
    }
    j["pairs"] = std::move(pairs);

    nlohmann::json tables = nlohmann::json::array();
    for (const OrderEffectTable &table : report.order_effects) {
        nlohmann::json t;
        t["query_id"] = table.query_id;
        t["doc_id"] = table.doc_id;
        nlohmann::json rows = nlohmann::json::array();
        for (const OrderEffectRow &row : table.rows) {
            nlohmann::json r;
            r["dim_a"] = row.dim_a;
            r["dim_b"] = row.dim_b;
            r["forward"] = round12(row.forward);
            r["reverse"] = round12(row.reverse);
            if (row.ratio) r["ratio"] = round12(*row.ratio);
            else r["ratio"] = nullptr;
            rows.push_back(std::move(r));
        }
        t["rows"] = std::move(rows);
        tables.push_back(std::move(t));
    }
    j["order_effects"] = std::move(tables);

    j["case3_correlated_pairs"] = report.case3_correlated_pairs;

    if (report.oracle) {
        nlohmann::json o;
        o["chsh"] = detail::to_json(report.oracle->chsh);
        o["schmidt"] = detail::to_json(report.oracle->schmidt);
        o["rotationally_invariant"] = report.oracle->rotationally_invariant;
        o["rotation_angles"] = report.oracle->rotation_angles;
        j["oracle"] = std::move(o);
    } else {
        j["oracle"] = nullptr;
    }

    nlohmann::json agg;
    agg["pairs_tested"] = report.aggregates.pairs_tested;
    agg["pairs_by_case"] = report.aggregates.pairs_by_case;
    agg["results_total"] = report.aggregates.results_total;
    agg["violations"] = report.aggregates.violations;
    nlohmann::json max_stat = nlohmann::json::object();
    for (const auto &[form, value] : report.aggregates.max_statistic) {
        max_stat[form] = round12(value);
    }
    agg["max_statistic"] = std::move(max_stat);
    j["aggregates"] = std::move(agg);
    return j;
}

inline Report report_from_json(const nlohmann::json &j) {
    Report report;
    report.config = detail::config_from_json(j.at("config"));
    for (const auto &p : j.at("pairs")) {
        PairAnalysis pair;
        pair.pair_case = detail::pair_case_from_name(p.at("case").get<std::string>());
        pair.doc1 = p.at("doc1").get<std::string>();
        pair.doc2 = p.at("doc2").get<std::string>();
        pair.provenance.query_ids =
            p.at("query_ids").get<std::vector<std::string>>();
        pair.provenance.state_query_d1 = p.at("state_query_doc1").get<std::string>();
        pair.provenance.state_query_d2 = p.at("state_query_doc2").get<std::string>();
        if (p.contains("sat_doc")) {
            pair.provenance.sat_doc_id = p.at("sat_doc").get<std::string>();
            pair.provenance.unclicked_doc_id =
                p.at("unclicked_doc").get<std::string>();
        }
        if (p.contains("cooccurrences")) {
            pair.provenance.cooccurrences = p.at("cooccurrences").get<int>();
            pair.provenance.both_sat = p.at("both_sat").get<int>();
            pair.provenance.both_unclicked = p.at("both_unclicked").get<int>();
        }
        for (const auto &b : p.at("bell")) {
            pair.bell.push_back(detail::bell_result_from_json(b));
        }
        pair.schmidt = detail::schmidt_from_json(p.at("schmidt"));
        report.pairs.push_back(std::move(pair));
    }
    for (const auto &t : j.at("order_effects")) {
        OrderEffectTable table;
        table.query_id = t.at("query_id").get<std::string>();
        table.doc_id = t.at("doc_id").get<std::string>();
        for (const auto &r : t.at("rows")) {
            OrderEffectRow row;
            row.dim_a = r.at("dim_a").get<std::string>();
            row.dim_b = r.at("dim_b").get<std::string>();
            row.forward = r.at("forward").get<double>();
            row.reverse = r.at("reverse").get<double>();
            if (!r.at("ratio").is_null()) row.ratio = r.at("ratio").get<double>();
            table.rows.push_back(std::move(row));
        }
        report.order_effects.push_back(std::move(table));
    }
    report.case3_correlated_pairs = j.at("case3_correlated_pairs").get<int>();
    if (!j.at("oracle").is_null()) {
        OracleBlock oracle;
        oracle.chsh = detail::bell_result_from_json(j.at("oracle").at("chsh"));
        oracle.schmidt = detail::schmidt_from_json(j.at("oracle").at("schmidt"));
        oracle.rotationally_invariant =
            j.at("oracle").at("rotationally_invariant").get<bool>();
        oracle.rotation_angles = j.at("oracle").at("rotation_angles").get<int>();
        report.oracle = std::move(oracle);
    }
    const auto &agg = j.at("aggregates");
    report.aggregates.pairs_tested = agg.at("pairs_tested").get<int>();
    report.aggregates.pairs_by_case =
        agg.at("pairs_by_case").get<std::map<std::string, int>>();
    report.aggregates.results_total = agg.at("results_total").get<int>();
    report.aggregates.violations = agg.at("violations").get<int>();
    report.aggregates.max_statistic =
        agg.at("max_statistic").get<std::map<std::string, double>>();
    return report;
}

namespace detail {

inline std::string csv_escape(const std::string &field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string join(const std::vector<std::string> &parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string terms_cell(const std::map<std::string, double> &terms) {
    std::vector<std::string> parts;
    parts.reserve(terms.size());
    for (const auto &[label, value] : terms) {
        parts.push_back(label + "=" + format_number(round12(value)));
    }
    return join(parts, ';');
}

inline void csv_bell_row(std::string &out, const std::string &record,
                         const std::string &case_name, const std::string &queries,
                         const std::string &doc1, const std::string &doc2,
                         const BellResult &result) {
    out += record + "," + csv_escape(case_name) + "," + csv_escape(queries) +
           "," + csv_escape(doc1) + "," + csv_escape(doc2) + "," +
           std::string(bell_form_name(result.form)) + "," +
           csv_escape(join(result.dimensions, ';')) + "," +
           csv_escape(result.standard) + "," +
           format_number(round12(result.statistic)) + "," +
           format_number(round12(result.signed_statistic)) + "," +
           (result.bound_low ? format_number(round12(*result.bound_low))
                             : std::string()) +
           "," + format_number(round12(result.bound_high)) + "," +
           (result.violated ? "true" : "false") + "," +
           csv_escape(terms_cell(result.terms)) + ",,,,,,,,,,\n";
}

} // namespace detail

/// Flat CSV rendering of a report. One row per datum, tagged by the `record`
/// column; numeric cells carry exactly the JSON writer's 12-digit values.
inline std::string to_csv(const Report &report) {
    std::string out =
        "record,case,query_ids,doc1,doc2,form,dimensions,standard,statistic,"
        "signed_statistic,bound_low,bound_high,violated,terms,schmidt_s1,"
        "schmidt_s2,schmidt_rank,dim_a,dim_b,forward,reverse,ratio,key,value\n";

    const auto kv = [&](const std::string &record, const std::string &key,
                        const std::string &value) {
        out += record + ",,,,,,,,,,,,,,,,,,,,,," + detail::csv_escape(key) + "," +
               detail::csv_escape(value) + "\n";
    };

    const nlohmann::json config = detail::to_json(report.config);
    kv("config", "dimensions", detail::join(report.config.dimensions, ';'));
    kv("config", "standard", report.config.standard);
    kv("config", "cases", config.at("cases").dump());
    kv("config", "forms", config.at("forms").dump());
    kv("config", "min_cooccurrence", std::to_string(report.config.min_cooccurrence));
    kv("config", "half_tolerance", format_number(round12(report.config.half_tolerance)));
    kv("config", "oracle", report.config.oracle_mode ? "true" : "false");
    kv("config", "format", report.config.format);

    for (const PairAnalysis &pair : report.pairs) {
        const std::string case_name(pair_case_name(pair.pair_case));
        const std::string queries = detail::join(pair.provenance.query_ids, ';');
        for (const BellResult &result : pair.bell) {
            detail::csv_bell_row(out, "pair_bell", case_name, queries, pair.doc1,
                                 pair.doc2, result);
        }
        out += "pair_schmidt," + detail::csv_escape(case_name) + "," +
               detail::csv_escape(queries) + "," + detail::csv_escape(pair.doc1) +
               "," + detail::csv_escape(pair.doc2) + ",,,,,,,,,," +
               format_number(round12(pair.schmidt.singular_values[0])) + "," +
               format_number(round12(pair.schmidt.singular_values[1])) + "," +
               std::to_string(pair.schmidt.rank) + ",,,,,,,\n";
    }

    for (const OrderEffectTable &table : report.order_effects) {
        for (const OrderEffectRow &row : table.rows) {
            out += "order_effect,," + detail::csv_escape(table.query_id) + "," +
                   detail::csv_escape(table.doc_id) + ",,,,,,,,,,,,,," +
                   detail::csv_escape(row.dim_a) + "," +
                   detail::csv_escape(row.dim_b) + "," +
                   format_number(round12(row.forward)) + "," +
                   format_number(round12(row.reverse)) + "," +
                   (row.ratio ? format_number(round12(*row.ratio)) : std::string()) +
                   ",,\n";
        }
    }

    kv("aggregate", "case3_correlated_pairs",
       std::to_string(report.case3_correlated_pairs));

    if (report.oracle) {
        detail::csv_bell_row(out, "oracle_bell", "", "", "", "",
                             report.oracle->chsh);
        out += "oracle_schmidt,,,,,,,,,,,,,," +
               format_number(round12(report.oracle->schmidt.singular_values[0])) +
               "," +
               format_number(round12(report.oracle->schmidt.singular_values[1])) +
               "," + std::to_string(report.oracle->schmidt.rank) + ",,,,,,,\n";
        kv("oracle_rotation", "rotationally_invariant",
           report.oracle->rotationally_invariant ? "true" : "false");
        kv("oracle_rotation", "rotation_angles",
           std::to_string(report.oracle->rotation_angles));
    }

    kv("aggregate", "pairs_tested", std::to_string(report.aggregates.pairs_tested));
    for (const auto &[case_name, count] : report.aggregates.pairs_by_case) {
        kv("aggregate", "pairs_case_" + case_name, std::to_string(count));
    }
    kv("aggregate", "results_total", std::to_string(report.aggregates.results_total));
    kv("aggregate", "violations", std::to_string(report.aggregates.violations));
    for (const auto &[form, value] : report.aggregates.max_statistic) {
        kv("aggregate", "max_statistic_" + form, format_number(round12(value)));
    }
    return out;
}

inline std::string serialize_report(const Report &report) {
    if (report.config.format == "csv") return to_csv(report);
    return to_json(report).dump(2) + "\n";
}

/// Write-then-rename so readers never observe a half-written report.
inline void write_file_atomic(const std::filesystem::path &path,
                              const std::string &content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot open output file: " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw InputError("failed writing output file: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw InputError("failed to move report into place: " + path.string() +
                         ": " + ec.message());
    }
}

} // namespace qrel
