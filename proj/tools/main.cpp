// Command-line front end: runs the full query-log analysis pipeline and the
// individual diagnostics (order effects, Schmidt decomposition, the
// entangled-state oracle).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrel/qrel.hpp"

namespace {

std::vector<std::string> split_list(const std::string &text) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::ifstream open_input(const std::string &path) {
    std::ifstream input(path);
    if (!input) throw qrel::InputError("cannot open input file: " + path);
    return input;
}

struct CommonFlags {
    std::string input;
    std::string output;
    std::string format = "json";
    std::string dimensions;
    std::string standard;
};

void add_dimension_flags(CLI::App *cmd, CommonFlags &flags) {
    cmd->add_option("--dimensions", flags.dimensions,
                    "Comma-separated dimension names (default: the seven "
                    "built-in dimensions)");
    cmd->add_option("--standard", flags.standard,
                    "Standard basis dimension (default: first configured)");
}

qrel::RunConfig base_config(const CommonFlags &flags) {
    qrel::RunConfig config = qrel::RunConfig::defaults();
    if (!flags.dimensions.empty()) {
        config.dimensions = split_list(flags.dimensions);
        config.standard = config.dimensions.empty() ? "" : config.dimensions.front();
    }
    if (!flags.standard.empty()) config.standard = flags.standard;
    config.format = flags.format;
    return config;
}

int cmd_run(const CommonFlags &flags, const std::string &cases_arg,
            const std::string &forms_arg, int min_cooccurrence,
            double half_tolerance, bool oracle, unsigned threads) {
    qrel::RunConfig config = base_config(flags);
    config.min_cooccurrence = min_cooccurrence;
    config.half_tolerance = half_tolerance;
    config.oracle_mode = oracle;
    if (cases_arg != "all") {
        config.cases.clear();
        for (const std::string &item : split_list(cases_arg)) {
            if (item == "1") config.cases.push_back(qrel::PairCase::one);
            else if (item == "2") config.cases.push_back(qrel::PairCase::two);
            else if (item == "3") config.cases.push_back(qrel::PairCase::three);
            else throw qrel::InputError("unknown case '" + item + "'");
        }
    }
    if (forms_arg != "all") {
        config.forms.clear();
        for (const std::string &item : split_list(forms_arg)) {
            config.forms.push_back(qrel::bell_form_from_name(item));
        }
    }
    config.validate();

    std::ifstream input = open_input(flags.input);
    const qrel::Report report = qrel::run_pipeline(input, config, threads);

    const std::string output_path =
        flags.output.empty() ? "report." + config.format : flags.output;
    qrel::write_file_atomic(output_path, qrel::serialize_report(report));

    std::cout << "pairs tested: " << report.aggregates.pairs_tested
              << ", violations: " << report.aggregates.violations;
    if (report.oracle) {
        std::cout << ", oracle statistic: "
                  << qrel::format_number(qrel::round12(report.oracle->chsh.statistic))
                  << (report.oracle->chsh.violated ? " (violated)" : "");
    }
    std::cout << "\nreport written to " << output_path << "\n";
    return 0;
}

int cmd_order_effects(const CommonFlags &flags, const std::string &query_id,
                      const std::string &doc_id, const std::string &dim_a,
                      const std::string &dim_b) {
    const qrel::RunConfig config = base_config(flags);
    const qrel::DimensionSet dims = config.dimension_set();
    const qrel::DimensionId a(dim_a), b(dim_b);
    for (const qrel::DimensionId &dim : {a, b}) {
        if (!dims.contains(dim)) {
            throw qrel::InputError("unknown dimension '" + dim.name() + "'");
        }
    }

    std::ifstream input = open_input(flags.input);
    const auto queries = qrel::prepare_queries(qrel::parse_log(input, dims),
                                               config.standard_dimension(), dims);
    const qrel::PreparedQuery *query = nullptr;
    for (const auto &candidate : queries) {
        if (candidate.group.query_id == query_id) {
            query = &candidate;
            break;
        }
    }
    if (query == nullptr) {
        throw qrel::InputError("query '" + query_id + "' not found in input");
    }

    std::ostringstream table;
    table << "doc\t" << dim_a << "->" << dim_b << "\t" << dim_b << "->" << dim_a
          << "\tratio\n";
    bool found = false;
    for (const qrel::DocumentState &state : query->states) {
        if (!doc_id.empty() && state.doc_id() != doc_id) continue;
        found = true;
        const double forward = qrel::order_effect_probability(state, a, b);
        const double reverse = qrel::order_effect_probability(state, b, a);
        table << state.doc_id() << "\t"
              << qrel::format_number(qrel::round12(forward)) << "\t"
              << qrel::format_number(qrel::round12(reverse)) << "\t";
        if (forward > 0.0) {
            table << qrel::format_number(qrel::round12(reverse / forward));
        } else {
            table << "n/a";
        }
        table << "\n";
    }
    if (!found) {
        throw qrel::InputError("document '" + doc_id + "' not found in query '" +
                               query_id + "'");
    }
    std::cout << table.str();
    if (!flags.output.empty()) qrel::write_file_atomic(flags.output, table.str());
    return 0;
}

void print_schmidt(const qrel::SchmidtDecomposition &schmidt) {
    std::cout << "singular values: "
              << qrel::format_number(qrel::round12(schmidt.singular_values[0]))
              << " "
              << qrel::format_number(qrel::round12(schmidt.singular_values[1]))
              << "\nrank: " << schmidt.rank << "\nseparable: "
              << (schmidt.rank <= 1 ? "yes" : "no") << "\n";
}

int cmd_schmidt(const CommonFlags &flags, const std::string &query_id,
                const std::string &docs_arg, const std::string &state_arg,
                bool oracle) {
    if (oracle) {
        print_schmidt(qrel::schmidt_decompose(
            qrel::bell_state(qrel::BellStateKind::phi_plus)));
        return 0;
    }
    if (!state_arg.empty()) {
        const std::vector<std::string> parts = split_list(state_arg);
        if (parts.size() != 4) {
            throw qrel::InputError(
                "--state expects four comma-separated coefficients");
        }
        qrel::Vec4 coefficients;
        for (std::size_t i = 0; i < 4; ++i) {
            try {
                coefficients[i] = std::stod(parts[i]);
            } catch (const std::exception &) {
                throw qrel::InputError("bad state coefficient '" + parts[i] + "'");
            }
        }
        print_schmidt(qrel::schmidt_decompose(qrel::CompositeState(coefficients)));
        return 0;
    }

    const std::vector<std::string> doc_ids = split_list(docs_arg);
    if (query_id.empty() || doc_ids.size() != 2) {
        throw qrel::InputError(
            "select a pair with --query ID --docs A,B, or use --state/--oracle");
    }
    const qrel::RunConfig config = base_config(flags);
    const qrel::DimensionSet dims = config.dimension_set();
    std::ifstream input = open_input(flags.input);
    const auto queries = qrel::prepare_queries(qrel::parse_log(input, dims),
                                               config.standard_dimension(), dims);
    for (const auto &query : queries) {
        if (query.group.query_id != query_id) continue;
        const qrel::DocumentState &d1 = query.state_of(doc_ids[0]);
        const qrel::DocumentState &d2 = query.state_of(doc_ids[1]);
        print_schmidt(qrel::schmidt_decompose(
            qrel::tensor_product(d1.state_vector(), d2.state_vector())));
        return 0;
    }
    throw qrel::InputError("query '" + query_id + "' not found in input");
}

int cmd_oracle(const std::string &output, const std::string &format) {
    const qrel::OracleBlock oracle = qrel::run_oracle();
    std::cout << "chsh statistic: "
              << qrel::format_number(qrel::round12(oracle.chsh.statistic))
              << " (bound " << qrel::format_number(oracle.chsh.bound_high)
              << ", " << (oracle.chsh.violated ? "violated" : "not violated")
              << ")\n";
    print_schmidt(oracle.schmidt);
    std::cout << "rotationally invariant over " << oracle.rotation_angles
              << " angles: " << (oracle.rotationally_invariant ? "yes" : "no")
              << "\n";
    if (!output.empty()) {
        qrel::Report report;
        report.config = qrel::RunConfig::defaults();
        report.config.oracle_mode = true;
        report.config.format = format;
        report.oracle = oracle;
        report.aggregates = qrel::compute_aggregates(report.pairs);
        qrel::write_file_atomic(output, qrel::serialize_report(report));
        std::cout << "report written to " << output << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bell-inequality diagnostics over multidimensional relevance "
                 "judgment logs"};
    app.require_subcommand(1);

    CommonFlags run_flags, oe_flags, schmidt_flags;

    auto *run = app.add_subcommand("run", "Run the full analysis pipeline");
    run->add_option("--input", run_flags.input, "JSON-lines judgment log")
        ->required();
    run->add_option("--output", run_flags.output,
                    "Report path (default: report.<format>)");
    run->add_option("--format", run_flags.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    add_dimension_flags(run, run_flags);
    std::string cases_arg = "all";
    run->add_option("--case", cases_arg, "Pair cases to select: 1,2,3 or all");
    std::string forms_arg = "all";
    run->add_option("--forms", forms_arg,
                    "Inequality forms: chsh_trace,chsh_probability,n_settings "
                    "or all");
    int min_cooccurrence = 2;
    run->add_option("--min-cooccurrence", min_cooccurrence,
                    "Minimum co-occurring queries for case III");
    double half_tolerance = 0.0;
    run->add_option("--half-tolerance", half_tolerance,
                    "Allowed deviation of the case-III SAT fraction from 0.5");
    bool oracle_mode = false;
    run->add_flag("--oracle", oracle_mode,
                  "Also evaluate the entangled-state oracle");
    unsigned threads = 1;
    run->add_option("--threads", threads, "Worker threads for pair evaluation");

    auto *order_effects = app.add_subcommand(
        "order-effects", "Forward/reverse judgment-chain probabilities");
    order_effects->add_option("--input", oe_flags.input, "JSON-lines judgment log")
        ->required();
    order_effects->add_option("--output", oe_flags.output,
                              "Also write the table to this path");
    add_dimension_flags(order_effects, oe_flags);
    std::string oe_query, oe_doc, oe_dim_a, oe_dim_b;
    order_effects->add_option("--query", oe_query, "Query id")->required();
    order_effects->add_option("--doc", oe_doc,
                              "Document id (default: all documents of the query)");
    order_effects->add_option("dim_a", oe_dim_a, "First dimension")->required();
    order_effects->add_option("dim_b", oe_dim_b, "Second dimension")->required();

    auto *schmidt = app.add_subcommand(
        "schmidt", "Schmidt decomposition of a composite state");
    schmidt->add_option("--input", schmidt_flags.input, "JSON-lines judgment log");
    add_dimension_flags(schmidt, schmidt_flags);
    std::string schmidt_query, schmidt_docs, schmidt_state;
    bool schmidt_oracle = false;
    schmidt->add_option("--query", schmidt_query, "Query id of the pair");
    schmidt->add_option("--docs", schmidt_docs, "Comma-separated pair doc ids");
    schmidt->add_option("--state", schmidt_state,
                        "Literal composite state c00,c01,c10,c11");
    schmidt->add_flag("--oracle", schmidt_oracle, "Decompose the phi_plus state");

    auto *oracle = app.add_subcommand(
        "oracle", "Certify the evaluators on the entangled phi_plus state");
    std::string oracle_output, oracle_format = "json";
    oracle->add_option("--output", oracle_output, "Optional report path");
    oracle->add_option("--format", oracle_format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(run_flags, cases_arg, forms_arg, min_cooccurrence,
                           half_tolerance, oracle_mode, threads);
        }
        if (order_effects->parsed()) {
            return cmd_order_effects(oe_flags, oe_query, oe_doc, oe_dim_a,
                                     oe_dim_b);
        }
        if (schmidt->parsed()) {
            return cmd_schmidt(schmidt_flags, schmidt_query, schmidt_docs,
                               schmidt_state, schmidt_oracle);
        }
        if (oracle->parsed()) {
            return cmd_oracle(oracle_output, oracle_format);
        }
    } catch (const qrel::InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
