// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails. Usage: qrel_acceptance <qrel-cli-binary> <fixture-log>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "qrel/qrel.hpp"
#include "test_helpers.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Context {
    std::string cli;
    std::string fixture;
    std::filesystem::path workdir;
};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string &message) {
        if (!condition) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += message;
        }
    }
    void note(const std::string &message) {
        if (!detail.empty()) detail += "; ";
        detail += message;
    }
};

int run_command(const std::string &command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
#ifdef WIFEXITED
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
#else
    return status;
#endif
}

std::string quoted(const std::string &path) { return "\"" + path + "\""; }

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

qrel::Report fixture_pipeline(const Context &ctx, unsigned threads) {
    std::ifstream input(ctx.fixture);
    if (!input) throw qrel::InputError("fixture missing: " + ctx.fixture);
    return qrel::run_pipeline(input, qrel::RunConfig::defaults(), threads);
}

// 1. Order-effect reproduction for the worked-example document, both through
//    the library and end to end through the CLI order-effects command.
Outcome criterion_order_effects(const Context &ctx) {
    Outcome out;
    const qrel::DocumentState doc = testutil::worked_example_document();
    const qrel::DimensionId top("topicality"), rel("reliability");
    const double forward = qrel::order_effect_probability(doc, top, rel);
    const double reverse = qrel::order_effect_probability(doc, rel, top);
    const double ratio = reverse / forward;
    out.require(std::abs(forward - 0.0399) <= 1e-3,
                "forward " + std::to_string(forward));
    out.require(std::abs(reverse - 0.3014) <= 1e-3,
                "reverse " + std::to_string(reverse));
    out.require(ratio >= 7.4 && ratio <= 7.7, "ratio " + std::to_string(ratio));

    const std::filesystem::path table = ctx.workdir / "order_effects.txt";
    const int code = run_command(
        quoted(ctx.cli) + " order-effects --input " + quoted(ctx.fixture) +
        " --query q13 --doc q13_fx topicality reliability > " +
        quoted(table.string()) + " 2>&1");
    out.require(code == 0, "cli order-effects exit " + std::to_string(code));
    if (code == 0) {
        std::ifstream in(table);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        std::istringstream fields(row);
        std::string doc_id;
        double cli_forward = 0.0, cli_reverse = 0.0, cli_ratio = 0.0;
        fields >> doc_id >> cli_forward >> cli_reverse >> cli_ratio;
        out.require(doc_id == "q13_fx", "cli doc " + doc_id);
        out.require(std::abs(cli_forward - 0.0399) <= 1e-3,
                    "cli forward " + std::to_string(cli_forward));
        out.require(std::abs(cli_reverse - 0.3014) <= 1e-3,
                    "cli reverse " + std::to_string(cli_reverse));
        out.require(cli_ratio >= 7.4 && cli_ratio <= 7.7,
                    "cli ratio " + std::to_string(cli_ratio));
    }
    out.note("forward=" + qrel::format_number(qrel::round12(forward)) +
             " reverse=" + qrel::format_number(qrel::round12(reverse)) +
             " ratio=" + qrel::format_number(qrel::round12(ratio)));
    return out;
}

// 2. Basis-change component magnitudes from the worked-example amplitudes.
Outcome criterion_basis_change(const Context &) {
    Outcome out;
    const qrel::BasisChange change =
        qrel::basis_change(qrel::AmplitudePair::normalized(0.9715, 0.2370),
                           qrel::AmplitudePair::normalized(0.3535, 0.9354));
    out.require(std::abs(std::abs(change.relevant.x) - 0.5651) <= 5e-4,
                "first component " + std::to_string(change.relevant.x));
    out.require(std::abs(std::abs(change.relevant.y) - 0.8250) <= 5e-4,
                "second component " + std::to_string(change.relevant.y));
    out.note("components=(" + qrel::format_number(qrel::round12(change.relevant.x)) +
             ", " + qrel::format_number(qrel::round12(change.relevant.y)) + ")");
    return out;
}

// 3. Trace rule: tr(H rho) = a^2 - b^2 within 1e-12 over 10^4 random states.
Outcome criterion_trace_rule(const Context &) {
    Outcome out;
    std::mt19937_64 rng(1003);
    const qrel::Observable h(qrel::Mat2::diagonal(1.0, -1.0));
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const qrel::Vec2 state = testutil::random_unit_vec2(rng);
        const double value =
            qrel::expectation(h, qrel::DensityMatrix::pure(state));
        const double expected = state.x * state.x - state.y * state.y;
        worst = std::max(worst, std::abs(value - expected));
    }
    out.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
    out.note("max deviation=" + qrel::format_number(worst));
    return out;
}

// 4. Classical bounds over 10^5 random product-state pairs, under 60 s.
Outcome criterion_classical_bounds(const Context &) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1004);
    const std::vector<qrel::DimensionId> dims = qrel::default_dimensions();
    std::uniform_int_distribution<std::size_t> pick(0, dims.size() - 1);
    double max_trace = 0.0, max_prob = 0.0, min_prob = 4.0, max_gisin = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const qrel::DocumentState d1 = testutil::random_document(rng, dims, "d1");
        const qrel::DocumentState d2 = testutil::random_document(rng, dims, "d2");
        std::size_t a = pick(rng), b = pick(rng);
        if (a == b) b = (b + 1) % dims.size();

        const double trace =
            qrel::chsh_trace(d1, d2, dims[a], dims[b]).statistic;
        const double prob =
            qrel::chsh_probability(d1, d2, dims[a], dims[b]).statistic;
        const double gisin = std::abs(qrel::n_settings(d1, d2, dims).statistic);
        max_trace = std::max(max_trace, trace);
        max_prob = std::max(max_prob, prob);
        min_prob = std::min(min_prob, prob);
        max_gisin = std::max(max_gisin, gisin);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.require(max_trace <= 2.0 + 1e-10, "chsh_trace max " + std::to_string(max_trace));
    out.require(max_prob <= 3.0 + 1e-10, "chsh_probability max " + std::to_string(max_prob));
    out.require(min_prob >= 1.0 - 1e-10, "chsh_probability min " + std::to_string(min_prob));
    out.require(max_gisin <= 25.0 + 1e-10, "n_settings max " + std::to_string(max_gisin));
    out.require(seconds < 60.0, "runtime " + std::to_string(seconds) + "s");
    out.note("max_trace=" + qrel::format_number(qrel::round12(max_trace)) +
             " prob_range=[" + qrel::format_number(qrel::round12(min_prob)) + ", " +
             qrel::format_number(qrel::round12(max_prob)) + "]" +
             " max_n7=" + qrel::format_number(qrel::round12(max_gisin)) + " in " +
             qrel::format_number(qrel::round12(seconds)) + "s");
    return out;
}

// 5. Oracle violation at the Tsirelson bound; product states never violate.
Outcome criterion_oracle(const Context &ctx) {
    Outcome out;
    const qrel::ChshObservables obs = qrel::optimal_chsh_observables();
    const qrel::BellResult oracle =
        qrel::chsh_composite(qrel::bell_state(qrel::BellStateKind::phi_plus),
                             obs.a1, obs.a2, obs.b1, obs.b2);
    out.require(std::abs(oracle.statistic - 2.0 * std::sqrt(2.0)) <= 1e-9,
                "oracle statistic " + std::to_string(oracle.statistic));
    out.require(oracle.violated, "oracle not flagged violated");

    std::mt19937_64 rng(1005);
    double max_product = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const qrel::CompositeState product = qrel::tensor_product(
            testutil::random_unit_vec2(rng), testutil::random_unit_vec2(rng));
        const qrel::BellResult result = qrel::chsh_composite(
            product, testutil::random_observable(rng),
            testutil::random_observable(rng), testutil::random_observable(rng),
            testutil::random_observable(rng));
        max_product = std::max(max_product, result.statistic);
        if (result.violated) {
            out.require(false, "product state flagged violated");
            break;
        }
    }
    out.require(max_product <= 2.0 + 1e-10,
                "product max " + std::to_string(max_product));

    const std::filesystem::path capture = ctx.workdir / "oracle.txt";
    const int code = run_command(quoted(ctx.cli) + " oracle > " +
                                 quoted(capture.string()) + " 2>&1");
    out.require(code == 0, "cli oracle exit " + std::to_string(code));
    const std::string text = read_file(capture);
    out.require(text.find("2.82842712475") != std::string::npos &&
                    text.find("violated") != std::string::npos,
                "cli oracle output: " + text);

    out.note("oracle=" + qrel::format_number(qrel::round12(oracle.statistic)) +
             " product_max=" + qrel::format_number(qrel::round12(max_product)));
    return out;
}

// 6. Schmidt suite: products are rank 1 with singular values (1, 0);
//    phi_plus splits evenly at 1/sqrt(2).
Outcome criterion_schmidt(const Context &ctx) {
    Outcome out;
    std::mt19937_64 rng(1006);
    for (int i = 0; i < 10000; ++i) {
        const qrel::SchmidtDecomposition sd =
            qrel::schmidt_decompose(qrel::tensor_product(
                testutil::random_unit_vec2(rng), testutil::random_unit_vec2(rng)));
        if (sd.rank != 1 || std::abs(sd.singular_values[0] - 1.0) > 1e-9 ||
            std::abs(sd.singular_values[1]) > 1e-9) {
            out.require(false, "product decomposition off at trial " +
                                   std::to_string(i));
            break;
        }
    }
    const qrel::SchmidtDecomposition phi = qrel::schmidt_decompose(
        qrel::bell_state(qrel::BellStateKind::phi_plus));
    const double half = std::sqrt(0.5);
    out.require(std::abs(phi.singular_values[0] - half) <= 1e-12 &&
                    std::abs(phi.singular_values[1] - half) <= 1e-12,
                "phi_plus singular values (" +
                    std::to_string(phi.singular_values[0]) + ", " +
                    std::to_string(phi.singular_values[1]) + ")");
    out.require(phi.rank == 2, "phi_plus rank " + std::to_string(phi.rank));

    const auto cli_schmidt = [&](const std::string &args,
                                 const std::string &expect) {
        const std::filesystem::path capture = ctx.workdir / "schmidt.txt";
        const int code = run_command(quoted(ctx.cli) + " schmidt " + args +
                                     " > " + quoted(capture.string()) + " 2>&1");
        const std::string text = read_file(capture);
        out.require(code == 0 && text.find(expect) != std::string::npos,
                    "cli schmidt " + args + ": " + text);
    };
    cli_schmidt("--state 0.8,0,0,0.6", "singular values: 0.8 0.6");
    cli_schmidt("--oracle", "rank: 2");
    cli_schmidt("--input " + quoted(ctx.fixture) + " --query q14 --docs p1,p2",
                "separable: yes");

    out.note("phi_plus=(" +
             qrel::format_number(qrel::round12(phi.singular_values[0])) + ", " +
             qrel::format_number(qrel::round12(phi.singular_values[1])) + ")");
    return out;
}

// 7. Rotational invariance: phi_plus passes eight angles; every pipeline
//    product state fails at least one nontrivial angle.
Outcome criterion_rotation(const Context &ctx) {
    Outcome out;
    std::vector<qrel::Basis2> bases;
    for (int k = 1; k <= 8; ++k) bases.push_back(qrel::Basis2::rotation(k * kPi / 8.0));
    out.require(qrel::rotational_invariance_check(
                    qrel::bell_state(qrel::BellStateKind::phi_plus), bases)
                    .invariant,
                "phi_plus not invariant");

    const qrel::Report report = fixture_pipeline(ctx, 1);
    out.require(!report.pairs.empty(), "no pipeline pairs");
    std::ifstream input(ctx.fixture);
    const qrel::DimensionSet dims = qrel::DimensionSet::defaults();
    const auto queries = qrel::prepare_queries(
        qrel::parse_log(input, dims), dims.dimensions().front(), dims);
    int checked = 0;
    for (const qrel::PairAnalysis &pair : report.pairs) {
        const qrel::DocumentState *d1 = nullptr, *d2 = nullptr;
        for (const auto &query : queries) {
            if (query.group.query_id == pair.provenance.state_query_d1 &&
                d1 == nullptr) {
                d1 = &query.state_of(pair.doc1);
            }
            if (query.group.query_id == pair.provenance.state_query_d2 &&
                d2 == nullptr) {
                d2 = &query.state_of(pair.doc2);
            }
        }
        if (d1 == nullptr || d2 == nullptr) {
            out.require(false, "pair states not resolvable");
            break;
        }
        const qrel::CompositeState product =
            qrel::tensor_product(d1->state_vector(), d2->state_vector());
        bool failed_somewhere = false;
        for (int k = 1; k <= 7; ++k) {
            const std::vector<qrel::Basis2> single{
                qrel::Basis2::rotation(k * kPi / 8.0)};
            if (!qrel::rotational_invariance_check(product, single).invariant) {
                failed_somewhere = true;
                break;
            }
        }
        if (!failed_somewhere) {
            out.require(false, "product state invariant for pair " + pair.doc1 +
                                   "/" + pair.doc2);
            break;
        }
        ++checked;
    }
    out.note("pipeline products checked=" + std::to_string(checked));
    return out;
}

// 8. Pipeline fixture end to end through the CLI: exact per-case counts,
//    zero violations, byte-identical reports across repeats and thread
//    counts, missing input diagnosed with exit code 1.
Outcome criterion_pipeline_fixture(const Context &ctx) {
    Outcome out;
    const auto report_path = [&](const std::string &name) {
        return (ctx.workdir / name).string();
    };
    const std::string base = quoted(ctx.cli) + " run --input " +
                             quoted(ctx.fixture) + " --oracle";
    const int first = run_command(base + " --threads 1 --output " +
                                  quoted(report_path("run1.json")) + " > " +
                                  quoted(report_path("run1.out")) + " 2>&1");
    const int threaded = run_command(base + " --threads 4 --output " +
                                     quoted(report_path("run4.json")) + " > " +
                                     quoted(report_path("run4.out")) + " 2>&1");
    const int repeat = run_command(base + " --threads 1 --output " +
                                   quoted(report_path("run1b.json")) + " > " +
                                   quoted(report_path("run1b.out")) + " 2>&1");
    out.require(first == 0 && threaded == 0 && repeat == 0,
                "cli exit codes " + std::to_string(first) + "/" +
                    std::to_string(threaded) + "/" + std::to_string(repeat));

    const std::string bytes1 = read_file(report_path("run1.json"));
    out.require(!bytes1.empty(), "empty report");
    out.require(bytes1 == read_file(report_path("run4.json")),
                "reports differ across thread counts");
    out.require(bytes1 == read_file(report_path("run1b.json")),
                "reports differ across repeated runs");

    nlohmann::json report;
    try {
        report = nlohmann::json::parse(bytes1);
    } catch (const std::exception &e) {
        out.require(false, std::string("report unparsable: ") + e.what());
        return out;
    }
    const auto &agg = report.at("aggregates");
    out.require(agg.at("pairs_by_case").value("I", 0) == 10,
                "case I count " + agg.at("pairs_by_case").dump());
    out.require(agg.at("pairs_by_case").value("II", 0) == 47,
                "case II count " + agg.at("pairs_by_case").dump());
    out.require(agg.at("pairs_by_case").value("III", 0) == 1,
                "case III count " + agg.at("pairs_by_case").dump());
    out.require(agg.at("pairs_tested").get<int>() == 58, "pairs tested");
    out.require(agg.at("violations").get<int>() == 0, "violations nonzero");
    out.require(report.at("case3_correlated_pairs").get<int>() == 3,
                "correlated pair count");
    out.require(report.at("oracle").at("chsh").at("violated").get<bool>(),
                "oracle block not violated");
    out.require(std::abs(report.at("oracle").at("chsh").at("statistic")
                             .get<double>() -
                         2.0 * std::sqrt(2.0)) <= 1e-9,
                "oracle statistic in report");

    // In-process determinism across parallelism levels, independent of the CLI.
    const qrel::Report in_process_1 = fixture_pipeline(ctx, 1);
    const qrel::Report in_process_4 = fixture_pipeline(ctx, 4);
    out.require(qrel::to_json(in_process_1).dump() ==
                    qrel::to_json(in_process_4).dump(),
                "in-process reports differ across thread counts");

    // CSV rendering runs cleanly through the same pipeline.
    const int csv = run_command(base + " --format csv --output " +
                                quoted(report_path("run.csv")) + " > " +
                                quoted(report_path("run_csv.out")) + " 2>&1");
    out.require(csv == 0, "csv run exit " + std::to_string(csv));
    out.require(!read_file(report_path("run.csv")).empty(), "empty csv report");

    const int missing = run_command(
        quoted(ctx.cli) + " run --input " +
        quoted((ctx.workdir / "no_such_log.jsonl").string()) + " > " +
        quoted(report_path("missing.out")) + " 2>&1");
    out.require(missing == 1, "missing input exit " + std::to_string(missing));
    const std::string diagnostic = read_file(report_path("missing.out"));
    out.require(diagnostic.find("no_such_log.jsonl") != std::string::npos,
                "diagnostic does not name the path");

    out.note("pairs=58 (I=10, II=47, III=1), violations=0");
    return out;
}

// 9. n_settings with n = 2 matches the CHSH trace combination.
Outcome criterion_reduction(const Context &) {
    Outcome out;
    std::mt19937_64 rng(1009);
    const std::vector<qrel::DimensionId> dims{qrel::DimensionId("habit"),
                                              qrel::DimensionId("novelty")};
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const qrel::DocumentState d1 = testutil::random_document(rng, dims, "d1");
        const qrel::DocumentState d2 = testutil::random_document(rng, dims, "d2");
        const qrel::BellResult gisin = qrel::n_settings(d1, d2, dims);
        const qrel::BellResult chsh =
            qrel::chsh_trace(d1, d2, dims[0], dims[1]);
        const double combo =
            chsh.terms.at("E(A1*B1)") + chsh.terms.at("E(A1*B2)") +
            chsh.terms.at("E(A2*B1)") - chsh.terms.at("E(A2*B2)");
        worst = std::max(worst, std::abs(gisin.statistic - combo));
    }
    out.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
    out.note("max deviation=" + qrel::format_number(worst));
    return out;
}

} // namespace

int main(int argc, char **argv) {
    if (argc < 3) {
        std::cerr << "usage: qrel_acceptance <qrel-cli-binary> <fixture-log>\n";
        return 2;
    }
    Context ctx;
    ctx.cli = argv[1];
    ctx.fixture = argv[2];
    ctx.workdir = std::filesystem::temp_directory_path() / "qrel_acceptance";
    std::filesystem::remove_all(ctx.workdir);
    std::filesystem::create_directories(ctx.workdir);

    const std::vector<std::pair<std::string, std::function<Outcome(const Context &)>>>
        criteria = {
            {"order-effect reproduction", criterion_order_effects},
            {"basis-change reproduction", criterion_basis_change},
            {"trace-rule check", criterion_trace_rule},
            {"classical-bound property suite", criterion_classical_bounds},
            {"oracle violation", criterion_oracle},
            {"schmidt suite", criterion_schmidt},
            {"rotational invariance", criterion_rotation},
            {"pipeline fixture", criterion_pipeline_fixture},
            {"n=2 reduction check", criterion_reduction},
        };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second(ctx);
        } catch (const std::exception &e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        if (!outcome.pass) ++failures;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " | criterion "
                  << (i + 1) << ": " << criteria[i].first;
        if (!outcome.detail.empty()) std::cout << " (" << outcome.detail << ")";
        std::cout << "\n";
    }
    std::cout << (failures == 0 ? "all criteria passed"
                                : std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
