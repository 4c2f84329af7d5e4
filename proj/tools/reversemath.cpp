#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reversemath/answereq.hpp"
#include "reversemath/corpus.hpp"
#include "reversemath/evalharness.hpp"
#include "reversemath/forge.hpp"
#include "reversemath/runconfig.hpp"
#include "reversemath/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reversemath;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> mode;
    std::optional<int> max_attempts;
    std::optional<int> k;
    std::optional<std::string> backend;
    std::optional<std::string> fixture;
    std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration JSON")
        ->required();
    cmd->add_option("--seed", flags.seed, "override seed");
    cmd->add_option("--workers", flags.workers, "worker pool width");
    cmd->add_option("--mode", flags.mode,
                    "forge: rewritten|rule-based; export-augment: reverse|duplicate");
    cmd->add_option("--max-attempts", flags.max_attempts, "forge attempt budget");
    cmd->add_option("--k", flags.k, "samples per problem variant");
    cmd->add_option("--backend", flags.backend, "http|fixture")
        ->check(CLI::IsMember({"http", "fixture"}));
    cmd->add_option("--fixture", flags.fixture, "fixture file path");
    cmd->add_option("--out-dir", flags.out_dir, "output directory");
}

runconfig::RunConfig resolve_config(const CommonFlags& flags) {
    auto config = runconfig::load_config(flags.config_path);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.workers) config.workers = *flags.workers;
    if (flags.max_attempts) config.forge.max_attempts = *flags.max_attempts;
    if (flags.k) config.eval.sampling.k = *flags.k;
    if (flags.backend) config.backend.kind = *flags.backend;
    if (flags.fixture) config.backend.fixture_path = *flags.fixture;
    if (flags.out_dir) config.paths.out_dir = *flags.out_dir;
    if (flags.mode) {
        if (*flags.mode == "rule-based" || *flags.mode == "rule_based")
            config.forge.rule_based = true;
        else if (*flags.mode == "rewritten")
            config.forge.rule_based = false;
        else if (*flags.mode != "reverse" && *flags.mode != "duplicate")
            throw runconfig::ConfigError("unknown --mode value: " + *flags.mode);
    }
    config.forge.seed = config.seed;
    fs::create_directories(config.paths.out_dir);
    // pipeline stages default to the previous stage's outputs
    auto fallback = [&](std::string& path, const char* name) {
        if (path.empty()) path = (fs::path(config.paths.out_dir) / name).string();
    };
    fallback(config.paths.reversed, "reversed.jsonl");
    fallback(config.paths.rejections, "rejections.jsonl");
    fallback(config.paths.samples, "samples.jsonl");
    return config;
}

std::string out_path(const runconfig::RunConfig& config, const std::string& name) {
    return (fs::path(config.paths.out_dir) / name).string();
}

void write_jsonl(const std::string& path, const json& header,
                 const std::vector<json>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header.dump() << '\n';
    for (const auto& row : rows) out << row.dump() << '\n';
}

void write_csv(const std::string& path, const json& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# " << header.dump() << '\n';
    for (size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::map<std::string, corpus::ProblemRecord> problems_by_id(
    const std::vector<corpus::ProblemRecord>& problems) {
    std::map<std::string, corpus::ProblemRecord> out;
    for (const auto& p : problems) out.emplace(p.id, p);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_forge(const CommonFlags& flags) {
    auto config = resolve_config(flags);
    auto problems = corpus::load_corpus(config.paths.problems);
    if (problems.empty()) {
        std::cerr << "forge: no input problems in " << config.paths.problems
                  << "\n";
        return 1;
    }
    auto gw = runconfig::make_gateway(config);
    auto run = forge::forge_corpus(problems, *gw, config.forge, config.workers);

    auto header = runconfig::output_header(config);
    corpus::write_records(out_path(config, "reversed.jsonl"), run.reversed, header);
    corpus::write_records(out_path(config, "rejections.jsonl"), run.rejections,
                          header);

    // Table-5-shaped per-dataset summary
    std::map<std::string, std::pair<size_t, size_t>> by_dataset;  // attempted, accepted
    std::map<std::string, std::string> dataset_of;
    for (const auto& p : problems) {
        by_dataset[p.dataset].first += 1;
        dataset_of[p.id] = p.dataset;
    }
    for (const auto& r : run.reversed) by_dataset[dataset_of[r.source_id]].second += 1;

    std::vector<json> stat_rows;
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& [dataset, counts] : by_dataset) {
        double rate = corpus::success_rate(counts.second, counts.first);
        stat_rows.push_back(json{{"dataset", dataset},
                                 {"original_samples", counts.first},
                                 {"final_samples", counts.second},
                                 {"success_rate", rate}});
        csv_rows.push_back({dataset, std::to_string(counts.first),
                            std::to_string(counts.second), fmt(rate)});
    }
    write_jsonl(out_path(config, "forge_stats.jsonl"), header, stat_rows);
    write_csv(out_path(config, "forge_stats.csv"), header,
              {"dataset", "original_samples", "final_samples", "success_rate"},
              csv_rows);

    std::cout << "forge: " << run.stats.accepted << "/" << run.stats.attempted
              << " accepted (" << fmt(run.stats.rate()) << "%)\n";
    return 0;
}

std::vector<evalharness::PairedProblem> build_pairs(
    const runconfig::RunConfig& config,
    const std::vector<corpus::ProblemRecord>& problems,
    const std::vector<corpus::ReversedProblem>& reversed) {
    std::map<std::string, const corpus::ReversedProblem*> by_source;
    for (const auto& r : reversed) by_source.emplace(r.source_id, &r);
    std::vector<evalharness::PairedProblem> pairs;
    for (const auto& p : problems) {
        auto it = by_source.find(p.id);
        if (it == by_source.end()) continue;
        pairs.push_back({p, it->second->question, it->second->answer,
                         it->second->id});
    }
    (void)config;
    return pairs;
}

int cmd_sample(const CommonFlags& flags) {
    auto config = resolve_config(flags);
    auto problems = corpus::load_corpus(config.paths.problems);
    auto reversed = corpus::load_reversed(config.paths.reversed);
    auto pairs = build_pairs(config, problems, reversed);
    if (pairs.empty()) {
        std::cerr << "sample: no paired problems\n";
        return 1;
    }
    if (config.eval.models.empty()) {
        std::cerr << "sample: eval.models is empty\n";
        return 1;
    }
    auto gw = runconfig::make_gateway(config);
    std::vector<evalharness::SampleRecord> all;
    for (const auto& model : config.eval.models) {
        auto records = evalharness::sample_and_score(pairs, *gw, model,
                                                     config.eval.sampling,
                                                     config.workers);
        all.insert(all.end(), records.begin(), records.end());
    }
    evalharness::write_samples(out_path(config, "samples.jsonl"), all,
                               runconfig::output_header(config));
    std::cout << "sample: " << all.size() << " records\n";
    return 0;
}

int cmd_score(const CommonFlags& flags) {
    auto config = resolve_config(flags);
    auto samples = evalharness::load_samples(config.paths.samples);
    auto problems = corpus::load_corpus(config.paths.problems);
    auto by_id = problems_by_id(problems);

    // (model, dataset, variant) -> records
    std::map<std::tuple<std::string, std::string, std::string>,
             std::vector<evalharness::SampleRecord>>
        groups;
    for (const auto& s : samples) {
        auto it = by_id.find(s.problem_id);
        std::string dataset = it != by_id.end() ? it->second.dataset : "";
        groups[{s.model, dataset, s.variant}].push_back(s);
    }

    auto header = runconfig::output_header(config);
    std::vector<json> rows;
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>>
        table;  // (model, dataset) -> variant -> avg
    for (const auto& [key, records] : groups) {
        const auto& [model, dataset, variant] = key;
        double avg = evalharness::average_at_k(records);
        size_t n_problems = 0;
        {
            std::set<std::string> ids;
            for (const auto& r : records) ids.insert(r.problem_id);
            n_problems = ids.size();
        }
        int k = static_cast<int>(records.size() / std::max<size_t>(n_problems, 1));
        rows.push_back(json{{"model", model},
                            {"dataset", dataset},
                            {"variant", variant},
                            {"average_at_k", avg},
                            {"k", k},
                            {"n_problems", n_problems}});
        table[{model, dataset}][variant] = avg;
    }
    write_jsonl(out_path(config, "scores.jsonl"), header, rows);

    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& [key, variants] : table) {
        double orig = variants.count("original") ? variants.at("original") : 0.0;
        double rev = variants.count("reversed") ? variants.at("reversed") : 0.0;
        csv_rows.push_back(
            {key.first, key.second, fmt(orig), fmt(rev), fmt(rev - orig)});
    }
    write_csv(out_path(config, "scores.csv"), header,
              {"model", "dataset", "original", "reversed", "delta"}, csv_rows);
    std::cout << "score: " << rows.size() << " rows\n";
    return 0;
}

int cmd_analyze(const CommonFlags& flags) {
    auto config = resolve_config(flags);
    auto samples = evalharness::load_samples(config.paths.samples);
    auto problems = corpus::load_corpus(config.paths.problems);
    auto reversed = corpus::load_reversed(config.paths.reversed);
    auto by_id = problems_by_id(problems);

    std::map<std::string, std::string> original_gold, reversed_gold, dataset_of;
    for (const auto& p : problems) {
        original_gold[p.id] = p.answer;
        dataset_of[p.id] = p.dataset;
    }
    for (const auto& r : reversed) reversed_gold[r.source_id] = r.answer;

    auto families = config.analysis.families;
    if (families.empty()) {
        std::set<std::string> models;
        for (const auto& s : samples) models.insert(s.model);
        families = stats::propose_family_map(
            std::vector<std::string>(models.begin(), models.end()));
    }

    auto header = runconfig::output_header(config);

    // transitions, per dataset
    std::map<std::string, std::vector<evalharness::SampleRecord>> by_dataset;
    for (const auto& s : samples) by_dataset[dataset_of[s.problem_id]].push_back(s);

    std::vector<json> transition_rows;
    std::vector<json> overlap_rows;
    std::vector<json> utest_rows;
    std::vector<json> anchoring_rows;
    std::vector<json> decomposition_rows;
    std::vector<stats::OverlapRow> all_overlap;

    for (const auto& [dataset, recs] : by_dataset) {
        auto summary = evalharness::classify_transitions(recs, original_gold);
        for (const auto& o : summary.outcomes)
            transition_rows.push_back(
                json{{"dataset", dataset},
                     {"problem_id", o.problem_id},
                     {"model", o.model},
                     {"orig_correct_majority", o.orig_correct_majority},
                     {"rev_correct_majority", o.rev_correct_majority},
                     {"transition", o.transition},
                     {"rev_same_as_original", o.rev_same_as_original}});

        std::set<std::string> models;
        for (const auto& o : summary.outcomes) models.insert(o.model);
        if (models.size() >= 2) {
            auto overlap =
                stats::pairwise_tf_overlap(summary.outcomes, families, dataset);
            for (const auto& row : overlap.rows) {
                overlap_rows.push_back(json{{"dataset", row.dataset},
                                            {"model_a", row.model_a},
                                            {"model_b", row.model_b},
                                            {"jaccard", row.jaccard},
                                            {"same_family", row.same_family}});
                all_overlap.push_back(row);
            }
            try {
                auto utest = stats::family_overlap_test_single(overlap.rows);
                utest_rows.push_back(json{{"dataset", dataset},
                                          {"mean_same", utest.mean_same},
                                          {"mean_cross", utest.mean_cross},
                                          {"u", utest.u_statistic},
                                          {"p", utest.p_value},
                                          {"method", utest.method},
                                          {"n_same", utest.n_same},
                                          {"n_cross", utest.n_cross}});
            } catch (const std::invalid_argument& e) {
                std::cerr << "analyze: utest skipped for " << dataset << ": "
                          << e.what() << "\n";
            }
        } else {
            std::cerr << "analyze: fewer than 2 models for " << dataset
                      << "; overlap/utest skipped\n";
        }

        try {
            double rate = evalharness::anchoring_rate(
                recs, original_gold, reversed_gold,
                config.analysis.exclude_equal_golds);
            size_t n = 0;
            for (const auto& r : recs)
                if (r.variant == "reversed") ++n;
            anchoring_rows.push_back(json{{"dataset", dataset},
                                          {"same_as_original_pct", rate},
                                          {"n_reversed_samples", n}});
        } catch (const std::invalid_argument&) {
        }

        auto decomposition =
            stats::decompose_failures(summary.outcomes, recs, families, dataset);
        json d{{"dataset", decomposition.dataset},
               {"original_acc", decomposition.original_acc},
               {"reversed_acc", decomposition.reversed_acc},
               {"tf_rate", decomposition.tf_rate}};
        d["tf_difficulty"] = decomposition.tf_difficulty
                                 ? json(*decomposition.tf_difficulty)
                                 : json(nullptr);
        d["tf_anchoring_rate"] = decomposition.tf_anchoring_rate
                                     ? json(*decomposition.tf_anchoring_rate)
                                     : json(nullptr);
        decomposition_rows.push_back(std::move(d));
    }

    if (!all_overlap.empty()) {
        try {
            auto utest = stats::family_overlap_test_all_datasets(all_overlap);
            utest_rows.push_back(json{{"dataset", "all"},
                                      {"mean_same", utest.mean_same},
                                      {"mean_cross", utest.mean_cross},
                                      {"u", utest.u_statistic},
                                      {"p", utest.p_value},
                                      {"method", utest.method},
                                      {"n_same", utest.n_same},
                                      {"n_cross", utest.n_cross}});
        } catch (const std::invalid_argument& e) {
            std::cerr << "analyze: all-datasets utest skipped: " << e.what()
                      << "\n";
        }
    }

    write_jsonl(out_path(config, "transitions.jsonl"), header, transition_rows);
    write_jsonl(out_path(config, "overlap.jsonl"), header, overlap_rows);
    write_jsonl(out_path(config, "utest.jsonl"), header, utest_rows);
    write_jsonl(out_path(config, "anchoring.jsonl"), header, anchoring_rows);
    write_jsonl(out_path(config, "decomposition.jsonl"), header,
                decomposition_rows);

    std::vector<std::vector<std::string>> csv;
    for (const auto& r : transition_rows)
        csv.push_back({r.at("dataset").get<std::string>(),
                       r.at("problem_id").get<std::string>(),
                       r.at("model").get<std::string>(),
                       r.at("transition").get<std::string>(),
                       r.at("rev_same_as_original").get<bool>() ? "true"
                                                                : "false"});
    write_csv(out_path(config, "transitions.csv"), header,
              {"dataset", "problem_id", "model", "transition",
               "rev_same_as_original"},
              csv);
    csv.clear();
    for (const auto& r : overlap_rows)
        csv.push_back({r.at("dataset").get<std::string>(),
                       r.at("model_a").get<std::string>(),
                       r.at("model_b").get<std::string>(),
                       fmt(r.at("jaccard").get<double>()),
                       r.at("same_family").get<bool>() ? "true" : "false"});
    write_csv(out_path(config, "overlap.csv"), header,
              {"dataset", "model_a", "model_b", "jaccard", "same_family"}, csv);
    csv.clear();
    for (const auto& r : utest_rows)
        csv.push_back({r.at("dataset").get<std::string>(),
                       fmt(r.at("mean_same").get<double>()),
                       fmt(r.at("mean_cross").get<double>()),
                       fmt(r.at("u").get<double>()), fmt(r.at("p").get<double>()),
                       r.at("method").get<std::string>(),
                       std::to_string(r.at("n_same").get<size_t>()),
                       std::to_string(r.at("n_cross").get<size_t>())});
    write_csv(out_path(config, "utest.csv"), header,
              {"dataset", "mean_same", "mean_cross", "u", "p", "method", "n_same",
               "n_cross"},
              csv);
    csv.clear();
    for (const auto& r : anchoring_rows)
        csv.push_back({r.at("dataset").get<std::string>(),
                       fmt(r.at("same_as_original_pct").get<double>()),
                       std::to_string(r.at("n_reversed_samples").get<size_t>())});
    write_csv(out_path(config, "anchoring.csv"), header,
              {"dataset", "same_as_original_pct", "n_reversed_samples"}, csv);
    csv.clear();
    for (const auto& r : decomposition_rows)
        csv.push_back({r.at("dataset").get<std::string>(),
                       fmt(r.at("original_acc").get<double>()),
                       fmt(r.at("reversed_acc").get<double>()),
                       fmt(r.at("tf_rate").get<double>()),
                       r.at("tf_difficulty").is_null()
                           ? ""
                           : fmt(r.at("tf_difficulty").get<double>()),
                       r.at("tf_anchoring_rate").is_null()
                           ? ""
                           : fmt(r.at("tf_anchoring_rate").get<double>())});
    write_csv(out_path(config, "decomposition.csv"), header,
              {"dataset", "original_acc", "reversed_acc", "tf_rate",
               "tf_difficulty", "tf_anchoring_rate"},
              csv);

    std::cout << "analyze: " << transition_rows.size() << " transitions, "
              << overlap_rows.size() << " overlap rows, " << utest_rows.size()
              << " utest rows\n";
    return 0;
}

int cmd_export_augment(const CommonFlags& flags) {
    auto config = resolve_config(flags);
    forge::AugmentMode mode = forge::AugmentMode::reverse;
    if (flags.mode) {
        if (*flags.mode == "duplicate") mode = forge::AugmentMode::duplicate;
        else if (*flags.mode != "reverse")
            throw runconfig::ConfigError(
                "export-augment --mode must be reverse|duplicate");
    }
    auto problems = corpus::load_corpus(config.paths.problems);
    std::vector<corpus::ReversedProblem> reversed;
    if (mode == forge::AugmentMode::reverse)
        reversed = corpus::load_reversed(config.paths.reversed);
    auto result = forge::export_augmentation(problems, reversed, mode);
    corpus::write_records(out_path(config, "augmented.jsonl"), result.records,
                          runconfig::output_header(config));
    std::cout << "export-augment: " << result.records.size() << " records, "
              << result.skipped << " skipped\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"answer-inversion pipeline: forge reversed math problems, "
                 "sample and score models, analyze behavioral shifts"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* forge_cmd = app.add_subcommand("forge", "generate-and-verify reversals");
    auto* sample_cmd = app.add_subcommand("sample", "sample model responses");
    auto* score_cmd = app.add_subcommand("score", "compute average@k tables");
    auto* analyze_cmd =
        app.add_subcommand("analyze", "transitions, overlap, anchoring, decomposition");
    auto* export_cmd =
        app.add_subcommand("export-augment", "write RL-augmentation corpus");
    for (auto* cmd : {forge_cmd, sample_cmd, score_cmd, analyze_cmd, export_cmd})
        add_common_flags(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (forge_cmd->parsed()) return cmd_forge(flags);
        if (sample_cmd->parsed()) return cmd_sample(flags);
        if (score_cmd->parsed()) return cmd_score(flags);
        if (analyze_cmd->parsed()) return cmd_analyze(flags);
        if (export_cmd->parsed()) return cmd_export_augment(flags);
    } catch (const runconfig::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
