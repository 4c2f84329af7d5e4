#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reversemath/corpus.hpp"
#include "reversemath/gateway.hpp"

namespace reversemath::evalharness {

struct SampleRecord {
    std::string problem_id;
    std::string variant;  // "original" | "reversed"
    std::string model;
    int sample_index = 0;
    std::string response_text;
    std::string extracted;
    bool correct = false;
};

nlohmann::json to_json(const SampleRecord&);
SampleRecord sample_from_json(const nlohmann::json&);
std::vector<SampleRecord> load_samples(const std::string& path);
size_t write_samples(const std::string& path,
                     const std::vector<SampleRecord>& records,
                     const std::optional<nlohmann::json>& header = std::nullopt);

struct PairedOutcome {
    std::string problem_id;
    std::string model;
    bool orig_correct_majority = false;
    bool rev_correct_majority = false;
    std::string transition;  // TT | TF | FT | FF
    bool rev_same_as_original = false;
};

struct PairedProblem {
    corpus::ProblemRecord original;
    std::string reversed_question;
    std::string reversed_gold;
    std::string reversed_id;
};

struct SamplingConfig {
    int k = 10;
    double temperature = 0.7;
    double top_p = 0.95;
    int top_k = 20;
    std::map<std::string, int> max_tokens_by_dataset;  // dataset tag -> budget
    int default_max_tokens = 4096;
};

// k completions per (problem, variant), scored with extract_final +
// equivalent. Backend failures yield correct = false records flagged in
// the response text.
std::vector<SampleRecord> sample_and_score(
    const std::vector<PairedProblem>& problems, gateway::Gateway& gw,
    const std::string& model, const SamplingConfig& config, int workers = 1);

struct ScoreRow {
    std::string model;
    std::string dataset;
    std::string variant;
    double average_at_k = 0.0;
    int k = 0;
    size_t n_problems = 0;
};

// Mean over problems of per-problem correct fraction. Throws when the group
// is ragged (a problem with a deviating sample count).
double average_at_k(const std::vector<SampleRecord>& records);

// Strict majority: correct count > k/2; an exact tie counts as incorrect.
bool majority_outcome(const std::vector<SampleRecord>& records);

struct TransitionSummary {
    std::vector<PairedOutcome> outcomes;
    size_t skipped_missing_variant = 0;
};

// original_gold: problem_id -> original gold answer, used for the
// anchored-to-original flag on reversed majorities.
TransitionSummary classify_transitions(
    const std::vector<SampleRecord>& records,
    const std::map<std::string, std::string>& original_gold);

// Sample-level anchoring frequency pooled over all models: percent of
// reversed-variant records whose extracted answer matches the original gold.
// exclude_equal_golds drops records whose reversed gold coincides with the
// original gold.
double anchoring_rate(const std::vector<SampleRecord>& records,
                      const std::map<std::string, std::string>& original_gold,
                      const std::map<std::string, std::string>& reversed_gold = {},
                      bool exclude_equal_golds = false);

}  // namespace reversemath::evalharness
