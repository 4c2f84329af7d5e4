#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reversemath::corpus {

struct ProblemRecord {
    std::string id;
    std::string question;
    std::string answer;  // canonical gold answer, kept as a string
    std::string dataset;
    std::string language = "en";
    std::map<std::string, std::string> meta;
};

struct ReversedProblem {
    std::string id;
    std::string source_id;
    std::string question;
    std::string answer;           // the masked value
    std::string original_answer;  // gold answer of the source problem
    std::string masked_surface;   // exact span text in the source question
    size_t mask_begin = 0;
    size_t mask_end = 0;
    int value_index = 0;
    int attempts = 0;
    std::string generator_model;
    std::string verifier_model;
    std::string mode;  // "rewritten" | "rule_based"
};

struct RejectionRecord {
    std::string source_id;
    std::string reason;  // no_candidates | leak | no_unique_answer | mismatch |
                         // exhausted | backend_error
    int attempts = 0;
    std::string detail;
};

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool valid_rejection_reason(const std::string& reason);

nlohmann::json to_json(const ProblemRecord&);
nlohmann::json to_json(const ReversedProblem&);
nlohmann::json to_json(const RejectionRecord&);
ProblemRecord problem_from_json(const nlohmann::json&);
ReversedProblem reversed_from_json(const nlohmann::json&);
RejectionRecord rejection_from_json(const nlohmann::json&);

// One JSON object per line. A leading header record (an object carrying
// "run_id") is skipped. Duplicate ids and malformed lines are errors that
// name the offending line number.
std::vector<ProblemRecord> load_corpus(const std::string& path);
std::vector<ReversedProblem> load_reversed(const std::string& path);
std::vector<RejectionRecord> load_rejections(const std::string& path);

size_t write_records(const std::string& path,
                     const std::vector<ProblemRecord>& records,
                     const std::optional<nlohmann::json>& header = std::nullopt);
size_t write_records(const std::string& path,
                     const std::vector<ReversedProblem>& records,
                     const std::optional<nlohmann::json>& header = std::nullopt);
size_t write_records(const std::string& path,
                     const std::vector<RejectionRecord>& records,
                     const std::optional<nlohmann::json>& header = std::nullopt);

// 100 * accepted / attempted. Throws CorpusError when attempted == 0.
double success_rate(size_t accepted, size_t attempted);

}  // namespace reversemath::corpus
