#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reversemath/corpus.hpp"
#include "reversemath/gateway.hpp"
#include "reversemath/numext.hpp"

namespace reversemath::forge {

struct VerifierVerdict {
    enum class Status { answer, no_unique_answer, leak };
    Status status = Status::no_unique_answer;
    std::string predicted;  // status == answer only
    std::string raw;
};

struct ForgeConfig {
    std::string mask_token = "[MASK]";
    int max_attempts = 10;            // total rewrite+verify cycles per problem
    int rewrites_per_candidate = 2;
    uint64_t seed = 0;
    std::string condition_template =
        "It is known that the answer to the question above is {answer}.";
    std::string query_template = "What is the value of {mask}?";
    bool rule_based = false;  // skip LLM rewriting, emit the intermediate problem
    std::string generator_model;
    std::string verifier_model;
    gateway::GenerationRequest rewrite_defaults{.temperature = 0.7,
                                                .top_p = 0.95,
                                                .top_k = 20,
                                                .max_tokens = 2048};
    gateway::GenerationRequest verify_defaults{.temperature = 0.0,
                                               .top_p = 1.0,
                                               .top_k = 0,
                                               .max_tokens = 2048};
    std::vector<numext::NumberLexicon> lexicons;  // defaults to builtin English
};

struct SuccessStats {
    size_t attempted = 0;
    size_t accepted = 0;
    double rate() const;  // corpus::success_rate
};

using ForgeOutcome =
    std::variant<corpus::ReversedProblem, corpus::RejectionRecord>;

// Masked question + answer condition + explicit query; this exact text is
// also the rule-based baseline problem.
std::string build_intermediate(const corpus::ProblemRecord& problem,
                               const numext::MaskCandidate& candidate,
                               const ForgeConfig& config);

std::string render_generator_prompt(const std::string& original_problem,
                                    const std::string& original_answer,
                                    const std::string& masked_problem);
std::string render_verifier_prompt(const std::string& problem);

std::string rewrite(const std::string& intermediate,
                    const corpus::ProblemRecord& problem,
                    const numext::MaskCandidate& candidate, gateway::Gateway& gw,
                    const ForgeConfig& config);

VerifierVerdict parse_verdict(const std::string& completion);

VerifierVerdict verify(const std::string& question, const std::string& tag,
                       gateway::Gateway& gw, const ForgeConfig& config);

ForgeOutcome forge_one(const corpus::ProblemRecord& problem,
                       gateway::Gateway& gw, const ForgeConfig& config);

struct ForgeRunResult {
    std::vector<corpus::ReversedProblem> reversed;
    std::vector<corpus::RejectionRecord> rejections;
    SuccessStats stats;
};

// Applies forge_one to every problem with a worker pool; outputs keep the
// input order so runs are byte-identical at any worker width.
ForgeRunResult forge_corpus(const std::vector<corpus::ProblemRecord>& problems,
                            gateway::Gateway& gw, const ForgeConfig& config,
                            int workers = 1);

struct AugmentationResult {
    std::vector<corpus::ProblemRecord> records;
    size_t skipped = 0;  // problems without a reversal, reverse mode only
};

enum class AugmentMode { reverse, duplicate };

AugmentationResult export_augmentation(
    const std::vector<corpus::ProblemRecord>& problems,
    const std::vector<corpus::ReversedProblem>& reversed, AugmentMode mode);

}  // namespace reversemath::forge
