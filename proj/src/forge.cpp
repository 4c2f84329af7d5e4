#include "reversemath/forge.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "reversemath/answereq.hpp"

namespace reversemath::forge {

namespace {

constexpr const char* kGeneratorPrompt =
    R"(You are a competition math problem rewriting assistant.

A single numeric value in the original problem has been
replaced with a hidden marker.

Your task is to rewrite the problem so that it naturally
asks for that missing value.

Requirements:
- Do not mention the hidden marker or the replacement process.
- The rewritten problem should read as a standard math problem.
- Preserve the original mathematical content, constraints,
  and notation as much as possible.
- Keep all unchanged numbers exactly the same.
- Do not introduce new assumptions or facts.
- Do not provide solution steps or explanations.
- Output only the rewritten problem statement.
- Incorporate the original correct answer as a known fact
  in the rewritten problem.

Original problem:
<<<
{original_problem}
>>>

Correct answer:
<<<
{original_answer}
>>>

Problem with hidden marker:
<<<
{masked_problem}
>>>

Rewritten problem:
)";

constexpr const char* kVerifierPrompt =
    R"(Solve the following competition math problem.

IMPORTANT: Before solving, you must check whether the problem leaks the answer.

Leak definition:
- The answer appears directly in the problem.
- The answer can be obtained by directly reading coordinates, labels, tables, diagram code (e.g., TikZ), or source text.
- For count questions, the answer can be obtained by simply counting listed items.
- For entity/name questions, the answer is explicitly mentioned.
- For statement questions, the missing statement or equivalent wording is already present.

If ANY of the above is true, output exactly:
LEAK

Otherwise, follow these rules:
- Think carefully before answering.
- If there is exactly one final answer, output \boxed{...}
- If multiple answers exist, output NO_UNIQUE_ANSWER
- Do not output the solution.
- Output only the final result.

Problem:
<<<
{problem}
>>>

Final answer:
)";

std::string replace_all(std::string text, std::string_view slot,
                        std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render_template(const std::string& tmpl, std::string_view slot,
                            std::string_view value) {
    if (tmpl.find(slot) == std::string::npos)
        throw std::runtime_error("template is missing its " + std::string(slot) +
                                 " slot");
    return replace_all(tmpl, slot, value);
}

std::string trim_copy(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const std::vector<numext::NumberLexicon>& effective_lexicons(
    const ForgeConfig& config) {
    static const std::vector<numext::NumberLexicon> builtin = {
        numext::builtin_english_lexicon()};
    return config.lexicons.empty() ? builtin : config.lexicons;
}

}  // namespace

double SuccessStats::rate() const {
    return corpus::success_rate(accepted, attempted);
}

std::string build_intermediate(const corpus::ProblemRecord& problem,
                               const numext::MaskCandidate& candidate,
                               const ForgeConfig& config) {
    std::string masked =
        numext::mask_value(problem.question, candidate, config.mask_token);
    std::string condition =
        render_template(config.condition_template, "{answer}", problem.answer);
    std::string query =
        render_template(config.query_template, "{mask}", config.mask_token);
    return masked + " " + condition + " " + query;
}

std::string render_generator_prompt(const std::string& original_problem,
                                    const std::string& original_answer,
                                    const std::string& masked_problem) {
    std::string prompt = kGeneratorPrompt;
    prompt = replace_all(std::move(prompt), "{original_problem}", original_problem);
    prompt = replace_all(std::move(prompt), "{original_answer}", original_answer);
    prompt = replace_all(std::move(prompt), "{masked_problem}", masked_problem);
    return prompt;
}

std::string render_verifier_prompt(const std::string& problem) {
    return replace_all(kVerifierPrompt, "{problem}", problem);
}

std::string rewrite(const std::string& intermediate,
                    const corpus::ProblemRecord& problem,
                    const numext::MaskCandidate& candidate, gateway::Gateway& gw,
                    const ForgeConfig& config) {
    std::string masked =
        numext::mask_value(problem.question, candidate, config.mask_token);
    gateway::GenerationRequest request = config.rewrite_defaults;
    request.prompt =
        render_generator_prompt(problem.question, problem.answer, masked);
    request.n_samples = 1;
    request.tag = "rewrite:" + problem.id;
    request.model = config.generator_model;
    (void)intermediate;  // carried for provenance; the prompt holds the pieces
    auto result = gw.generate(request);
    return trim_copy(result.texts.at(0));
}

VerifierVerdict parse_verdict(const std::string& completion) {
    VerifierVerdict verdict;
    verdict.raw = completion;

    // A standalone LEAK line dominates any other content (fail closed).
    std::istringstream lines(completion);
    std::string line;
    bool saw_no_unique = false;
    while (std::getline(lines, line)) {
        std::string t = trim_copy(line);
        if (t == "LEAK") {
            verdict.status = VerifierVerdict::Status::leak;
            return verdict;
        }
        if (t == "NO_UNIQUE_ANSWER") saw_no_unique = true;
    }
    if (saw_no_unique) {
        verdict.status = VerifierVerdict::Status::no_unique_answer;
        return verdict;
    }
    try {
        verdict.predicted = answereq::extract_final(completion);
        verdict.status = VerifierVerdict::Status::answer;
    } catch (const answereq::ExtractionError&) {
        verdict.status = VerifierVerdict::Status::no_unique_answer;
    }
    return verdict;
}

VerifierVerdict verify(const std::string& question, const std::string& tag,
                       gateway::Gateway& gw, const ForgeConfig& config) {
    gateway::GenerationRequest request = config.verify_defaults;
    request.prompt = render_verifier_prompt(question);
    request.n_samples = 1;
    request.tag = tag;
    request.model = config.verifier_model;
    auto result = gw.generate(request);
    return parse_verdict(result.texts.at(0));
}

ForgeOutcome forge_one(const corpus::ProblemRecord& problem,
                       gateway::Gateway& gw, const ForgeConfig& config) {
    auto candidates =
        numext::extract_values(problem.question, effective_lexicons(config));
    if (candidates.empty())
        return corpus::RejectionRecord{problem.id, "no_candidates", 0,
                                       "no maskable numeric values found"};

    // Remember each candidate's extraction ordinal before shuffling.
    std::vector<std::pair<numext::MaskCandidate, int>> ordered;
    {
        std::vector<numext::MaskCandidate> shuffled = numext::candidate_order(
            candidates, numext::mix_seed(config.seed, problem.id));
        for (const auto& c : shuffled) {
            for (size_t i = 0; i < candidates.size(); ++i) {
                if (candidates[i].begin == c.begin && candidates[i].end == c.end) {
                    ordered.emplace_back(c, static_cast<int>(i));
                    break;
                }
            }
        }
    }

    int attempts = 0;
    std::string last_failure = "no attempt made";
    for (const auto& [candidate, value_index] : ordered) {
        for (int r = 0; r < config.rewrites_per_candidate; ++r) {
            if (attempts >= config.max_attempts)
                return corpus::RejectionRecord{problem.id, "exhausted", attempts,
                                               "attempt budget exhausted; last failure: " +
                                                   last_failure};
            ++attempts;
            std::string question;
            try {
                std::string intermediate =
                    build_intermediate(problem, candidate, config);
                if (config.rule_based) {
                    question = intermediate;
                } else {
                    question = rewrite(intermediate, problem, candidate, gw, config);
                }
                if (question.empty()) {
                    last_failure = "empty rewrite";
                    continue;
                }
                auto verdict =
                    verify(question, "verify:" + problem.id, gw, config);
                switch (verdict.status) {
                    case VerifierVerdict::Status::leak:
                        last_failure = "leak";
                        continue;
                    case VerifierVerdict::Status::no_unique_answer:
                        last_failure = "no_unique_answer";
                        continue;
                    case VerifierVerdict::Status::answer:
                        break;
                }
                if (!answereq::equivalent(verdict.predicted, candidate.surface)) {
                    last_failure = "mismatch: verifier predicted '" +
                                   verdict.predicted + "', masked value '" +
                                   candidate.surface + "'";
                    continue;
                }
                corpus::ReversedProblem rev;
                rev.id = problem.id + "_rev";
                rev.source_id = problem.id;
                rev.question = question;
                rev.answer = answereq::to_string(candidate.value);
                rev.original_answer = problem.answer;
                rev.masked_surface = candidate.surface;
                rev.mask_begin = candidate.begin;
                rev.mask_end = candidate.end;
                rev.value_index = value_index;
                rev.attempts = attempts;
                rev.generator_model =
                    config.rule_based ? "" : config.generator_model;
                rev.verifier_model = config.verifier_model;
                rev.mode = config.rule_based ? "rule_based" : "rewritten";
                return rev;
            } catch (const gateway::BackendError& e) {
                return corpus::RejectionRecord{problem.id, "backend_error",
                                               attempts, e.what()};
            }
        }
    }
    return corpus::RejectionRecord{problem.id, "exhausted", attempts,
                                   "all candidates tried; last failure: " +
                                       last_failure};
}

ForgeRunResult forge_corpus(const std::vector<corpus::ProblemRecord>& problems,
                            gateway::Gateway& gw, const ForgeConfig& config,
                            int workers) {
    ForgeRunResult run;
    run.stats.attempted = problems.size();
    if (problems.empty()) return run;

    std::vector<std::optional<ForgeOutcome>> outcomes(problems.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= problems.size()) break;
            try {
                outcomes[i] = forge_one(problems[i], gw, config);
            } catch (const std::exception& e) {
                outcomes[i] = corpus::RejectionRecord{problems[i].id,
                                                      "backend_error", 0, e.what()};
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (auto& outcome : outcomes) {
        if (auto* rev = std::get_if<corpus::ReversedProblem>(&*outcome)) {
            run.reversed.push_back(std::move(*rev));
            ++run.stats.accepted;
        } else {
            run.rejections.push_back(
                std::move(std::get<corpus::RejectionRecord>(*outcome)));
        }
    }
    return run;
}

AugmentationResult export_augmentation(
    const std::vector<corpus::ProblemRecord>& problems,
    const std::vector<corpus::ReversedProblem>& reversed, AugmentMode mode) {
    AugmentationResult out;
    if (mode == AugmentMode::duplicate) {
        for (const auto& p : problems) {
            for (const char* variant : {"original", "duplicate"}) {
                corpus::ProblemRecord rec = p;
                rec.id = variant == std::string_view("original")
                             ? p.id
                             : p.id + "_dup";
                rec.meta["variant"] = variant;
                out.records.push_back(std::move(rec));
            }
        }
        return out;
    }

    std::map<std::string, const corpus::ReversedProblem*> by_source;
    for (const auto& r : reversed) by_source.emplace(r.source_id, &r);
    for (const auto& p : problems) {
        auto it = by_source.find(p.id);
        if (it == by_source.end()) {
            ++out.skipped;
            continue;
        }
        corpus::ProblemRecord orig = p;
        orig.meta["variant"] = "original";
        out.records.push_back(std::move(orig));

        const auto& r = *it->second;
        corpus::ProblemRecord rev;
        rev.id = r.id;
        rev.question = r.question;
        rev.answer = r.answer;
        rev.dataset = p.dataset;
        rev.language = p.language;
        rev.meta["variant"] = "reversed";
        rev.meta["source_id"] = r.source_id;
        out.records.push_back(std::move(rev));
    }
    return out;
}

}  // namespace reversemath::forge
