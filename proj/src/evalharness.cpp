#include "reversemath/evalharness.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "reversemath/answereq.hpp"

namespace reversemath::evalharness {

using nlohmann::json;

json to_json(const SampleRecord& r) {
    return json{{"problem_id", r.problem_id}, {"variant", r.variant},
                {"model", r.model},           {"sample_index", r.sample_index},
                {"response_text", r.response_text},
                {"extracted", r.extracted},   {"correct", r.correct}};
}

SampleRecord sample_from_json(const json& j) {
    SampleRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.response_text = j.at("response_text").get<std::string>();
    r.extracted = j.at("extracted").get<std::string>();
    r.correct = j.at("correct").get<bool>();
    return r;
}

std::vector<SampleRecord> load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corpus::CorpusError("cannot open samples file: " + path);
    std::vector<SampleRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw corpus::CorpusError(path + ":" + std::to_string(lineno) +
                                      ": malformed sample line");
        if (j.contains("run_id") && !j.contains("problem_id")) continue;
        out.push_back(sample_from_json(j));
    }
    return out;
}

size_t write_samples(const std::string& path,
                     const std::vector<SampleRecord>& records,
                     const std::optional<json>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw corpus::CorpusError("cannot open file for writing: " + path);
    if (header) out << header->dump() << '\n';
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw corpus::CorpusError("write failed: " + path);
    return records.size();
}

std::vector<SampleRecord> sample_and_score(
    const std::vector<PairedProblem>& problems, gateway::Gateway& gw,
    const std::string& model, const SamplingConfig& config, int workers) {
    if (config.k < 1) throw std::invalid_argument("k must be >= 1");

    struct Task {
        const PairedProblem* problem;
        bool reversed;
    };
    std::vector<Task> tasks;
    tasks.reserve(problems.size() * 2);
    for (const auto& p : problems) {
        tasks.push_back({&p, false});
        tasks.push_back({&p, true});
    }

    std::vector<std::vector<SampleRecord>> results(tasks.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        while (true) {
            size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            const auto& task = tasks[t];
            const auto& p = *task.problem;
            const std::string variant = task.reversed ? "reversed" : "original";
            const std::string& pid = p.original.id;
            const std::string& question =
                task.reversed ? p.reversed_question : p.original.question;
            const std::string& gold =
                task.reversed ? p.reversed_gold : p.original.answer;

            gateway::GenerationRequest request;
            request.prompt = question;
            request.temperature = config.temperature;
            request.top_p = config.top_p;
            request.top_k = config.top_k;
            request.n_samples = config.k;
            auto it = config.max_tokens_by_dataset.find(p.original.dataset);
            request.max_tokens = it != config.max_tokens_by_dataset.end()
                                     ? it->second
                                     : config.default_max_tokens;
            request.tag = "sample:" + model + ":" + pid + ":" + variant;
            request.model = model;

            std::vector<std::string> texts;
            std::string failure;
            try {
                texts = gw.generate(request).texts;
            } catch (const gateway::BackendError& e) {
                failure = e.what();
            }
            auto& rows = results[t];
            for (int i = 0; i < config.k; ++i) {
                SampleRecord rec;
                rec.problem_id = pid;
                rec.variant = variant;
                rec.model = model;
                rec.sample_index = i;
                if (!failure.empty()) {
                    rec.response_text = "[backend_error] " + failure;
                    rec.correct = false;
                } else {
                    rec.response_text = texts.at(i);
                    try {
                        rec.extracted = answereq::extract_final(rec.response_text);
                        rec.correct = answereq::equivalent(rec.extracted, gold);
                    } catch (const answereq::ExtractionError&) {
                        rec.correct = false;
                    }
                }
                rows.push_back(std::move(rec));
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    std::vector<SampleRecord> out;
    for (auto& rows : results)
        for (auto& r : rows) out.push_back(std::move(r));
    return out;
}

double average_at_k(const std::vector<SampleRecord>& records) {
    if (records.empty()) throw std::invalid_argument("average_at_k: no records");
    std::map<std::string, std::pair<size_t, size_t>> per_problem;  // total, correct
    for (const auto& r : records) {
        auto& [total, correct] = per_problem[r.problem_id];
        ++total;
        if (r.correct) ++correct;
    }
    size_t k = per_problem.begin()->second.first;
    double sum = 0.0;
    for (const auto& [pid, counts] : per_problem) {
        if (counts.first != k)
            throw std::invalid_argument(
                "average_at_k: ragged sample count for problem '" + pid + "' (" +
                std::to_string(counts.first) + " vs " + std::to_string(k) + ")");
        sum += static_cast<double>(counts.second) / static_cast<double>(k);
    }
    return sum / static_cast<double>(per_problem.size());
}

bool majority_outcome(const std::vector<SampleRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("majority_outcome: no records");
    size_t correct = 0;
    for (const auto& r : records)
        if (r.correct) ++correct;
    return 2 * correct > records.size();
}

TransitionSummary classify_transitions(
    const std::vector<SampleRecord>& records,
    const std::map<std::string, std::string>& original_gold) {
    // (model, problem) -> records per variant
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::vector<SampleRecord>>>
        groups;
    for (const auto& r : records)
        groups[{r.model, r.problem_id}][r.variant].push_back(r);

    TransitionSummary summary;
    for (const auto& [key, variants] : groups) {
        auto orig = variants.find("original");
        auto rev = variants.find("reversed");
        if (orig == variants.end() || rev == variants.end()) {
            ++summary.skipped_missing_variant;
            continue;
        }
        PairedOutcome out;
        out.model = key.first;
        out.problem_id = key.second;
        out.orig_correct_majority = majority_outcome(orig->second);
        out.rev_correct_majority = majority_outcome(rev->second);
        out.transition = std::string(out.orig_correct_majority ? "T" : "F") +
                         (out.rev_correct_majority ? "T" : "F");

        auto gold_it = original_gold.find(key.second);
        if (gold_it != original_gold.end()) {
            size_t anchored = 0;
            for (const auto& r : rev->second)
                if (!r.extracted.empty() &&
                    answereq::equivalent(r.extracted, gold_it->second))
                    ++anchored;
            out.rev_same_as_original = 2 * anchored > rev->second.size();
        }
        summary.outcomes.push_back(std::move(out));
    }
    return summary;
}

double anchoring_rate(const std::vector<SampleRecord>& records,
                      const std::map<std::string, std::string>& original_gold,
                      const std::map<std::string, std::string>& reversed_gold,
                      bool exclude_equal_golds) {
    size_t total = 0;
    size_t anchored = 0;
    for (const auto& r : records) {
        if (r.variant != "reversed") continue;
        auto gold_it = original_gold.find(r.problem_id);
        if (gold_it == original_gold.end()) continue;
        if (exclude_equal_golds) {
            auto rev_it = reversed_gold.find(r.problem_id);
            if (rev_it != reversed_gold.end() &&
                answereq::equivalent(rev_it->second, gold_it->second))
                continue;
        }
        ++total;
        if (!r.extracted.empty() &&
            answereq::equivalent(r.extracted, gold_it->second))
            ++anchored;
    }
    if (total == 0)
        throw std::invalid_argument("anchoring_rate: no reversed records");
    return 100.0 * static_cast<double>(anchored) / static_cast<double>(total);
}

}  // namespace reversemath::evalharness
