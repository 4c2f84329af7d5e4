#include "reversemath/corpus.hpp"

#include <fstream>
#include <unordered_map>

namespace reversemath::corpus {

namespace {

using nlohmann::json;

bool is_header_record(const json& j) {
    return j.is_object() && j.contains("run_id") && !j.contains("id") &&
           !j.contains("source_id") && !j.contains("problem_id");
}

json parse_line(const std::string& path, size_t lineno, const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw CorpusError(path + ":" + std::to_string(lineno) +
                          ": malformed record line");
    return j;
}

template <typename Record, typename FromJson>
std::vector<Record> load_lines(const std::string& path, FromJson from_json,
                               bool check_ids) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open file: " + path);
    std::vector<Record> out;
    std::unordered_map<std::string, size_t> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(path, lineno, line);
        if (lineno == 1 && is_header_record(j)) continue;
        Record rec;
        try {
            rec = from_json(j);
        } catch (const std::exception& e) {
            throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (check_ids) {
            if constexpr (requires { rec.id; }) {
                auto [it, inserted] = seen.emplace(rec.id, lineno);
                if (!inserted)
                    throw CorpusError(path + ":" + std::to_string(lineno) +
                                      ": duplicate id '" + rec.id +
                                      "' (first seen at line " +
                                      std::to_string(it->second) + ")");
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

template <typename Record>
size_t write_lines(const std::string& path, const std::vector<Record>& records,
                   const std::optional<json>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    if (header) out << header->dump() << '\n';
    for (const auto& rec : records) out << to_json(rec).dump() << '\n';
    out.flush();
    if (!out) throw CorpusError("write failed: " + path);
    return records.size();
}

}  // namespace

bool valid_rejection_reason(const std::string& reason) {
    return reason == "no_candidates" || reason == "leak" ||
           reason == "no_unique_answer" || reason == "mismatch" ||
           reason == "exhausted" || reason == "backend_error";
}

json to_json(const ProblemRecord& r) {
    json j{{"id", r.id},
           {"question", r.question},
           {"answer", r.answer},
           {"dataset", r.dataset}};
    if (!r.language.empty()) j["language"] = r.language;
    if (!r.meta.empty()) j["meta"] = r.meta;
    return j;
}

ProblemRecord problem_from_json(const json& j) {
    ProblemRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    r.dataset = j.value("dataset", std::string{});
    r.language = j.value("language", std::string{"en"});
    if (j.contains("meta"))
        r.meta = j.at("meta").get<std::map<std::string, std::string>>();
    // unknown extra fields are preserved in meta
    for (auto& [key, val] : j.items()) {
        if (key == "id" || key == "question" || key == "answer" ||
            key == "dataset" || key == "language" || key == "meta")
            continue;
        r.meta[key] = val.is_string() ? val.get<std::string>() : val.dump();
    }
    if (r.id.empty()) throw CorpusError("record id is empty");
    if (r.question.empty()) throw CorpusError("record question is empty");
    if (r.answer.empty()) throw CorpusError("record answer is empty");
    return r;
}

json to_json(const ReversedProblem& r) {
    return json{{"id", r.id},
                {"source_id", r.source_id},
                {"question", r.question},
                {"answer", r.answer},
                {"original_answer", r.original_answer},
                {"masked_surface", r.masked_surface},
                {"mask_span", json::array({r.mask_begin, r.mask_end})},
                {"value_index", r.value_index},
                {"attempts", r.attempts},
                {"generator_model", r.generator_model},
                {"verifier_model", r.verifier_model},
                {"mode", r.mode}};
}

ReversedProblem reversed_from_json(const json& j) {
    ReversedProblem r;
    r.id = j.at("id").get<std::string>();
    r.source_id = j.at("source_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    r.original_answer = j.at("original_answer").get<std::string>();
    r.masked_surface = j.at("masked_surface").get<std::string>();
    const auto& span = j.at("mask_span");
    r.mask_begin = span.at(0).get<size_t>();
    r.mask_end = span.at(1).get<size_t>();
    r.value_index = j.at("value_index").get<int>();
    r.attempts = j.at("attempts").get<int>();
    r.generator_model = j.value("generator_model", std::string{});
    r.verifier_model = j.value("verifier_model", std::string{});
    r.mode = j.at("mode").get<std::string>();
    if (r.mode != "rewritten" && r.mode != "rule_based")
        throw CorpusError("invalid mode: " + r.mode);
    return r;
}

json to_json(const RejectionRecord& r) {
    return json{{"source_id", r.source_id},
                {"reason", r.reason},
                {"attempts", r.attempts},
                {"detail", r.detail}};
}

RejectionRecord rejection_from_json(const json& j) {
    RejectionRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.reason = j.at("reason").get<std::string>();
    r.attempts = j.at("attempts").get<int>();
    r.detail = j.value("detail", std::string{});
    if (!valid_rejection_reason(r.reason))
        throw CorpusError("invalid rejection reason: " + r.reason);
    return r;
}

std::vector<ProblemRecord> load_corpus(const std::string& path) {
    return load_lines<ProblemRecord>(path, problem_from_json, true);
}

std::vector<ReversedProblem> load_reversed(const std::string& path) {
    return load_lines<ReversedProblem>(path, reversed_from_json, true);
}

std::vector<RejectionRecord> load_rejections(const std::string& path) {
    return load_lines<RejectionRecord>(path, rejection_from_json, false);
}

size_t write_records(const std::string& path,
                     const std::vector<ProblemRecord>& records,
                     const std::optional<json>& header) {
    return write_lines(path, records, header);
}

size_t write_records(const std::string& path,
                     const std::vector<ReversedProblem>& records,
                     const std::optional<json>& header) {
    return write_lines(path, records, header);
}

size_t write_records(const std::string& path,
                     const std::vector<RejectionRecord>& records,
                     const std::optional<json>& header) {
    return write_lines(path, records, header);
}

double success_rate(size_t accepted, size_t attempted) {
    if (attempted == 0) throw CorpusError("success_rate: attempted is zero");
    if (accepted > attempted)
        throw CorpusError("success_rate: accepted exceeds attempted");
    return 100.0 * static_cast<double>(accepted) / static_cast<double>(attempted);
}

}  // namespace reversemath::corpus
