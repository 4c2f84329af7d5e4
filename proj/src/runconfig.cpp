#include "reversemath/runconfig.hpp"

#include <fstream>
#include <sstream>

#include "reversemath/numext.hpp"

namespace reversemath::runconfig {

using nlohmann::json;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_request(const json& j, gateway::GenerationRequest& req) {
    read_field(j, "temperature", req.temperature);
    read_field(j, "top_p", req.top_p);
    read_field(j, "top_k", req.top_k);
    read_field(j, "max_tokens", req.max_tokens);
}

json request_to_json(const gateway::GenerationRequest& req) {
    return json{{"temperature", req.temperature},
                {"top_p", req.top_p},
                {"top_k", req.top_k},
                {"max_tokens", req.max_tokens}};
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    read_field(j, "seed", c.seed);
    read_field(j, "workers", c.workers);

    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        read_field(b, "kind", c.backend.kind);
        read_field(b, "fixture", c.backend.fixture_path);
        read_field(b, "record", c.backend.record);
        read_field(b, "base_url", c.backend.base_url);
        read_field(b, "generator_model", c.backend.generator_model);
        read_field(b, "verifier_model", c.backend.verifier_model);
        read_field(b, "send_top_k", c.backend.send_top_k);
        read_field(b, "max_retries", c.backend.max_retries);
        read_field(b, "backoff_initial_ms", c.backend.backoff_initial_ms);
        read_field(b, "timeout_s", c.backend.timeout_s);
        read_field(b, "max_in_flight", c.backend.max_in_flight);
        read_field(b, "requests_per_second", c.backend.requests_per_second);
        if (c.backend.kind != "http" && c.backend.kind != "fixture")
            throw ConfigError("backend.kind must be 'http' or 'fixture'");
    }

    if (j.contains("forge")) {
        const auto& f = j.at("forge");
        read_field(f, "mask_token", c.forge.mask_token);
        read_field(f, "max_attempts", c.forge.max_attempts);
        read_field(f, "rewrites_per_candidate", c.forge.rewrites_per_candidate);
        read_field(f, "condition_template", c.forge.condition_template);
        read_field(f, "query_template", c.forge.query_template);
        std::string mode = c.forge.rule_based ? "rule_based" : "rewritten";
        read_field(f, "mode", mode);
        if (mode == "rule_based") c.forge.rule_based = true;
        else if (mode == "rewritten") c.forge.rule_based = false;
        else throw ConfigError("forge.mode must be 'rewritten' or 'rule_based'");
        if (f.contains("rewrite")) read_request(f.at("rewrite"), c.forge.rewrite_defaults);
        if (f.contains("verify")) read_request(f.at("verify"), c.forge.verify_defaults);
        if (c.forge.max_attempts < 1)
            throw ConfigError("forge.max_attempts must be >= 1");
        if (c.forge.rewrites_per_candidate < 1)
            throw ConfigError("forge.rewrites_per_candidate must be >= 1");
        if (c.forge.condition_template.find("{answer}") == std::string::npos)
            throw ConfigError("forge.condition_template is missing its {answer} slot");
        if (c.forge.query_template.find("{mask}") == std::string::npos)
            throw ConfigError("forge.query_template is missing its {mask} slot");
    }
    read_field(j, "lexicon_files", c.lexicon_files);

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        read_field(e, "models", c.eval.models);
        read_field(e, "k", c.eval.sampling.k);
        read_field(e, "temperature", c.eval.sampling.temperature);
        read_field(e, "top_p", c.eval.sampling.top_p);
        read_field(e, "top_k", c.eval.sampling.top_k);
        read_field(e, "default_max_tokens", c.eval.sampling.default_max_tokens);
        if (e.contains("max_tokens_by_dataset"))
            c.eval.sampling.max_tokens_by_dataset =
                e.at("max_tokens_by_dataset").get<std::map<std::string, int>>();
        if (c.eval.sampling.k < 1) throw ConfigError("eval.k must be >= 1");
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        if (a.contains("families"))
            c.analysis.families =
                a.at("families").get<std::map<std::string, std::string>>();
        read_field(a, "exclude_equal_golds", c.analysis.exclude_equal_golds);
    }

    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        read_field(p, "problems", c.paths.problems);
        read_field(p, "reversed", c.paths.reversed);
        read_field(p, "rejections", c.paths.rejections);
        read_field(p, "samples", c.paths.samples);
        read_field(p, "out_dir", c.paths.out_dir);
    }

    c.forge.seed = c.seed;
    c.forge.generator_model = c.backend.generator_model;
    c.forge.verifier_model = c.backend.verifier_model;
    for (const auto& path : c.lexicon_files)
        c.forge.lexicons.push_back(numext::load_lexicon(path));
    if (c.forge.lexicons.empty())
        c.forge.lexicons.push_back(numext::builtin_english_lexicon());
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed config JSON: " + path);
    return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["backend"] = json{{"kind", c.backend.kind},
                        {"fixture", c.backend.fixture_path},
                        {"record", c.backend.record},
                        {"base_url", c.backend.base_url},
                        {"generator_model", c.backend.generator_model},
                        {"verifier_model", c.backend.verifier_model},
                        {"send_top_k", c.backend.send_top_k},
                        {"max_retries", c.backend.max_retries},
                        {"backoff_initial_ms", c.backend.backoff_initial_ms},
                        {"timeout_s", c.backend.timeout_s},
                        {"max_in_flight", c.backend.max_in_flight},
                        {"requests_per_second", c.backend.requests_per_second}};
    j["forge"] = json{{"mask_token", c.forge.mask_token},
                      {"max_attempts", c.forge.max_attempts},
                      {"rewrites_per_candidate", c.forge.rewrites_per_candidate},
                      {"condition_template", c.forge.condition_template},
                      {"query_template", c.forge.query_template},
                      {"mode", c.forge.rule_based ? "rule_based" : "rewritten"},
                      {"rewrite", request_to_json(c.forge.rewrite_defaults)},
                      {"verify", request_to_json(c.forge.verify_defaults)}};
    j["lexicon_files"] = c.lexicon_files;
    j["eval"] = json{{"models", c.eval.models},
                     {"k", c.eval.sampling.k},
                     {"temperature", c.eval.sampling.temperature},
                     {"top_p", c.eval.sampling.top_p},
                     {"top_k", c.eval.sampling.top_k},
                     {"default_max_tokens", c.eval.sampling.default_max_tokens},
                     {"max_tokens_by_dataset", c.eval.sampling.max_tokens_by_dataset}};
    j["analysis"] = json{{"families", c.analysis.families},
                         {"exclude_equal_golds", c.analysis.exclude_equal_golds}};
    j["paths"] = json{{"problems", c.paths.problems},
                      {"reversed", c.paths.reversed},
                      {"rejections", c.paths.rejections},
                      {"samples", c.paths.samples},
                      {"out_dir", c.paths.out_dir}};
    return j;
}

uint64_t config_hash(const RunConfig& config) {
    // execution-environment knobs must not change the hash: equal scientific
    // parameters yield equal run ids at any worker width or output location
    json j = config_to_json(config);
    j.erase("workers");
    j.erase("paths");
    std::string dump = j.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

json output_header(const RunConfig& config) {
    uint64_t hash = config_hash(config);
    std::ostringstream hash_hex, run_hex;
    hash_hex << std::hex << hash;
    run_hex << std::hex << numext::mix_seed(config.seed, hash_hex.str());
    return json{{"run_id", run_hex.str()},
                {"seed", config.seed},
                {"config_hash", hash_hex.str()},
                {"tool_version", kToolVersion}};
}

std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& config) {
    if (config.backend.kind == "fixture") {
        if (config.backend.fixture_path.empty())
            throw ConfigError("backend.fixture is required for the fixture backend");
        return std::make_unique<gateway::FixtureGateway>(config.backend.fixture_path);
    }
    gateway::HttpConfig http;
    http.base_url = config.backend.base_url;
    http.api_key = gateway::api_key_from_env();
    http.send_top_k = config.backend.send_top_k;
    http.max_retries = config.backend.max_retries;
    http.backoff_initial_ms = config.backend.backoff_initial_ms;
    http.timeout_s = config.backend.timeout_s;
    http.max_in_flight = config.backend.max_in_flight;
    http.requests_per_second = config.backend.requests_per_second;
    if (http.base_url.empty())
        throw ConfigError("backend.base_url is required for the http backend");
    auto live = std::make_shared<gateway::HttpGateway>(std::move(http));
    if (config.backend.record) {
        if (config.backend.fixture_path.empty())
            throw ConfigError("backend.fixture is required in record mode");
        return std::make_unique<gateway::RecordingGateway>(
            live, config.backend.fixture_path);
    }
    struct Owner : gateway::Gateway {
        std::shared_ptr<gateway::Gateway> inner;
        explicit Owner(std::shared_ptr<gateway::Gateway> g) : inner(std::move(g)) {}
        gateway::GenerationResult generate(
            const gateway::GenerationRequest& request) override {
            return inner->generate(request);
        }
    };
    return std::make_unique<Owner>(std::move(live));
}

}  // namespace reversemath::runconfig
