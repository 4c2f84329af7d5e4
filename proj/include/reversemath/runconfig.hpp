#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reversemath/evalharness.hpp"
#include "reversemath/forge.hpp"
#include "reversemath/gateway.hpp"

namespace reversemath::runconfig {

struct BackendSettings {
    std::string kind = "fixture";  // "http" | "fixture"
    std::string fixture_path;
    bool record = false;  // proxy live calls into fixture_path
    std::string base_url;
    std::string generator_model;
    std::string verifier_model;
    bool send_top_k = false;
    int max_retries = 3;
    int backoff_initial_ms = 200;
    int timeout_s = 120;
    int max_in_flight = 4;
    double requests_per_second = 0.0;
};

struct EvalSettings {
    std::vector<std::string> models;
    evalharness::SamplingConfig sampling;
};

struct AnalysisSettings {
    std::map<std::string, std::string> families;
    bool exclude_equal_golds = false;
};

struct Paths {
    std::string problems;
    std::string reversed;
    std::string rejections;
    std::string samples;
    std::string out_dir = "out";
};

struct RunConfig {
    uint64_t seed = 0;
    int workers = 1;
    BackendSettings backend;
    forge::ForgeConfig forge;
    std::vector<std::string> lexicon_files;
    EvalSettings eval;
    AnalysisSettings analysis;
    Paths paths;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

// FNV-1a over the canonical JSON rendering; stable across runs and platforms.
uint64_t config_hash(const RunConfig& config);

// {"run_id","seed","config_hash","tool_version"}; run_id derives from the
// hash and seed so identical runs emit identical headers.
nlohmann::json output_header(const RunConfig& config);

std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& config);

constexpr const char* kToolVersion = "0.1.0";

}  // namespace reversemath::runconfig
