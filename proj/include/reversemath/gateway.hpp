#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace reversemath::gateway {

struct GenerationRequest {
    std::string prompt;
    double temperature = 0.7;
    double top_p = 0.95;
    int top_k = 20;
    int max_tokens = 4096;
    int n_samples = 1;
    std::string tag;    // correlation key, also the fixture script key
    std::string model;  // overrides the backend's default model when set
};

struct GenerationResult {
    std::vector<std::string> texts;  // exactly n_samples entries
    std::string model;
    long latency_ms = 0;
    std::string backend;  // "http" | "fixture"
    int retries = 0;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixtureGapError : BackendError {
    using BackendError::BackendError;
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

// Scripted backend. Responses are keyed by (tag, per-tag call ordinal); each
// completion consumes one ordinal, so n_samples = 10 consumes ordinals k..k+9.
class FixtureGateway : public Gateway {
public:
    FixtureGateway() = default;
    explicit FixtureGateway(const std::string& path);

    void add(const std::string& tag, int ordinal, std::string response);
    GenerationResult generate(const GenerationRequest& request) override;

    // Script-cursor state, resettable so one fixture can back several runs.
    void reset_cursors();
    int calls_for_tag_prefix(const std::string& prefix) const;

    static void append_entry(const std::string& path, const std::string& tag,
                             int ordinal, const std::string& response);

private:
    std::map<std::pair<std::string, int>, std::string> script_;
    std::map<std::string, int> cursor_;
    mutable std::mutex mu_;
    std::map<std::string, int> tag_calls_;
};

struct HttpConfig {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string model;
    std::string api_key;  // filled from REVERSEMATH_API_KEY
    bool send_top_k = false;
    int max_retries = 3;
    int backoff_initial_ms = 200;
    int timeout_s = 120;
    int max_in_flight = 4;
    double requests_per_second = 0.0;  // 0 = unlimited
};

// OpenAI-compatible chat-completions client. Retries timeouts, connection
// failures, 429 and 5xx with exponential backoff; other 4xx fail immediately.
class HttpGateway : public Gateway {
public:
    explicit HttpGateway(HttpConfig config);
    ~HttpGateway() override;
    GenerationResult generate(const GenerationRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Proxies a live gateway and appends every exchange to a fixture file, so a
// recorded session can replay offline through FixtureGateway.
class RecordingGateway : public Gateway {
public:
    RecordingGateway(std::shared_ptr<Gateway> inner, std::string fixture_path);
    GenerationResult generate(const GenerationRequest& request) override;

private:
    std::shared_ptr<Gateway> inner_;
    std::string fixture_path_;
    std::map<std::string, int> next_ordinal_;
    std::mutex mu_;
};

std::string api_key_from_env();

}  // namespace reversemath::gateway
