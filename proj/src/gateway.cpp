#include "reversemath/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include <httplib.h>

namespace reversemath::gateway {

using nlohmann::json;

std::string api_key_from_env() {
    const char* key = std::getenv("REVERSEMATH_API_KEY");
    return key ? key : "";
}

// ---------------------------------------------------------------------------
// FixtureGateway

FixtureGateway::FixtureGateway(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BackendError("cannot open fixture file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw BackendError(path + ":" + std::to_string(lineno) +
                               ": malformed fixture line");
        if (j.contains("run_id") && !j.contains("tag")) continue;  // header
        add(j.at("tag").get<std::string>(), j.at("ordinal").get<int>(),
            j.at("response").get<std::string>());
    }
}

void FixtureGateway::add(const std::string& tag, int ordinal,
                         std::string response) {
    std::lock_guard lock(mu_);
    script_[{tag, ordinal}] = std::move(response);
}

GenerationResult FixtureGateway::generate(const GenerationRequest& request) {
    std::lock_guard lock(mu_);
    GenerationResult result;
    result.backend = "fixture";
    result.model = "fixture";
    tag_calls_[request.tag] += 1;
    int& cursor = cursor_[request.tag];
    for (int i = 0; i < request.n_samples; ++i) {
        auto it = script_.find({request.tag, cursor});
        if (it == script_.end())
            throw FixtureGapError("fixture gap: no response for tag '" +
                                  request.tag + "' ordinal " +
                                  std::to_string(cursor));
        result.texts.push_back(it->second);
        ++cursor;
    }
    return result;
}

void FixtureGateway::reset_cursors() {
    std::lock_guard lock(mu_);
    cursor_.clear();
    tag_calls_.clear();
}

int FixtureGateway::calls_for_tag_prefix(const std::string& prefix) const {
    std::lock_guard lock(mu_);
    int n = 0;
    for (const auto& [tag, calls] : tag_calls_)
        if (tag.rfind(prefix, 0) == 0) n += calls;
    return n;
}

void FixtureGateway::append_entry(const std::string& path, const std::string& tag,
                                  int ordinal, const std::string& response) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw BackendError("cannot append to fixture file: " + path);
    out << json{{"tag", tag}, {"ordinal", ordinal}, {"response", response}}.dump()
        << '\n';
}

// ---------------------------------------------------------------------------
// HttpGateway

namespace {

// Counting semaphore + token bucket guarding the wire.
class Throttle {
public:
    Throttle(int max_in_flight, double requests_per_second)
        : permits_(max_in_flight > 0 ? max_in_flight : 1),
          rps_(requests_per_second) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return permits_ > 0; });
        --permits_;
        if (rps_ > 0.0) {
            auto now = std::chrono::steady_clock::now();
            auto interval = std::chrono::duration<double>(1.0 / rps_);
            auto earliest = last_dispatch_ + std::chrono::duration_cast<
                                                 std::chrono::steady_clock::duration>(
                                                 interval);
            if (earliest > now) {
                lock.unlock();
                std::this_thread::sleep_until(earliest);
                lock.lock();
                now = earliest;
            }
            last_dispatch_ = now;
        }
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            ++permits_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int permits_;
    double rps_;
    std::chrono::steady_clock::time_point last_dispatch_{};
};

struct SplitUrl {
    bool https = false;
    std::string host_port;
    std::string path_prefix;
};

SplitUrl split_url(const std::string& base_url) {
    SplitUrl out;
    std::string rest = base_url;
    if (rest.rfind("https://", 0) == 0) {
        out.https = true;
        rest = rest.substr(8);
    } else if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    }
    auto slash = rest.find('/');
    if (slash == std::string::npos) {
        out.host_port = rest;
    } else {
        out.host_port = rest.substr(0, slash);
        out.path_prefix = rest.substr(slash);
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
        out.path_prefix.pop_back();
    return out;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

struct HttpGateway::Impl {
    HttpConfig config;
    SplitUrl url;
    Throttle throttle;

    Impl(HttpConfig cfg)
        : config(std::move(cfg)),
          url(split_url(config.base_url)),
          throttle(config.max_in_flight, config.requests_per_second) {}

    std::unique_ptr<httplib::Client> make_client() const {
        auto scheme = url.https ? "https://" : "http://";
        auto client = std::make_unique<httplib::Client>(scheme + url.host_port);
        client->set_connection_timeout(config.timeout_s);
        client->set_read_timeout(config.timeout_s);
        client->set_write_timeout(config.timeout_s);
        if (!config.api_key.empty()) client->set_bearer_token_auth(config.api_key);
        return client;
    }

    json build_body(const GenerationRequest& request) const {
        json body{{"model", request.model.empty() ? config.model : request.model},
                  {"messages",
                   json::array({json{{"role", "user"}, {"content", request.prompt}}})},
                  {"temperature", request.temperature},
                  {"top_p", request.top_p},
                  {"max_tokens", request.max_tokens},
                  {"n", request.n_samples}};
        if (config.send_top_k) body["top_k"] = request.top_k;
        return body;
    }
};

HttpGateway::HttpGateway(HttpConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpGateway::~HttpGateway() = default;

GenerationResult HttpGateway::generate(const GenerationRequest& request) {
    if (request.n_samples < 1) throw BackendError("n_samples must be >= 1");
    auto body = impl_->build_body(request).dump();
    const std::string endpoint = impl_->url.path_prefix + "/chat/completions";

    impl_->throttle.acquire();
    struct Release {
        Throttle& t;
        ~Release() { t.release(); }
    } release{impl_->throttle};

    auto start = std::chrono::steady_clock::now();
    std::string last_error = "no attempt made";
    int backoff_ms = impl_->config.backoff_initial_ms;
    for (int attempt = 0; attempt <= impl_->config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        auto client = impl_->make_client();
        auto res = client->Post(endpoint, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            if (retryable_status(res->status)) continue;
            throw BackendError("chat completion failed: " + last_error);
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded())
            throw BackendError("chat completion returned malformed JSON");
        GenerationResult result;
        result.backend = "http";
        result.model = reply.value("model", impl_->config.model);
        result.retries = attempt;
        for (const auto& choice : reply.at("choices"))
            result.texts.push_back(
                choice.at("message").at("content").get<std::string>());
        if (static_cast<int>(result.texts.size()) != request.n_samples)
            throw BackendError("endpoint returned " +
                               std::to_string(result.texts.size()) +
                               " completions, expected " +
                               std::to_string(request.n_samples));
        result.latency_ms = static_cast<long>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count());
        return result;
    }
    throw BackendError("retries exhausted: " + last_error);
}

// ---------------------------------------------------------------------------
// RecordingGateway

RecordingGateway::RecordingGateway(std::shared_ptr<Gateway> inner,
                                   std::string fixture_path)
    : inner_(std::move(inner)), fixture_path_(std::move(fixture_path)) {}

GenerationResult RecordingGateway::generate(const GenerationRequest& request) {
    auto result = inner_->generate(request);
    std::lock_guard lock(mu_);
    int& ordinal = next_ordinal_[request.tag];
    for (const auto& text : result.texts)
        FixtureGateway::append_entry(fixture_path_, request.tag, ordinal++, text);
    return result;
}

}  // namespace reversemath::gateway
