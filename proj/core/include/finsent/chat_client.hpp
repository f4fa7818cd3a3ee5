#pragma once

#include "finsent/models.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

namespace finsent {

/// Retries exhausted on network-level failures.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Non-success HTTP status (or an unreadable success body).
class StatusError : public Error {
public:
    StatusError(int status, const std::string& body_excerpt)
        : Error("HTTP status " + std::to_string(status) + ": " + body_excerpt), status_(status) {}
    [[nodiscard]] int status() const noexcept { return status_; }

private:
    int status_;
};

struct ModelEndpoint {
    std::string base_url;        // e.g. "https://api.example.com/v1"
    std::string model_name;
    std::string auth_env;        // name of the env var holding the bearer token
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;
    std::optional<std::filesystem::path> cache_dir;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds initial_backoff{500};

    void validate() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Network-level failure of a single attempt (connection refused, timeout).
class TransportFailure : public Error {
public:
    using Error::Error;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws TransportFailure when no HTTP response was received.
    [[nodiscard]] virtual HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                                                 const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib transport; handles http:// and https:// URLs.
[[nodiscard]] std::unique_ptr<Transport> make_http_transport();

/// Content-addressed response cache: `<digest>.response` holds the raw
/// completion bytes and `<digest>.meta.json` the endpoint, model and time.
/// Writes go through a temporary file and a rename.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    [[nodiscard]] static std::string key(const ModelEndpoint& endpoint, std::string_view prompt);

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& response, const ModelEndpoint& endpoint) const;

private:
    std::filesystem::path dir_;
};

/// Chat-completion style client: one user message, temperature 0.
class ChatCompletionClient final : public GenerativeModel {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit ChatCompletionClient(ModelEndpoint endpoint, std::unique_ptr<Transport> transport = make_http_transport(),
                                  Sleeper sleeper = {});

    [[nodiscard]] std::string complete(const PromptText& prompt) override;
    [[nodiscard]] std::string identity() const override;

    [[nodiscard]] std::size_t network_calls() const noexcept { return network_calls_.load(); }
    [[nodiscard]] const ModelEndpoint& endpoint() const noexcept { return endpoint_; }

    [[nodiscard]] static std::string request_body(const ModelEndpoint& endpoint, std::string_view prompt);
    [[nodiscard]] static std::string extract_content(const std::string& response_body);

private:
    std::string fetch(const std::string& prompt);

    ModelEndpoint endpoint_;
    std::unique_ptr<Transport> transport_;
    Sleeper sleeper_;
    std::optional<ResponseCache> cache_;
    std::unique_ptr<std::counting_semaphore<>> in_flight_;
    std::atomic<std::size_t> network_calls_{0};
};

}  // namespace finsent
