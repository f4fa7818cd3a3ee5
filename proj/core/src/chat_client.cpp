#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "finsent/chat_client.hpp"

#include "finsent/civil_time.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

namespace finsent {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool is_transient_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

class HttplibTransport final : public Transport {
public:
    HttpResponse post_json(const std::string& url, const HttpHeaders& headers, const std::string& body,
                           std::chrono::milliseconds timeout) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw ContractError("endpoint URL needs a scheme: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), static_cast<time_t>(usecs.count()));
        client.set_read_timeout(secs.count(), static_cast<time_t>(usecs.count()));
        client.set_write_timeout(secs.count(), static_cast<time_t>(usecs.count()));

        httplib::Headers hs;
        for (const auto& [k, v] : headers) hs.emplace(k, v);
        auto res = client.Post(path, hs, body, "application/json");
        if (!res) throw TransportFailure("POST " + url + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }
};

}  // namespace

void ModelEndpoint::validate() const {
    if (base_url.empty()) throw ContractError("model endpoint needs a base_url");
    if (model_name.empty()) throw ContractError("model endpoint needs a model_name");
    if (timeout <= std::chrono::milliseconds::zero()) throw ContractError("model endpoint timeout must be positive");
    if (max_retries < 0) throw ContractError("max_retries must be >= 0");
    if (max_in_flight == 0) throw ContractError("max_in_flight must be >= 1");
}

std::unique_ptr<Transport> make_http_transport() {
    return std::make_unique<HttplibTransport>();
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::string ResponseCache::key(const ModelEndpoint& endpoint, std::string_view prompt) {
    std::string material = endpoint.base_url;
    material += '\n';
    material += endpoint.model_name;
    material += '\n';
    material += prompt;
    return sha256_hex(material);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".response"), std::ios::binary);
    if (!in) return std::nullopt;
    return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ResponseCache::put(const std::string& key, const std::string& response, const ModelEndpoint& endpoint) const {
    std::ostringstream tag;
    tag << std::this_thread::get_id();
    auto write_atomic = [&](const std::string& name, const std::string& bytes) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".tmp." + tag.str());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write cache file " + tmp.string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        }
        fs::rename(tmp, target);
    };
    const json meta = {
        {"endpoint", endpoint.base_url},
        {"model", endpoint.model_name},
        {"created", format_rfc3339(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()))},
    };
    write_atomic(key + ".response", response);
    write_atomic(key + ".meta.json", meta.dump(2) + "\n");
}

ChatCompletionClient::ChatCompletionClient(ModelEndpoint endpoint, std::unique_ptr<Transport> transport,
                                           Sleeper sleeper)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
    endpoint_.validate();
    if (!transport_) throw ContractError("chat client needs a transport");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (endpoint_.cache_dir) cache_.emplace(*endpoint_.cache_dir);
    in_flight_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(endpoint_.max_in_flight));
}

std::string ChatCompletionClient::identity() const {
    return endpoint_.model_name + "@" + endpoint_.base_url;
}

std::string ChatCompletionClient::request_body(const ModelEndpoint& endpoint, std::string_view prompt) {
    const json body = {
        {"model", endpoint.model_name},
        {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
        {"temperature", 0},
    };
    return body.dump();
}

std::string ChatCompletionClient::extract_content(const std::string& response_body) {
    try {
        const json j = json::parse(response_body);
        const auto& choice = j.at("choices").at(0);
        if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
        return choice.at("text").get<std::string>();
    } catch (const json::exception&) {
        throw StatusError(200, "unreadable completion body: " + excerpt(response_body));
    }
}

std::string ChatCompletionClient::complete(const PromptText& prompt) {
    const std::string& bytes = prompt.rendered();
    std::string key;
    if (cache_) {
        key = ResponseCache::key(endpoint_, bytes);
        if (auto hit = cache_->get(key)) return *hit;
    }
    std::string content = fetch(bytes);
    if (cache_) cache_->put(key, content, endpoint_);
    return content;
}

std::string ChatCompletionClient::fetch(const std::string& prompt) {
    HttpHeaders headers{{"Accept", "application/json"}};
    if (!endpoint_.auth_env.empty()) {
        const char* secret = std::getenv(endpoint_.auth_env.c_str());
        if (secret == nullptr || *secret == '\0') {
            throw ContractError("environment variable " + endpoint_.auth_env + " holding the API key is not set");
        }
        headers.emplace_back("Authorization", std::string("Bearer ") + secret);
    }
    std::string url = endpoint_.base_url;
    if (!url.empty() && url.back() == '/') url.pop_back();
    url += "/chat/completions";
    const std::string body = request_body(endpoint_, prompt);

    in_flight_->acquire();
    struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
    } release{in_flight_.get()};

    auto backoff = endpoint_.initial_backoff;
    std::string last_failure;
    std::optional<HttpResponse> last_status;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleeper_(backoff);
            backoff *= 2;
        }
        ++network_calls_;
        try {
            HttpResponse res = transport_->post_json(url, headers, body, endpoint_.timeout);
            if (res.status >= 200 && res.status < 300) return extract_content(res.body);
            if (!is_transient_status(res.status)) throw StatusError(res.status, excerpt(res.body));
            last_status = std::move(res);
        } catch (const TransportFailure& e) {
            last_failure = e.what();
            last_status.reset();
        }
    }
    if (last_status) throw StatusError(last_status->status, excerpt(last_status->body));
    throw TransportError("gave up after " + std::to_string(endpoint_.max_retries + 1) + " attempts: " + last_failure);
}

}  // namespace finsent
