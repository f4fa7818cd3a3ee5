#include "app.hpp"

#include <fstream>

namespace finsent::app {

using nlohmann::json;

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::ingest: return "ingest";
        case Command::bench: return "bench";
        case Command::score: return "score";
        case Command::predict: return "predict";
        case Command::report: return "report";
    }
    return "ingest";
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

std::vector<std::string> strings(const json& j, const char* key) {
    if (!j.is_array()) throw ParseError(std::string("config key '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : j) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    RunConfig c;
    try {
        for (const char* key : {"corpus", "dataset", "instruction", "cache_dir"}) {
            if (!j.contains(key)) continue;
            const auto p = resolve(base, j.at(key).get<std::string>());
            if (std::string_view(key) == "corpus") c.corpus = p;
            if (std::string_view(key) == "dataset") c.dataset = p;
            if (std::string_view(key) == "instruction") c.instruction = p;
            if (std::string_view(key) == "cache_dir") c.cache_dir = p;
        }
        if (j.contains("prices")) {
            for (const auto& [ticker, p] : j.at("prices").items()) c.prices[ticker] = resolve(base, p.get<std::string>());
        }
        if (j.contains("index")) {
            const auto& idx = j.at("index");
            if (idx.is_object()) {
                for (const auto& [name, p] : idx.items()) c.index.emplace_back(name, resolve(base, p.get<std::string>()));
            } else {
                for (const auto& p : strings(idx, "index")) c.index.emplace_back("", resolve(base, p));
            }
        }
        if (j.contains("model")) {
            c.model = j.at("model").get<std::string>();
            if (c.model.starts_with("fixture:")) c.model = "fixture:" + resolve(base, c.model.substr(8)).string();
        }
        if (j.contains("scorer")) {
            c.scorer = j.at("scorer").get<std::string>();
            if (c.scorer.starts_with("fixture:")) c.scorer = "fixture:" + resolve(base, c.scorer.substr(8)).string();
        }
        if (j.contains("endpoint")) {
            const auto& e = j.at("endpoint");
            c.endpoint.base_url = e.value("base_url", c.endpoint.base_url);
            c.endpoint.model_name = e.value("model", c.endpoint.model_name);
            c.endpoint.auth_env = e.value("auth_env", c.endpoint.auth_env);
            c.endpoint.timeout = std::chrono::milliseconds(e.value("timeout_ms", c.endpoint.timeout.count()));
            c.endpoint.max_retries = e.value("max_retries", c.endpoint.max_retries);
            c.endpoint.max_in_flight = e.value("max_in_flight", c.endpoint.max_in_flight);
        }
        if (j.contains("tickers")) c.tickers = strings(j.at("tickers"), "tickers");
        c.timezone = j.value("timezone", c.timezone);
        if (j.contains("first")) c.first = parse_date(j.at("first").get<std::string>());
        if (j.contains("last")) c.last = parse_date(j.at("last").get<std::string>());
        if (j.contains("split")) c.split = parse_date(j.at("split").get<std::string>());
        c.prompt = j.value("prompt", c.prompt);
        if (j.contains("identifiers")) {
            c.identifiers.clear();
            for (const auto& s : strings(j.at("identifiers"), "identifiers")) c.identifiers.push_back(identifier_from_string(s));
        }
        if (j.contains("datasets")) c.datasets = strings(j.at("datasets"), "datasets");
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& s : strings(j.at("methods"), "methods")) c.methods.push_back(score_method_from_string(s));
        }
        if (j.contains("variants")) c.variants = strings(j.at("variants"), "variants");
        if (j.contains("ridge")) c.ridge = j.at("ridge").get<std::vector<double>>();
        c.workers = j.value("workers", c.workers);
        if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad config value: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

json RunConfig::to_json() const {
    json j = json::object();
    if (corpus) j["corpus"] = corpus->string();
    if (dataset) j["dataset"] = dataset->string();
    if (instruction) j["instruction"] = instruction->string();
    if (cache_dir) j["cache_dir"] = cache_dir->string();
    json p = json::object();
    for (const auto& [t, path] : prices) p[t] = path.string();
    j["prices"] = p;
    json idx = json::array();
    for (const auto& [name, path] : index) idx.push_back({{"variant", name}, {"path", path.string()}});
    j["index"] = idx;
    j["model"] = model;
    j["scorer"] = scorer;
    j["endpoint"] = {{"base_url", endpoint.base_url},
                     {"model", endpoint.model_name},
                     {"auth_env", endpoint.auth_env},
                     {"timeout_ms", endpoint.timeout.count()},
                     {"max_retries", endpoint.max_retries},
                     {"max_in_flight", endpoint.max_in_flight}};
    j["tickers"] = tickers;
    j["timezone"] = timezone;
    if (first) j["first"] = format_date(*first);
    if (last) j["last"] = format_date(*last);
    j["split"] = format_date(split);
    j["prompt"] = prompt;
    json ids = json::array();
    for (auto id : identifiers) ids.push_back(std::string(finsent::to_string(id)));
    j["identifiers"] = ids;
    j["datasets"] = datasets;
    json ms = json::array();
    for (auto m : methods) ms.push_back(std::string(finsent::to_string(m)));
    j["methods"] = ms;
    j["variants"] = variants;
    j["ridge"] = ridge;
    j["workers"] = workers;
    j["out"] = out.string();
    return j;
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

namespace {

void require_file(const std::optional<fs::path>& p, const char* what) {
    if (!p) throw ContractError(std::string("no ") + what + " configured");
    if (!fs::exists(*p)) throw ContractError(std::string(what) + " '" + p->string() + "' does not exist");
}

void require_model_file(const std::string& spec) {
    if (spec.starts_with("fixture:")) require_file(fs::path(spec.substr(8)), "fixture model");
}

}  // namespace

void RunConfig::validate(Command command) const {
    if (first && last && *first > *last) throw ContractError("date range is reversed: first > last");
    if (instruction) require_file(instruction, "instruction spec");
    if (workers == 0) throw ContractError("workers must be >= 1");
    switch (command) {
        case Command::ingest:
            require_file(corpus, "corpus");
            break;
        case Command::bench:
            require_file(dataset, "dataset");
            if (model.empty()) throw ContractError("bench needs a model (fixture:<path> or chat)");
            require_model_file(model);
            if (identifiers.empty()) throw ContractError("bench needs at least one identifier");
            if (prompt != "base" && prompt != "aiap" && prompt != "ablation" && prompt != "fewshot") {
                throw ContractError("prompt must be base, aiap, ablation or fewshot");
            }
            for (const auto& d : datasets) {
                if (d != "all_agree" && d != "full") throw ContractError("dataset must be all_agree or full, got '" + d + "'");
            }
            break;
        case Command::score:
            require_file(corpus, "corpus");
            if (tickers.empty()) throw ContractError("score needs at least one ticker");
            if (methods.empty()) throw ContractError("score needs at least one method");
            if (scorer.empty() && model.empty()) throw ContractError("score needs a scorer or a model");
            require_model_file(scorer);
            require_model_file(model);
            if (prompt != "base" && prompt != "aiap") throw ContractError("score prompt must be base or aiap");
            break;
        case Command::predict:
            if (prices.empty()) throw ContractError("predict needs price files");
            for (const auto& [t, p] : prices) require_file(p, ("prices for " + t).c_str());
            for (const auto& [name, p] : index) require_file(p, "index file");
            if (ridge.empty()) throw ContractError("predict needs at least one ridge strength");
            for (double l : ridge) {
                if (!(l >= 0.0)) throw ContractError("ridge strengths must be >= 0");
            }
            break;
        case Command::report:
            break;
    }
}

}  // namespace finsent::app
