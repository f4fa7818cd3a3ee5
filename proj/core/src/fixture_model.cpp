#include "finsent/fixture_model.hpp"

#include <json.hpp>

#include <fstream>

namespace finsent {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open fixture model '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("fixture model '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace

std::unique_ptr<FixtureGenerativeModel> FixtureGenerativeModel::load(const std::filesystem::path& path) {
    const json j = read_json(path);
    auto model = std::make_unique<FixtureGenerativeModel>();
    if (auto it = j.find("by_prompt_sha256"); it != j.end()) {
        for (const auto& [k, v] : it->items()) model->by_hash_[k] = v.get<std::string>();
    }
    if (auto it = j.find("by_input"); it != j.end()) {
        for (const auto& [k, v] : it->items()) model->by_input_[k] = v.get<std::string>();
    }
    if (auto it = j.find("default"); it != j.end() && it->is_string()) model->default_ = it->get<std::string>();
    return model;
}

void FixtureGenerativeModel::set_reply_for_prompt_hash(std::string sha256_hex, std::string reply) {
    by_hash_[std::move(sha256_hex)] = std::move(reply);
}

void FixtureGenerativeModel::set_reply_for_input(std::string input_text, std::string reply) {
    by_input_[std::move(input_text)] = std::move(reply);
}

std::string FixtureGenerativeModel::complete(const PromptText& prompt) {
    ++calls_;
    if (!by_hash_.empty()) {
        if (auto it = by_hash_.find(sha256_hex(prompt.rendered())); it != by_hash_.end()) return it->second;
    }
    if (!by_input_.empty()) {
        if (auto it = by_input_.find(std::string(prompt.target_text())); it != by_input_.end()) return it->second;
    }
    if (responder_) {
        if (auto reply = responder_(prompt)) return *reply;
    }
    if (default_) return *default_;
    throw ContractError("fixture model has no reply for prompt " + sha256_hex(prompt.rendered()));
}

std::unique_ptr<FixtureProbabilisticModel> FixtureProbabilisticModel::load(const std::filesystem::path& path) {
    const json j = read_json(path);
    auto model = std::make_unique<FixtureProbabilisticModel>();
    const std::string kind = j.value("kind", std::string("logits"));
    ScoreKind sk;
    if (kind == "logits") {
        sk = ScoreKind::logits;
    } else if (kind == "probabilities") {
        sk = ScoreKind::probabilities;
    } else {
        throw ParseError("fixture model kind must be 'logits' or 'probabilities'");
    }
    if (auto it = j.find("by_text"); it != j.end()) {
        for (const auto& [k, v] : it->items()) model->by_text_[k] = ClassScores{sk, v.get<std::vector<double>>()};
    }
    return model;
}

void FixtureProbabilisticModel::set_scores(std::string text, ClassScores scores) {
    by_text_[std::move(text)] = std::move(scores);
}

ClassScores FixtureProbabilisticModel::scores(std::string_view text) {
    if (auto it = by_text_.find(text); it != by_text_.end()) return it->second;
    if (scorer_) {
        if (auto s = scorer_(text)) return *s;
    }
    throw ContractError("fixture classifier has no scores for text \"" + std::string(text.substr(0, 80)) + "\"");
}

}  // namespace finsent
