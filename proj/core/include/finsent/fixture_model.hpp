#pragma once

#include "finsent/models.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace finsent {

/// Deterministic offline stand-in for a generative model. Replies are looked
/// up by SHA-256 of the prompt bytes first, then by the prompt's final input
/// text, then an optional responder function, then the default reply.
class FixtureGenerativeModel final : public GenerativeModel {
public:
    using Responder = std::function<std::optional<std::string>(const PromptText&)>;

    FixtureGenerativeModel() = default;
    explicit FixtureGenerativeModel(Responder responder) : responder_(std::move(responder)) {}

    /// JSON: {"by_prompt_sha256": {...}, "by_input": {...}, "default": "..."}
    [[nodiscard]] static std::unique_ptr<FixtureGenerativeModel> load(const std::filesystem::path& path);

    void set_reply_for_prompt_hash(std::string sha256_hex, std::string reply);
    void set_reply_for_input(std::string input_text, std::string reply);
    void set_default_reply(std::string reply) { default_ = std::move(reply); }

    [[nodiscard]] std::string complete(const PromptText& prompt) override;
    [[nodiscard]] std::string identity() const override { return "fixture-generative"; }
    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

private:
    std::map<std::string, std::string> by_hash_;
    std::map<std::string, std::string> by_input_;
    std::optional<std::string> default_;
    Responder responder_;
    std::atomic<std::size_t> calls_{0};
};

/// Deterministic offline classifier: class scores keyed by exact text.
class FixtureProbabilisticModel final : public ProbabilisticModel {
public:
    using Scorer = std::function<std::optional<ClassScores>(std::string_view)>;

    FixtureProbabilisticModel() = default;
    explicit FixtureProbabilisticModel(Scorer scorer) : scorer_(std::move(scorer)) {}

    /// JSON: {"kind": "logits"|"probabilities", "by_text": {"<text>": [p, n, u]}}
    [[nodiscard]] static std::unique_ptr<FixtureProbabilisticModel> load(const std::filesystem::path& path);

    void set_scores(std::string text, ClassScores scores);

    [[nodiscard]] ClassScores scores(std::string_view text) override;
    [[nodiscard]] std::string identity() const override { return "fixture-probabilistic"; }

private:
    std::map<std::string, ClassScores, std::less<>> by_text_;
    Scorer scorer_;
};

}  // namespace finsent
