#pragma once

#include "finsent/common.hpp"
#include "finsent/prompting.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finsent {

/// Model output that names no sentiment class. Counted as incorrect in
/// evaluation, never replaced by a default label.
class UnparseableOutput : public Error {
public:
    explicit UnparseableOutput(std::string raw)
        : Error("model output names no sentiment class: \"" + raw.substr(0, 120) + "\""), raw_(std::move(raw)) {}
    [[nodiscard]] const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Probability distribution over {positive, negative, neutral}.
class ProbTriple {
public:
    /// Throws ContractError unless each value is finite, >= 0, and the sum
    /// is 1 within 1e-9.
    ProbTriple(double pos, double neg, double neu);

    /// Divides non-negative scores by their sum.
    [[nodiscard]] static ProbTriple normalized(double pos, double neg, double neu);

    [[nodiscard]] double pos() const noexcept { return p_[0]; }
    [[nodiscard]] double neg() const noexcept { return p_[1]; }
    [[nodiscard]] double neu() const noexcept { return p_[2]; }
    [[nodiscard]] double operator[](SentimentLabel l) const noexcept { return p_[index_of(l)]; }

    /// Highest probability; ties break positive > negative > neutral.
    [[nodiscard]] SentimentLabel argmax() const noexcept;

    friend bool operator==(const ProbTriple&, const ProbTriple&) = default;

private:
    std::array<double, 3> p_{};
};

/// Logits ordered (positive, negative, neutral); max-subtracted for
/// stability. Throws ContractError on non-finite input.
[[nodiscard]] ProbTriple softmax(const std::array<double, 3>& logits);

/// First case-insensitive occurrence of positive/negative/neutral wins; the
/// synonyms bullish/bearish/stable are consulted only when none occurs.
[[nodiscard]] SentimentLabel parse_label(std::string_view raw);

struct Prediction {
    std::string doc_id;
    SentimentLabel label = SentimentLabel::neutral;
    std::optional<ProbTriple> probs;
    std::optional<std::string> raw;
};

/// Text-in, text-out model reached through a prompt.
class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;
    [[nodiscard]] virtual std::string complete(const PromptText& prompt) = 0;
    [[nodiscard]] virtual std::string identity() const = 0;
};

enum class ScoreKind { logits, probabilities };

struct ClassScores {
    ScoreKind kind = ScoreKind::logits;
    std::vector<double> values;  // (positive, negative, neutral)
};

/// Classifier exposing per-class scores for a raw text.
class ProbabilisticModel {
public:
    virtual ~ProbabilisticModel() = default;
    [[nodiscard]] virtual ClassScores scores(std::string_view text) = 0;
    [[nodiscard]] virtual std::string identity() const = 0;
};

[[nodiscard]] Prediction classify_generative(GenerativeModel& model, const PromptText& prompt,
                                             std::string doc_id = {});

/// Throws ContractError when the model returns other than 3 scores.
[[nodiscard]] Prediction classify_probabilistic(ProbabilisticModel& model, std::string_view text,
                                                std::string doc_id = {});

}  // namespace finsent
