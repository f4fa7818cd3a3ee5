#include "finsent/models.hpp"

#include <algorithm>
#include <cmath>

namespace finsent {

ProbTriple::ProbTriple(double pos, double neg, double neu) : p_{pos, neg, neu} {
    for (double p : p_) {
        if (!std::isfinite(p) || p < 0.0) throw ContractError("probabilities must be finite and non-negative");
    }
    if (std::abs(pos + neg + neu - 1.0) > 1e-9) {
        throw ContractError("probabilities must sum to 1, got " + format_double(pos + neg + neu));
    }
}

ProbTriple ProbTriple::normalized(double pos, double neg, double neu) {
    for (double p : {pos, neg, neu}) {
        if (!std::isfinite(p) || p < 0.0) throw ContractError("class scores must be finite and non-negative");
    }
    const double sum = pos + neg + neu;
    if (!(sum > 0.0)) throw ContractError("class scores sum to zero");
    return {pos / sum, neg / sum, neu / sum};
}

SentimentLabel ProbTriple::argmax() const noexcept {
    // kAllLabels is already in tie-break order, so strict > keeps the first.
    SentimentLabel best = SentimentLabel::positive;
    for (auto l : kAllLabels) {
        if (p_[index_of(l)] > p_[index_of(best)]) best = l;
    }
    return best;
}

ProbTriple softmax(const std::array<double, 3>& logits) {
    for (double z : logits) {
        if (!std::isfinite(z)) throw ContractError("softmax needs finite logits");
    }
    const double m = std::max({logits[0], logits[1], logits[2]});
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double e2 = std::exp(logits[2] - m);
    const double sum = e0 + e1 + e2;
    return {e0 / sum, e1 / sum, e2 / sum};
}

SentimentLabel parse_label(std::string_view raw) {
    const std::string lowered = to_lower(raw);
    auto first_of = [&](const std::array<std::string_view, 3>& words) -> std::optional<SentimentLabel> {
        std::size_t best_pos = std::string::npos;
        std::optional<SentimentLabel> best;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto pos = lowered.find(words[i]);
            if (pos < best_pos) {
                best_pos = pos;
                best = kAllLabels[i];
            }
        }
        return best;
    };
    if (auto l = first_of({"positive", "negative", "neutral"})) return *l;
    if (auto l = first_of({"bullish", "bearish", "stable"})) return *l;
    throw UnparseableOutput(std::string(raw));
}

Prediction classify_generative(GenerativeModel& model, const PromptText& prompt, std::string doc_id) {
    Prediction p;
    p.doc_id = std::move(doc_id);
    p.raw = model.complete(prompt);
    p.label = parse_label(*p.raw);
    return p;
}

Prediction classify_probabilistic(ProbabilisticModel& model, std::string_view text, std::string doc_id) {
    const ClassScores s = model.scores(text);
    if (s.values.size() != 3) {
        throw ContractError("model " + model.identity() + " returned " + std::to_string(s.values.size()) +
                            " class scores, expected 3");
    }
    Prediction p;
    p.doc_id = std::move(doc_id);
    p.probs = s.kind == ScoreKind::logits ? softmax({s.values[0], s.values[1], s.values[2]})
                                          : ProbTriple::normalized(s.values[0], s.values[1], s.values[2]);
    p.label = p.probs->argmax();
    return p;
}

}  // namespace finsent
