#include <finsent/fixture_model.hpp>
#include <finsent/models.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace finsent;

TEST(ProbTriple, Invariants) {
    EXPECT_NO_THROW(ProbTriple(0.2, 0.3, 0.5));
    EXPECT_THROW(ProbTriple(0.5, 0.5, 0.5), ContractError);
    EXPECT_THROW(ProbTriple(-0.1, 0.6, 0.5), ContractError);
    EXPECT_THROW(ProbTriple(NAN, 0.5, 0.5), ContractError);
    const auto n = ProbTriple::normalized(2, 1, 1);
    EXPECT_DOUBLE_EQ(n.pos(), 0.5);
    EXPECT_THROW((void)ProbTriple::normalized(0, 0, 0), ContractError);
}

TEST(ProbTriple, ArgmaxTieOrder) {
    EXPECT_EQ(ProbTriple(0.4, 0.4, 0.2).argmax(), SentimentLabel::positive);
    EXPECT_EQ(ProbTriple(0.2, 0.4, 0.4).argmax(), SentimentLabel::negative);
    EXPECT_EQ(ProbTriple(0.4, 0.2, 0.4).argmax(), SentimentLabel::positive);
    EXPECT_EQ(ProbTriple(0, 0, 1).argmax(), SentimentLabel::neutral);
}

TEST(Softmax, SpecValues) {
    const auto u = softmax({0, 0, 0});
    EXPECT_NEAR(u.pos(), 1.0 / 3.0, 1e-15);
    const auto v = softmax({2, 1, 0});
    EXPECT_NEAR(v.pos(), 0.6652, 1e-4);
    EXPECT_NEAR(v.neg(), 0.2447, 1e-4);
    EXPECT_NEAR(v.neu(), 0.0900, 1e-4);
    EXPECT_THROW((void)softmax({INFINITY, 0, 0}), ContractError);
    // Large logits stay finite thanks to max-subtraction.
    const auto big = softmax({1000, 999, 998});
    EXPECT_NEAR(big.pos(), v.pos(), 1e-12);
}

TEST(Softmax, ShiftInvariantAndMonotone) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        const std::array<double, 3> x{d(rng), d(rng), d(rng)};
        const double c = d(rng);
        const auto a = softmax(x);
        const auto b = softmax({x[0] + c, x[1] + c, x[2] + c});
        for (auto l : kAllLabels) EXPECT_NEAR(a[l], b[l], 1e-12);
        EXPECT_NEAR(a.pos() + a.neg() + a.neu(), 1.0, 1e-12);
        auto raised = x;
        raised[1] += 0.5;
        EXPECT_GT(softmax(raised).neg(), a.neg());
    }
}

TEST(ParseLabel, SpecExamples) {
    EXPECT_EQ(parse_label("Answer: Neutral."), SentimentLabel::neutral);
    EXPECT_EQ(parse_label("negative, because guidance was cut (not positive)"), SentimentLabel::negative);
    EXPECT_EQ(parse_label("bullish!"), SentimentLabel::positive);
    EXPECT_EQ(parse_label("BEARISH"), SentimentLabel::negative);
    EXPECT_EQ(parse_label("stable, not bullish"), SentimentLabel::neutral);
    EXPECT_EQ(parse_label("bullish but overall POSITIVE"), SentimentLabel::positive);
    EXPECT_THROW((void)parse_label("\xC2\xAF\\_(\xE3\x83\x84)_/\xC2\xAF"), UnparseableOutput);
    EXPECT_THROW((void)parse_label(""), UnparseableOutput);
    try {
        (void)parse_label("no idea");
    } catch (const UnparseableOutput& e) {
        EXPECT_EQ(e.raw(), "no idea");
    }
}

TEST(ClassifyGenerative, FixtureByPromptHash) {
    FixtureGenerativeModel model;
    const auto prompt = build_base_prompt("GME to the moon", IdentifierTerm::input);
    model.set_reply_for_prompt_hash(sha256_hex(prompt.rendered()), "positive");
    const auto p = classify_generative(model, prompt, "d1");
    EXPECT_EQ(p.label, SentimentLabel::positive);
    EXPECT_EQ(p.raw, "positive");
    EXPECT_EQ(p.doc_id, "d1");
    EXPECT_FALSE(p.probs);
    const auto again = classify_generative(model, prompt, "d1");
    EXPECT_EQ(again.label, p.label);
    EXPECT_EQ(again.raw, p.raw);
}

TEST(ClassifyGenerative, UnparseableReplyPropagates) {
    FixtureGenerativeModel model;
    model.set_default_reply("\xC2\xAF\\_(\xE3\x83\x84)_/\xC2\xAF");
    EXPECT_THROW((void)classify_generative(model, build_base_prompt("x", IdentifierTerm::input)), UnparseableOutput);
}

TEST(ClassifyGenerative, LookupOrder) {
    FixtureGenerativeModel model([](const PromptText& p) -> std::optional<std::string> {
        return p.annotator_block().empty() ? std::nullopt : std::optional<std::string>("negative");
    });
    model.set_reply_for_input("x", "neutral");
    const auto spec = InstructionSpec::bundled_default();
    EXPECT_EQ(classify_generative(model, build_base_prompt("x", IdentifierTerm::input)).label, SentimentLabel::neutral);
    EXPECT_EQ(classify_generative(model, build_aiap_prompt("y", IdentifierTerm::input, spec, Components::d())).label,
              SentimentLabel::negative);
    EXPECT_THROW((void)model.complete(build_base_prompt("y", IdentifierTerm::input)), ContractError);
    EXPECT_EQ(model.calls(), 3u);
}

TEST(ClassifyProbabilistic, SpecExamples) {
    FixtureProbabilisticModel model;
    model.set_scores("a", {ScoreKind::logits, {3, 1, 1}});
    model.set_scores("b", {ScoreKind::probabilities, {0.4, 0.4, 0.2}});
    model.set_scores("c", {ScoreKind::probabilities, {0, 0, 1}});
    model.set_scores("bad", {ScoreKind::logits, {1, 2}});
    const auto a = classify_probabilistic(model, "a");
    EXPECT_EQ(a.label, SentimentLabel::positive);
    EXPECT_NEAR(a.probs->pos(), 0.7870, 1e-4);
    EXPECT_EQ(classify_probabilistic(model, "b").label, SentimentLabel::positive);
    EXPECT_EQ(classify_probabilistic(model, "c").label, SentimentLabel::neutral);
    EXPECT_THROW((void)classify_probabilistic(model, "bad"), ContractError);
    EXPECT_THROW((void)classify_probabilistic(model, "unknown"), ContractError);
}

TEST(ClassifyProbabilistic, LabelAlwaysMatchesArgmax) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-4, 4);
    FixtureProbabilisticModel model([&](std::string_view) -> std::optional<ClassScores> {
        return ClassScores{ScoreKind::logits, {d(rng), d(rng), d(rng)}};
    });
    for (int i = 0; i < 500; ++i) {
        const auto p = classify_probabilistic(model, "t");
        EXPECT_EQ(p.label, p.probs->argmax());
    }
}
