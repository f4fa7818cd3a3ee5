#include <finsent/chat_client.hpp>
#include <finsent/evaluation.hpp>
#include <finsent/fixture_model.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace finsent;
using finsent::test::TempDir;

namespace {

std::vector<LabeledSample> make_samples(std::size_t n, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledSample s;
        s.id = "s" + std::to_string(i);
        s.text = "sample text " + std::to_string(i);
        s.gold = kAllLabels[rng() % 3];
        out.push_back(s);
    }
    return out;
}

// Answers each sample correctly when `correct(prompt, index)` says so, and
// with a different class otherwise.
FixtureGenerativeModel graded_model(const std::vector<LabeledSample>& data,
                                    std::function<bool(const PromptText&, std::size_t)> correct) {
    std::map<std::string, std::pair<std::size_t, SentimentLabel>> by_text;
    for (std::size_t i = 0; i < data.size(); ++i) by_text[data[i].text] = {i, data[i].gold};
    return FixtureGenerativeModel([by_text, correct](const PromptText& p) -> std::optional<std::string> {
        const auto it = by_text.find(std::string(p.target_text()));
        if (it == by_text.end()) return std::nullopt;
        const auto [i, gold] = it->second;
        if (correct(p, i)) return std::string(to_string(gold));
        return std::string(to_string(gold == SentimentLabel::neutral ? SentimentLabel::positive : SentimentLabel::neutral));
    });
}

std::size_t level(const PromptText& p) {
    return std::min<std::size_t>(1, p.count_sections("definition")) + p.count_sections("grounding") +
           std::min<std::size_t>(1, p.count_sections("example"));
}

const InstructionSpec kSpec = InstructionSpec::bundled_default();

}  // namespace

TEST(Evaluate, OracleIsPerfect) {
    const auto data = make_samples(200);
    auto model = graded_model(data, [](const PromptText&, std::size_t) { return true; });
    const auto r = evaluate(model, data, PromptSpec{}, kSpec, "t");
    EXPECT_EQ(r.n, 200u);
    EXPECT_EQ(r.correct, 200u);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.family, "base");
    for (std::size_t g = 0; g < 3; ++g) {
        for (std::size_t c = 0; c < 4; ++c) {
            if (g != c) EXPECT_EQ(r.confusion[g][c], 0u);
        }
    }
}

TEST(Evaluate, SevenOfTen) {
    const auto data = make_samples(10);
    auto model = graded_model(data, [](const PromptText&, std::size_t i) { return i < 7; });
    const auto r = evaluate(model, data, PromptSpec{}, kSpec, "t");
    EXPECT_EQ(r.correct, 7u);
    EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
}

TEST(Evaluate, AlwaysNeutralOnAllAgreeMatchesClassShare) {
    const auto full = load_labeled_dataset(finsent::test::kDataDir / "wsbs_fixture.csv");
    ASSERT_TRUE(full.diagnostics.empty());
    const auto agree = derive_all_agree(full.samples);
    FixtureGenerativeModel model;
    model.set_default_reply("Neutral.");
    const auto r = evaluate(model, agree, PromptSpec{}, kSpec, "all_agree", {.workers = 4});
    EXPECT_EQ(r.n, 1509u);
    EXPECT_NEAR(r.accuracy, 0.238, 0.0005);
    EXPECT_EQ(r.confusion[2][2], r.correct);
}

TEST(Evaluate, UnparseableCountsAsWrong) {
    const auto data = make_samples(30);
    FixtureGenerativeModel model([](const PromptText& p) -> std::optional<std::string> {
        if (p.target_text().ends_with("0")) return "I cannot say.";
        return std::nullopt;
    });
    model.set_default_reply("positive");
    const auto r = evaluate(model, data, PromptSpec{}, kSpec, "t");
    EXPECT_EQ(r.unparseable, 3u);
    std::size_t col3 = 0;
    std::size_t expected_correct = 0;
    for (std::size_t g = 0; g < 3; ++g) col3 += r.confusion[g][kUnparseableColumn];
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i % 10 != 0 && data[i].gold == SentimentLabel::positive) ++expected_correct;
    }
    EXPECT_EQ(col3, 3u);
    EXPECT_EQ(r.correct, expected_correct);
}

TEST(Evaluate, EmptyDatasetRejected) {
    FixtureGenerativeModel model;
    EXPECT_THROW((void)evaluate(model, {}, PromptSpec{}, kSpec, "t"), ContractError);
}

TEST(Evaluate, ShuffleAndWorkerInvariant) {
    auto data = make_samples(300, 9);
    auto model = graded_model(data, [](const PromptText&, std::size_t i) { return i % 3 != 0; });
    const auto a = evaluate(model, data, PromptSpec{}, kSpec, "t");
    std::shuffle(data.begin(), data.end(), std::mt19937_64(3));
    const auto b = evaluate(model, data, PromptSpec{}, kSpec, "t", {.workers = 8});
    EXPECT_EQ(a.correct, b.correct);
    EXPECT_EQ(a.confusion, b.confusion);
}

TEST(Evaluate, CheckpointResumesWithoutModelCalls) {
    TempDir dir;
    const auto data = make_samples(50);
    auto model = graded_model(data, [](const PromptText&, std::size_t i) { return i % 2 == 0; });
    const EvalOptions opts{.checkpoint_dir = dir.path(), .workers = 3};
    const auto first = evaluate(model, data, PromptSpec{}, kSpec, "t", opts);
    EXPECT_EQ(model.calls(), 50u);
    const auto second = evaluate(model, data, PromptSpec{}, kSpec, "t", opts);
    EXPECT_EQ(model.calls(), 50u);
    EXPECT_EQ(first.correct, second.correct);
    EXPECT_EQ(first.confusion, second.confusion);
}

TEST(Evaluate, FailureAbortsAndResumes) {
    TempDir dir;
    const auto data = make_samples(40);
    bool broken = true;
    FixtureGenerativeModel model([&](const PromptText& p) -> std::optional<std::string> {
        if (broken && p.target_text() == "sample text 20") throw TransportError("connection refused");
        return std::nullopt;
    });
    model.set_default_reply("neutral");
    const EvalOptions opts{.checkpoint_dir = dir.path(), .workers = 1};
    try {
        (void)evaluate(model, data, PromptSpec{}, kSpec, "t", opts);
        FAIL() << "expected EvaluationAborted";
    } catch (const EvaluationAborted& e) {
        EXPECT_EQ(e.completed(), 20u);
    }
    broken = false;
    const auto calls_before = model.calls();
    const auto r = evaluate(model, data, PromptSpec{}, kSpec, "t", opts);
    EXPECT_EQ(model.calls() - calls_before, 20u);
    EXPECT_EQ(r.n, 40u);
}

TEST(ComparePrompts, ReportedGains) {
    // 10000 samples so the percentages land exactly on the reported values.
    const auto data = make_samples(10000, 4);
    for (const auto& [base, aiap, gain] :
         {std::tuple{6474, 7237, "+7.63"}, std::tuple{7495, 8091, "+5.96"}}) {
        auto model = graded_model(data, [base = base, aiap = aiap](const PromptText& p, std::size_t i) {
            return i < static_cast<std::size_t>(p.annotator_block().empty() ? base : aiap);
        });
        const auto g = compare_prompts(model, data, IdentifierTerm::news, kSpec, "all_agree", {.workers = 4});
        EXPECT_NEAR(g.base_pct, base / 100.0, 1e-9);
        EXPECT_NEAR(g.aiap_pct, aiap / 100.0, 1e-9);
        EXPECT_EQ(format_gain(g.gain()), gain);
    }
}

TEST(AblationCurve, MonotoneAndFlat) {
    const auto data = make_samples(400, 6);
    auto monotone = graded_model(data, [](const PromptText& p, std::size_t i) { return i < 100 + 80 * level(p); });
    const auto curve = ablation_curve(monotone, data, IdentifierTerm::input, kSpec, "t");
    EXPECT_EQ(curve[0].family, "base");
    EXPECT_EQ(curve[3].family, "aiap:D+G+E");
    for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(curve[i].accuracy, curve[i - 1].accuracy);

    auto flat = graded_model(data, [](const PromptText&, std::size_t i) { return i < 150; });
    const auto same = ablation_curve(flat, data, IdentifierTerm::input, kSpec, "t");
    for (const auto& r : same) EXPECT_DOUBLE_EQ(r.accuracy, same[0].accuracy);
}

TEST(FewShotTable, ShapeAndFamilies) {
    const auto data = make_samples(60);
    auto model = graded_model(data, [](const PromptText& p, std::size_t i) {
        return i < 10 + 10 * p.count_sections("shot_input") + (p.annotator_block().empty() ? 0 : 40);
    });
    const auto t = few_shot_table(model, data, IdentifierTerm::news, kSpec, "full");
    const std::array<std::string, 5> families{"base", "1-S", "2-S", "3-S", "aiap:D+G+E"};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(t[i].family, families[i]);
    EXPECT_EQ(t[1].correct, 20u);
    EXPECT_EQ(t[3].correct, 40u);
    EXPECT_EQ(t[4].correct, 50u);
}

TEST(MeanGain, ReportedTable) {
    const std::vector<std::pair<double, double>> rows{
        {64.74, 72.37}, {56.53, 62.23}, {58.85, 67.93}, {57.19, 61.30}, {51.44, 57.91}, {53.53, 59.28},
        {60.77, 68.33}, {65.81, 72.50}, {63.22, 67.46}, {52.81, 57.84}, {56.85, 61.00}, {53.87, 56.34},
        {70.25, 79.06}, {73.76, 78.76}, {74.95, 80.91}, {58.39, 65.38}, {60.75, 63.80}, {60.96, 68.39}};
    std::vector<GainEntry> entries;
    for (const auto& [b, a] : rows) entries.push_back({b, a});
    const auto s = mean_gain(entries);
    EXPECT_EQ(format_fixed(s.mean, 2), "5.90");
    EXPECT_NEAR(s.max, 9.08, 1e-9);
}

TEST(MeanGain, EdgeCases) {
    const GainEntry one{50.0, 53.5};
    EXPECT_DOUBLE_EQ(mean_gain(std::span(&one, 1)).mean, 3.5);
    const std::vector<GainEntry> cancel{{50, 51}, {50, 49}};
    EXPECT_DOUBLE_EQ(mean_gain(cancel).mean, 0.0);
    EXPECT_DOUBLE_EQ(mean_gain(cancel).max, 1.0);
    EXPECT_THROW((void)mean_gain({}), ContractError);
}

TEST(FormatGain, Signs) {
    EXPECT_EQ(format_gain(7.634), "+7.63");
    EXPECT_EQ(format_gain(-0.4), "-0.40");
    EXPECT_EQ(format_gain(0.0), "0.00");
    EXPECT_EQ(format_gain(-0.001), "0.00");
}

TEST(Writers, FewShotTableValues) {
    const std::vector<FewShotRow> rows{{"all_agree", IdentifierTerm::news, {64.74, 65.94, 58.58, 62.82, 72.37}},
                                       {"full", IdentifierTerm::news, {57.19, 59.18, 54.59, 58.77, 61.30}}};
    std::ostringstream md;
    write_few_shot_markdown(md, rows);
    EXPECT_NE(md.str().find("| 64.74 | 65.94 | 58.58 | 62.82 | 72.37 |"), std::string::npos) << md.str();
    EXPECT_NE(md.str().find("61.30"), std::string::npos);
    std::ostringstream csv;
    write_few_shot_csv(csv, rows);
    const auto text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Writers, GainMarkdownSummary) {
    const std::vector<GainRow> rows{{"m", "all_agree", IdentifierTerm::news, {64.74, 72.37}},
                                    {"m", "all_agree", IdentifierTerm::input, {74.95, 80.91}}};
    std::ostringstream md;
    write_gain_markdown(md, rows);
    EXPECT_NE(md.str().find("+7.63"), std::string::npos);
    EXPECT_NE(md.str().find("max gain: +7.63 points."), std::string::npos) << md.str();
}

TEST(Writers, EvalCsvHasConfusion) {
    const auto data = make_samples(12);
    auto model = graded_model(data, [](const PromptText&, std::size_t) { return true; });
    const std::vector<EvalReport> reports{evaluate(model, data, PromptSpec{}, kSpec, "t")};
    std::ostringstream csv;
    write_eval_csv(csv, reports);
    const auto header = csv.str().substr(0, csv.str().find('\n'));
    EXPECT_TRUE(header.starts_with("family,identifier,dataset,n,correct,accuracy,unparseable"));
    EXPECT_NE(header.find("unparseable"), std::string::npos);
}
