#include "app.hpp"

#include <finsent/corpus.hpp>
#include <finsent/evaluation.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <cstdio>
#include <sys/wait.h>

using namespace finsent;
using namespace finsent::app;
using finsent::test::read_file;
using finsent::test::TempDir;
using finsent::test::write_file;
using nlohmann::json;

namespace {

// A small labeled set plus a fixture that answers `correct` of every three
// samples correctly.
void write_bench_inputs(const TempDir& dir, bool oracle) {
    std::string csv = "id,text,label,ann1,ann2\n";
    json by_input = json::object();
    for (int i = 0; i < 30; ++i) {
        const auto label = std::string(to_string(kAllLabels[i % 3]));
        const auto other = std::string(to_string(kAllLabels[(i + 1) % 3]));
        const std::string text = "post number " + std::to_string(i);
        const bool agree = i % 2 == 0;
        csv += "s" + std::to_string(i) + "," + text + "," + label + "," + label + "," + (agree ? label : other) + "\n";
        by_input[text] = oracle || i % 4 != 0 ? label : other;
    }
    write_file(dir / "data.csv", csv);
    write_file(dir / "model.json", json{{"by_input", by_input}}.dump());
}

RunConfig bench_config(const TempDir& dir) {
    RunConfig c;
    c.dataset = dir / "data.csv";
    c.model = "fixture:" + (dir / "model.json").string();
    c.out = dir / "out";
    c.workers = 2;
    return c;
}

std::string corpus_line(const std::string& id, const std::string& ts, const std::string& body) {
    return json{{"id", id}, {"ts", ts}, {"kind", "post"}, {"body", body}}.dump() + "\n";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FINSENT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t csv_rows(const fs::path& p) {
    const auto text = read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST(RunConfig, JsonRoundTripAndHash) {
    TempDir dir;
    write_file(dir / "cfg.json", R"({"corpus": "c.jsonl", "tickers": ["GME", "AMC"], "split": "2021-06-30",
        "ridge": [0, 1.5], "methods": ["csbs"], "identifiers": ["news", "tweet"], "workers": 3,
        "prices": {"GME": "gme.csv"}, "model": "fixture:m.json"})");
    const auto c = RunConfig::load(dir / "cfg.json");
    EXPECT_EQ(*c.corpus, dir.path() / "c.jsonl");
    EXPECT_EQ(c.prices.at("GME"), dir.path() / "gme.csv");
    EXPECT_EQ(c.model, "fixture:" + (dir.path() / "m.json").string());
    EXPECT_EQ(c.split, parse_date("2021-06-30"));
    EXPECT_EQ(c.ridge, (std::vector<double>{0.0, 1.5}));
    EXPECT_EQ(c.identifiers.size(), 2u);
    EXPECT_EQ(c.workers, 3u);

    const auto again = RunConfig::from_json(c.to_json());
    EXPECT_EQ(again.hash(), c.hash());
    auto changed = c;
    changed.ridge.push_back(2.0);
    EXPECT_NE(changed.hash(), c.hash());
}

TEST(RunConfig, BadValues) {
    EXPECT_THROW((void)RunConfig::from_json(json::array()), ParseError);
    EXPECT_THROW((void)RunConfig::from_json(json{{"tickers", "GME"}}), ParseError);
    EXPECT_THROW((void)RunConfig::from_json(json{{"split", "yesterday"}}), ParseError);
    EXPECT_THROW((void)RunConfig::from_json(json{{"methods", {"vader"}}}), ParseError);
}

TEST(RunConfig, ValidateCatchesMissingInputs) {
    RunConfig c;
    EXPECT_THROW(c.validate(Command::ingest), ContractError);
    c.corpus = "/nonexistent/corpus.jsonl";
    EXPECT_THROW(c.validate(Command::ingest), ContractError);
    TempDir dir;
    write_bench_inputs(dir, true);
    auto b = bench_config(dir);
    EXPECT_NO_THROW(b.validate(Command::bench));
    b.prompt = "magic";
    EXPECT_THROW(b.validate(Command::bench), ContractError);
    b = bench_config(dir);
    b.first = parse_date("2021-02-01");
    b.last = parse_date("2021-01-01");
    EXPECT_THROW(b.validate(Command::bench), ContractError);
}

TEST(Ingest, EmptyCorpus) {
    TempDir dir;
    write_file(dir / "c.jsonl", "");
    RunConfig c;
    c.corpus = dir / "c.jsonl";
    c.tickers = {"GME"};
    c.out = dir / "out";
    const auto r = cmd_ingest(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(read_file(dir / "out/corpus.jsonl"), "");
    EXPECT_EQ(read_file(dir / "out/summary.csv"), "ticker,date,n_docs\n");
    const auto meta = json::parse(read_file(dir / "out/summary.csv.meta.json"));
    EXPECT_EQ(meta.at("config_sha256"), c.hash());
}

TEST(Ingest, CountsPerTickerAndDay) {
    TempDir dir;
    write_file(dir / "c.jsonl", corpus_line("a", "2021-01-27T15:00:00Z", "GME to the moon") +
                                    corpus_line("b", "2021-01-27T16:00:00Z", "$amc and GME both") +
                                    corpus_line("c", "2021-01-28T03:00:00Z", "AMC late night") + "{broken\n");
    RunConfig c;
    c.corpus = dir / "c.jsonl";
    c.tickers = {"GME", "AMC"};
    c.out = dir / "out";
    const auto r = cmd_ingest(c);
    EXPECT_EQ(r.warnings.size(), 1u);
    // 03:00 UTC on the 28th is still the 27th in New York.
    EXPECT_EQ(read_file(dir / "out/summary.csv"), "ticker,date,n_docs\nAMC,2021-01-27,2\nGME,2021-01-27,2\n");
}

TEST(Bench, OracleScoresPerfectly) {
    TempDir dir;
    write_bench_inputs(dir, true);
    auto c = bench_config(dir);
    const auto r = cmd_bench(c);
    EXPECT_TRUE(r.warnings.empty());
    const auto eval = read_file(dir / "out/eval.csv");
    EXPECT_NE(eval.find("base,input,all_agree,15,15,100.00"), std::string::npos) << eval;
    EXPECT_NE(eval.find("aiap:D+G+E,input,full,30,30,100.00"), std::string::npos) << eval;
    EXPECT_TRUE(fs::exists(dir / "out/gain.md"));
    EXPECT_NE(read_file(dir / "out/gain.md").find("Config SHA-256: `" + c.hash() + "`"), std::string::npos);
}

TEST(Bench, RerunIsIdenticalAndUsesCheckpoints) {
    TempDir dir;
    write_bench_inputs(dir, false);
    auto c = bench_config(dir);
    c.identifiers.assign(kAllIdentifiers.begin(), kAllIdentifiers.end());
    (void)cmd_bench(c);
    const auto first = read_file(dir / "out/eval.csv");
    EXPECT_EQ(csv_rows(dir / "out/eval.csv"), 1u + 2 * 3 * 2);
    (void)cmd_bench(c);
    EXPECT_EQ(read_file(dir / "out/eval.csv"), first);
}

TEST(Bench, AblationAndFewShotReports) {
    TempDir dir;
    write_bench_inputs(dir, false);
    auto c = bench_config(dir);
    c.prompt = "ablation";
    c.datasets = {"full"};
    (void)cmd_bench(c);
    EXPECT_EQ(csv_rows(dir / "out/ablation.csv"), 2u);
    c.prompt = "fewshot";
    (void)cmd_bench(c);
    EXPECT_EQ(csv_rows(dir / "out/fewshot.csv"), 2u);
    EXPECT_NE(read_file(dir / "out/fewshot.md").find("Shot order"), std::string::npos);
}

namespace {

void write_score_inputs(const TempDir& dir) {
    std::string corpus;
    json by_text = json::object();
    const char* bodies[] = {"GME squeeze incoming", "AMC is dead money", "holding GME and AMC", "nothing here"};
    const std::vector<std::vector<double>> probs{{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.2, 0.5}, {0.3, 0.3, 0.4}};
    for (int i = 0; i < 4; ++i) {
        corpus += corpus_line("d" + std::to_string(i), "2021-01-2" + std::to_string(5 + i) + "T15:00:00Z", bodies[i]);
        by_text[bodies[i]] = probs[i];
    }
    write_file(dir / "c.jsonl", corpus);
    write_file(dir / "scorer.json", json{{"kind", "probabilities"}, {"by_text", by_text}}.dump());
}

RunConfig score_config(const TempDir& dir) {
    RunConfig c;
    c.corpus = dir / "c.jsonl";
    c.scorer = "fixture:" + (dir / "scorer.json").string();
    c.tickers = {"GME", "AMC"};
    c.out = dir / "out";
    return c;
}

}  // namespace

TEST(Score, OneFilePerTickerAndMethod) {
    TempDir dir;
    write_score_inputs(dir);
    const auto c = score_config(dir);
    const auto r = cmd_score(c);
    for (const char* f : {"GME_quantss", "GME_csbs", "AMC_quantss", "AMC_csbs"}) {
        EXPECT_TRUE(fs::exists(dir / ("out/index/" + std::string(f) + ".csv"))) << f;
    }
    const auto gme = read_index_csv(dir / "out/index/GME_csbs.csv");
    ASSERT_EQ(gme.size(), 3u);  // 25th..27th: the fourth document mentions no ticker
    EXPECT_DOUBLE_EQ(gme[0].score, 0.7);
    EXPECT_TRUE(gme[1].missing);
    EXPECT_DOUBLE_EQ(gme[2].score, 0.5);
    const auto amc = read_index_csv(dir / "out/index/AMC_quantss.csv");
    EXPECT_DOUBLE_EQ(amc[1].score, -1.0);
    EXPECT_DOUBLE_EQ(amc[2].score, 0.0);
}

TEST(Score, EmptyRangeWritesHeadersOnly) {
    TempDir dir;
    write_score_inputs(dir);
    auto c = score_config(dir);
    c.first = parse_date("2020-01-01");
    c.last = parse_date("2020-01-02");
    (void)cmd_score(c);
    const auto s = read_index_csv(dir / "out/index/GME_csbs.csv");
    EXPECT_EQ(s.size(), 2u);
    for (const auto& d : s) EXPECT_TRUE(d.missing);

    write_file(dir / "c.jsonl", "");
    c.first.reset();
    c.last.reset();
    (void)cmd_score(c);
    EXPECT_EQ(read_file(dir / "out/index/GME_csbs.csv"), "ticker,date,method,score,n_docs,missing\n");
}

TEST(Score, RerunIsBitIdentical) {
    TempDir dir;
    write_score_inputs(dir);
    auto c = score_config(dir);
    c.workers = 3;
    (void)cmd_score(c);
    const auto a = read_file(dir / "out/index/AMC_csbs.csv");
    const auto meta = read_file(dir / "out/index/AMC_csbs.csv.meta.json");
    (void)cmd_score(c);
    EXPECT_EQ(read_file(dir / "out/index/AMC_csbs.csv"), a);
    EXPECT_EQ(read_file(dir / "out/index/AMC_csbs.csv.meta.json"), meta);
}

TEST(Score, CsbsNeedsScorer) {
    TempDir dir;
    write_score_inputs(dir);
    auto c = score_config(dir);
    c.scorer.clear();
    write_file(dir / "gen.json", R"({"default": "positive"})");
    c.model = "fixture:" + (dir / "gen.json").string();
    EXPECT_THROW((void)cmd_score(c), ContractError);
    c.methods = {ScoreMethod::quantss};
    EXPECT_NO_THROW((void)cmd_score(c));
}

namespace {

// Weekday bars over 2021-2022 plus a daily index per ticker.
void write_predict_inputs(const TempDir& dir) {
    for (const std::string t : {"GME", "AMC"}) {
        std::string bars = "date,open,high,low,close,volume\n";
        std::string index = "ticker,date,method,score,n_docs,missing\n";
        double close = t == "GME" ? 40.0 : 10.0;
        int i = 0;
        for (Date d = parse_date("2021-01-01"); d <= parse_date("2022-06-30"); d += std::chrono::days{1}, ++i) {
            const double s = std::sin(i * 0.7);
            index += t + "," + format_date(d) + ",csbs," + format_double(s) + ",1,false\n";
            const std::chrono::weekday wd{std::chrono::sys_days{d}};
            if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
            const double open = close + 0.2 * std::sin(i * 2.1);
            close += 0.3 * std::cos(i * 1.3) + 0.5 * s;
            bars += format_date(d) + "," + format_double(open) + "," +
                    format_double(std::max(open, close) + 1 + 0.5 * std::cos(i * 0.9)) + "," +
                    format_double(std::min(open, close) - 1) + "," + format_double(close) + "," +
                    std::to_string(1000 + i % 7 * 10) + "\n";
        }
        write_file(dir / (t + ".csv"), bars);
        write_file(dir / ("out/index/" + t + "_csbs.csv"), index);
    }
}

RunConfig predict_config(const TempDir& dir) {
    RunConfig c;
    c.prices = {{"GME", dir / "GME.csv"}, {"AMC", dir / "AMC.csv"}};
    c.out = dir / "out";
    c.ridge = {0.0, 1.0};
    return c;
}

}  // namespace

TEST(Predict, ReportShapes) {
    TempDir dir;
    write_predict_inputs(dir);
    const auto r = cmd_predict(predict_config(dir));
    EXPECT_TRUE(r.warnings.empty()) << r.warnings.front();
    // 2 tickers x 2 variants x (2 regressors + average) plus the header.
    EXPECT_EQ(csv_rows(dir / "out/regression.csv"), 1u + 2 * 2 * 3);
    // 2 tickers + average, one non-baseline variant.
    EXPECT_EQ(csv_rows(dir / "out/improvement.csv"), 1u + 3);
    EXPECT_TRUE(fs::exists(dir / "out/features/GME_csbs.csv"));
    EXPECT_TRUE(fs::exists(dir / "out/features/AMC_baseline.csv"));
}

TEST(Predict, BaselineOnlyOmitsImprovement) {
    TempDir dir;
    write_predict_inputs(dir);
    auto c = predict_config(dir);
    c.variants = {"baseline"};
    (void)cmd_predict(c);
    EXPECT_FALSE(fs::exists(dir / "out/improvement.csv"));
    EXPECT_EQ(csv_rows(dir / "out/regression.csv"), 1u + 2 * 3);
}

TEST(Predict, Deterministic) {
    TempDir dir;
    write_predict_inputs(dir);
    auto c = predict_config(dir);
    (void)cmd_predict(c);
    const auto a = read_file(dir / "out/regression.csv");
    const auto b = read_file(dir / "out/improvement.md");
    c.workers = 1;
    (void)cmd_predict(c);
    EXPECT_EQ(read_file(dir / "out/regression.csv"), a);
    EXPECT_EQ(read_file(dir / "out/improvement.md").substr(b.find('|')), b.substr(b.find('|')));
}

TEST(Predict, FailedCellsBecomeWarnings) {
    TempDir dir;
    write_predict_inputs(dir);
    auto c = predict_config(dir);
    c.split = parse_date("2030-01-01");
    const auto r = cmd_predict(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Report, CollectsMarkdown) {
    TempDir dir;
    write_predict_inputs(dir);
    auto c = predict_config(dir);
    (void)cmd_predict(c);
    (void)cmd_report(c);
    const auto report = read_file(dir / "out/report.md");
    EXPECT_NE(report.find("## Averaged RMSE and MAE"), std::string::npos);
    EXPECT_NE(report.find("## Improvement over baseline"), std::string::npos);
}

TEST(Binary, ExitCodes) {
    TempDir dir;
    write_bench_inputs(dir, true);
    EXPECT_EQ(run_cli("bench --dataset " + (dir / "data.csv").string() + " --model fixture:" +
                      (dir / "model.json").string() + " --out " + (dir / "out").string() + " --prompt base"),
              0);
    EXPECT_TRUE(fs::exists(dir / "out/eval.csv"));
    EXPECT_EQ(run_cli("ingest --corpus /nonexistent.jsonl --out " + (dir / "o2").string()), 1);
    EXPECT_NE(run_cli("frobnicate"), 0);
    EXPECT_NE(run_cli(""), 0);
}
