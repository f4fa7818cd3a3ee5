#include "planted_signal.hpp"

#include "app.hpp"

#include <finsent/csv.hpp>

#include "oracles.hpp"
#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace finsent::acceptance {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDays = 600;
constexpr int kDocsPerDay = 4;
constexpr double kNoiseSd = 1.0;
constexpr double kSignalToNoise = 2.0;  // beta * sd(feature) / noise sd

bool is_weekend(Date d) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

double sd(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

std::map<std::string, double> read_row(const csv::Header& h, const csv::Row& row, std::initializer_list<const char*> cols) {
    std::map<std::string, double> out;
    for (const char* c : cols) out[c] = std::stod(row.at(h.require(c)));
    return out;
}

}  // namespace

PlantedSignalResult run_planted_signal(const fs::path& workdir) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, kNoiseSd);

    // Documents on every calendar day, four per day at 15:00 UTC.
    const Date start = parse_date("2020-06-01");
    std::string corpus;
    json by_text = json::object();
    std::vector<Date> days;
    std::vector<double> daily;  // confidence score per calendar day
    for (int i = 0; i < kDays; ++i) {
        const Date d = start + std::chrono::days{i};
        std::vector<test::OracleDoc> docs;
        for (int k = 0; k < kDocsPerDay; ++k) {
            const std::string id = "p" + std::to_string(i) + "_" + std::to_string(k);
            const std::string body = "GME thread " + std::to_string(i) + "." + std::to_string(k);
            std::array<double, 3> p{u(rng), u(rng), u(rng)};
            const double sum = p[0] + p[1] + p[2];
            for (auto& x : p) x /= sum;
            by_text[body] = {p[0], p[1], p[2]};
            corpus += json{{"id", id}, {"ts", format_date(d) + "T15:00:00Z"}, {"kind", "post"}, {"body", body}}.dump() + "\n";
            docs.push_back({0, id, p});
        }
        days.push_back(d);
        daily.push_back(test::csbs_oracle(docs));
    }

    // Feature for trading day t: mean of daily scores since the previous
    // trading day. The next close moves by beta times that feature.
    std::vector<Date> trading;
    std::vector<double> feature;
    std::vector<double> window;
    for (std::size_t i = 0; i < days.size(); ++i) {
        window.push_back(daily[i]);
        if (is_weekend(days[i])) continue;
        double m = 0.0;
        for (double x : window) m += x;
        feature.push_back(m / static_cast<double>(window.size()));
        trading.push_back(days[i]);
        window.clear();
    }
    const double beta = kSignalToNoise * kNoiseSd / sd(feature);

    std::string bars = "date,open,high,low,close,volume\n";
    double close = 500.0;
    for (std::size_t t = 0; t < trading.size(); ++t) {
        const double open = close + 0.2 * noise(rng);
        if (t > 0) close = close + beta * feature[t - 1] + noise(rng);
        const double high = std::max(open, close) + 0.5 + u(rng);
        const double low = std::min(open, close) - 0.5 - u(rng);
        bars += format_date(trading[t]) + "," + format_double(open) + "," + format_double(high) + "," +
                format_double(low) + "," + format_double(close) + "," + std::to_string(100000 + rng() % 50000) + "\n";
    }

    fs::create_directories(workdir);
    test::write_file(workdir / "corpus.jsonl", corpus);
    test::write_file(workdir / "scorer.json", json{{"kind", "probabilities"}, {"by_text", by_text}}.dump());
    test::write_file(workdir / "GME.csv", bars);

    app::RunConfig config;
    config.corpus = workdir / "corpus.jsonl";
    config.scorer = "fixture:" + (workdir / "scorer.json").string();
    config.tickers = {"GME"};
    config.methods = {ScoreMethod::csbs};
    config.prices = {{"GME", workdir / "GME.csv"}};
    config.split = parse_date("2021-12-31");
    config.ridge = {0.0};
    config.out = workdir / "out";
    (void)app::cmd_score(config);
    const auto predicted = app::cmd_predict(config);
    if (!predicted.warnings.empty()) throw std::runtime_error("predict warned: " + predicted.warnings.front());

    PlantedSignalResult result;
    result.features_dir = config.out / "features";
    {
        std::ifstream in(config.out / "regression.csv");
        csv::Reader reader(in);
        csv::Row row;
        reader.next(row);
        const csv::Header h(row);
        while (reader.next(row)) {
            if (row.at(h.require("regressor")) != "average") continue;
            const double r = read_row(h, row, {"rmse"}).at("rmse");
            if (row.at(h.require("variant")) == "baseline") result.baseline_rmse = r;
            if (row.at(h.require("variant")) == "csbs") result.sentiment_rmse = r;
        }
    }
    {
        std::ifstream in(config.out / "improvement.csv");
        csv::Reader reader(in);
        csv::Row row;
        reader.next(row);
        const csv::Header h(row);
        while (reader.next(row)) {
            if (row.at(h.require("ticker")) == "GME" && row.at(h.require("variant")) == "csbs") {
                result.rmse_reduction_pct = read_row(h, row, {"rmse_pct"}).at("rmse_pct");
            }
        }
    }
    result.expected_reduction_pct = 100.0 * (1.0 - 1.0 / std::sqrt(1.0 + kSignalToNoise * kSignalToNoise));
    return result;
}

LeakageAudit audit_features(const fs::path& dir) {
    LeakageAudit audit;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        csv::Reader reader(in);
        csv::Row row;
        if (!reader.next(row)) continue;
        const csv::Header h(row);
        const auto c_feature = h.require("feature_date");
        const auto c_target = h.require("target_date");
        const auto c_through = h.require("inputs_through");
        while (reader.next(row)) {
            ++audit.rows;
            const Date feature = parse_date(row.at(c_feature));
            const Date target = parse_date(row.at(c_target));
            const Date through = parse_date(row.at(c_through));
            if (!(through <= feature && feature < target)) {
                audit.violations.push_back(entry.path().filename().string() + " " + row.at(c_feature));
            }
        }
    }
    return audit;
}

}  // namespace finsent::acceptance
