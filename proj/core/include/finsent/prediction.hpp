#pragma once

#include "finsent/civil_time.hpp"
#include "finsent/regression.hpp"
#include "finsent/scoring.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace finsent {

struct OhlcvBar {
    Date date{};
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    friend bool operator==(const OhlcvBar&, const OhlcvBar&) = default;
};

/// Throws ContractError unless low <= min(open, close) <= max(open, close)
/// <= high, volume >= 0 and every field is finite.
void validate_bar(const OhlcvBar& bar);

/// CSV with columns date, open, high, low, close, volume in any order; an
/// "adj close" column is accepted and ignored. Rows must be in ascending date
/// order without duplicates. Throws ParseError naming the line.
[[nodiscard]] std::vector<OhlcvBar> load_bars(std::istream& in);
[[nodiscard]] std::vector<OhlcvBar> load_bars(const std::filesystem::path& path);

struct FeatureRow {
    Date date{};            // feature date (trading day t)
    Date target_date{};     // next trading day t+1
    Date inputs_through{};  // latest date any feature value was drawn from
    std::vector<double> features;  // open, high, low, close, volume[, sentiment]
    double target = 0.0;    // close at target_date
};

inline constexpr std::size_t kBaselineFeatures = 5;

/// Baseline rows: one per consecutive bar pair. Throws ContractError when the
/// bars are unsorted or duplicated.
[[nodiscard]] std::vector<FeatureRow> align(std::span<const OhlcvBar> bars);

/// Adds a sentiment column. The value for bar t is the mean of the index
/// scores dated in (previous bar date, t], so weekend and holiday scores roll
/// into the next trading day; the first bar only sees its own date. Missing
/// days count as 0 and dates absent from the series are skipped. Throws
/// ContractError when no series date falls in any bar window.
[[nodiscard]] std::vector<FeatureRow> align(std::span<const DailySentimentIndex> series,
                                            std::span<const OhlcvBar> bars);

struct SplitResult {
    std::vector<FeatureRow> train;  // feature date <= boundary
    std::vector<FeatureRow> test;
    std::vector<std::string> warnings;
};

[[nodiscard]] SplitResult temporal_split(std::span<const FeatureRow> rows, Date boundary);

[[nodiscard]] Eigen::MatrixXd feature_matrix(std::span<const FeatureRow> rows);
[[nodiscard]] Eigen::VectorXd target_vector(std::span<const FeatureRow> rows);

/// Throws ContractError on empty input or a length mismatch.
[[nodiscard]] double rmse(std::span<const double> yhat, std::span<const double> y);
[[nodiscard]] double mae(std::span<const double> yhat, std::span<const double> y);

struct RegressorMetrics {
    std::string name;
    double rmse = 0.0;
    double mae = 0.0;
};

struct RegressionReport {
    std::vector<RegressorMetrics> per_regressor;
    double avg_rmse = 0.0;
    double avg_mae = 0.0;
};

[[nodiscard]] RegressionReport summarize(std::vector<RegressorMetrics> per_regressor);

struct Improvement {
    double rmse_pct = 0.0;
    double mae_pct = 0.0;
};

/// Per regressor 100 * (base - method) / base, then the mean over
/// regressors, separately for RMSE and MAE. Both sides must name the same
/// regressors. Throws ContractError on a zero baseline metric.
[[nodiscard]] Improvement improvement_table(std::span<const RegressorMetrics> base,
                                            std::span<const RegressorMetrics> method);

inline constexpr std::string_view kBaselineVariant = "baseline";

struct VariantSeries {
    std::string name;
    std::vector<DailySentimentIndex> series;
};

struct StockInput {
    std::string ticker;
    std::vector<OhlcvBar> bars;
    std::vector<VariantSeries> variants;
};

struct ExperimentConfig {
    std::vector<StockInput> stocks;
    std::vector<std::string> variants;  // may include "baseline"
    std::vector<RegressorSpec> regressors;
    Date boundary{};
    unsigned workers = 0;  // 0 picks hardware concurrency
};

struct ExperimentCell {
    std::string ticker;
    std::string variant;
    std::optional<RegressionReport> report;
    std::string error;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::string> warnings;
    std::vector<FeatureRow> rows;

    [[nodiscard]] bool ok() const noexcept { return report.has_value(); }
};

struct ImprovementCell {
    std::string ticker;
    std::string variant;
    std::optional<Improvement> value;
    std::string error;
};

struct RegressorInfo {
    std::string name;
    std::string params;
};

struct ExperimentReport {
    std::vector<std::string> tickers;   // sorted
    std::vector<std::string> variants;  // configured order
    std::vector<RegressorInfo> regressors;
    Date boundary{};
    std::vector<ExperimentCell> cells;  // ticker-major
    /// Empty unless "baseline" and at least one other variant were run.
    std::vector<ImprovementCell> improvements;

    [[nodiscard]] const ExperimentCell* cell(std::string_view ticker, std::string_view variant) const;
    [[nodiscard]] const ImprovementCell* improvement(std::string_view ticker, std::string_view variant) const;
    [[nodiscard]] std::size_t failed_cells() const;
};

/// Each (stock, variant) cell fits every regressor on its own rows. A failing
/// cell records its error and the rest of the report is still produced.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& config);

/// Long form: ticker,variant,regressor,rmse,mae,n_train,n_test,error with an
/// "average" row per cell.
void write_regression_csv(std::ostream& out, const ExperimentReport& report);
/// One row per variant, RMSE and MAE columns per stock.
void write_regression_markdown(std::ostream& out, const ExperimentReport& report);
/// ticker,variant,rmse_pct,mae_pct,error plus an "average" ticker per variant.
void write_improvement_csv(std::ostream& out, const ExperimentReport& report);
/// One row per variant, "rmse% (mae%)" per stock plus the mean over stocks.
void write_improvement_markdown(std::ostream& out, const ExperimentReport& report);
/// feature_date,target_date,inputs_through,<features...>,target
void write_feature_rows_csv(std::ostream& out, std::span<const FeatureRow> rows);

}  // namespace finsent
