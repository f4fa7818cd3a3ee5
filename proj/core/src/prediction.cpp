#include "finsent/prediction.hpp"

#include "finsent/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <thread>

namespace finsent {

namespace {

double parse_number(std::string_view text, const std::string& where, std::string_view column) {
    const auto t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(where + ": bad " + std::string(column) + " '" + std::string(t) + "'");
    }
    return v;
}

void require_sorted(std::span<const OhlcvBar> bars) {
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date <= bars[i - 1].date) {
            throw ContractError("bars must be sorted by date without duplicates (at " + format_date(bars[i].date) +
                                ")");
        }
    }
}

FeatureRow baseline_row(const OhlcvBar& today, const OhlcvBar& next) {
    FeatureRow row;
    row.date = today.date;
    row.target_date = next.date;
    row.inputs_through = today.date;
    row.features = {today.open, today.high, today.low, today.close, today.volume};
    row.target = next.close;
    return row;
}

std::string pct(double v) { return format_fixed(v, 2); }

}  // namespace

void validate_bar(const OhlcvBar& b) {
    const std::string where = "bar " + format_date(b.date);
    for (double v : {b.open, b.high, b.low, b.close, b.volume}) {
        if (!std::isfinite(v)) throw ContractError(where + ": non-finite value");
    }
    if (b.volume < 0.0) throw ContractError(where + ": negative volume");
    const double lo = std::min(b.open, b.close);
    const double hi = std::max(b.open, b.close);
    if (b.low > lo || hi > b.high) throw ContractError(where + ": violates low <= open/close <= high");
}

std::vector<OhlcvBar> load_bars(std::istream& in) {
    std::vector<OhlcvBar> bars;
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) return bars;
    const csv::Header header(row);
    const auto c_date = header.require("date");
    const auto c_open = header.require("open");
    const auto c_high = header.require("high");
    const auto c_low = header.require("low");
    const auto c_close = header.require("close");
    const auto c_volume = header.require("volume");
    const auto width = std::max({c_date, c_open, c_high, c_low, c_close, c_volume}) + 1;
    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const std::string where = "price CSV line " + std::to_string(reader.record_line());
        if (row.size() < width) throw ParseError(where + ": too few fields");
        OhlcvBar bar;
        try {
            bar.date = parse_date(row[c_date]);
        } catch (const Error& e) {
            throw ParseError(where + ": " + e.what());
        }
        bar.open = parse_number(row[c_open], where, "open");
        bar.high = parse_number(row[c_high], where, "high");
        bar.low = parse_number(row[c_low], where, "low");
        bar.close = parse_number(row[c_close], where, "close");
        bar.volume = parse_number(row[c_volume], where, "volume");
        try {
            validate_bar(bar);
        } catch (const ContractError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!bars.empty() && bar.date <= bars.back().date) {
            throw ParseError(where + ": dates must be strictly ascending");
        }
        bars.push_back(bar);
    }
    return bars;
}

std::vector<OhlcvBar> load_bars(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open price file '" + path.string() + "'");
    return load_bars(in);
}

std::vector<FeatureRow> align(std::span<const OhlcvBar> bars) {
    require_sorted(bars);
    std::vector<FeatureRow> rows;
    if (bars.size() < 2) return rows;
    rows.reserve(bars.size() - 1);
    for (std::size_t i = 0; i + 1 < bars.size(); ++i) rows.push_back(baseline_row(bars[i], bars[i + 1]));
    return rows;
}

std::vector<FeatureRow> align(std::span<const DailySentimentIndex> series, std::span<const OhlcvBar> bars) {
    require_sorted(bars);
    std::map<Date, double> by_date;
    for (const auto& s : series) {
        if (!by_date.emplace(s.date, s.missing ? 0.0 : s.score).second) {
            throw ContractError("sentiment series has two entries for " + format_date(s.date));
        }
    }

    // Window mean for each bar; a window with no series entries counts as 0.
    std::vector<double> sentiment(bars.size(), 0.0);
    std::vector<Date> latest(bars.size());
    bool overlap = false;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const Date last = bars[i].date;
        auto it = i == 0 ? by_date.lower_bound(last) : by_date.upper_bound(bars[i - 1].date);
        double sum = 0.0;
        std::size_t n = 0;
        latest[i] = last;
        for (; it != by_date.end() && it->first <= last; ++it) {
            sum += it->second;
            ++n;
        }
        if (n > 0) {
            overlap = true;
            sentiment[i] = sum / static_cast<double>(n);
        }
    }
    if (!overlap) throw ContractError("sentiment series and price bars do not overlap");

    std::vector<FeatureRow> rows;
    if (bars.size() < 2) return rows;
    rows.reserve(bars.size() - 1);
    for (std::size_t i = 0; i + 1 < bars.size(); ++i) {
        FeatureRow row = baseline_row(bars[i], bars[i + 1]);
        row.features.push_back(sentiment[i]);
        row.inputs_through = latest[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

SplitResult temporal_split(std::span<const FeatureRow> rows, Date boundary) {
    SplitResult out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date < rows[i - 1].date) throw ContractError("feature rows must be sorted by date");
    }
    for (const auto& r : rows) (r.date <= boundary ? out.train : out.test).push_back(r);
    if (out.train.empty()) out.warnings.push_back("no rows on or before " + format_date(boundary) + " (empty train)");
    if (out.test.empty()) out.warnings.push_back("no rows after " + format_date(boundary) + " (empty test)");
    return out;
}

Eigen::MatrixXd feature_matrix(std::span<const FeatureRow> rows) {
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    const auto p = rows.front().features.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].features.size() != p) throw ContractError("feature vector length differs between rows");
        for (std::size_t j = 0; j < p; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].features[j];
        }
    }
    return x;
}

Eigen::VectorXd target_vector(std::span<const FeatureRow> rows) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].target;
    return y;
}

double rmse(std::span<const double> yhat, std::span<const double> y) {
    if (yhat.empty() || yhat.size() != y.size()) throw ContractError("rmse needs equal nonempty lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += (yhat[i] - y[i]) * (yhat[i] - y[i]);
    return std::sqrt(sum / static_cast<double>(y.size()));
}

double mae(std::span<const double> yhat, std::span<const double> y) {
    if (yhat.empty() || yhat.size() != y.size()) throw ContractError("mae needs equal nonempty lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(yhat[i] - y[i]);
    return sum / static_cast<double>(y.size());
}

RegressionReport summarize(std::vector<RegressorMetrics> per_regressor) {
    if (per_regressor.empty()) throw ContractError("regression report needs at least one regressor");
    RegressionReport r;
    for (const auto& m : per_regressor) {
        r.avg_rmse += m.rmse;
        r.avg_mae += m.mae;
    }
    r.avg_rmse /= static_cast<double>(per_regressor.size());
    r.avg_mae /= static_cast<double>(per_regressor.size());
    r.per_regressor = std::move(per_regressor);
    return r;
}

Improvement improvement_table(std::span<const RegressorMetrics> base, std::span<const RegressorMetrics> method) {
    if (base.empty()) throw ContractError("improvement needs at least one regressor");
    if (base.size() != method.size()) throw ContractError("baseline and method list different regressors");
    Improvement out;
    for (const auto& b : base) {
        const auto m = std::find_if(method.begin(), method.end(), [&](const RegressorMetrics& x) { return x.name == b.name; });
        if (m == method.end()) throw ContractError("regressor '" + b.name + "' missing from method metrics");
        if (b.rmse == 0.0 || b.mae == 0.0) throw ContractError("baseline metric of '" + b.name + "' is zero");
        out.rmse_pct += 100.0 * (b.rmse - m->rmse) / b.rmse;
        out.mae_pct += 100.0 * (b.mae - m->mae) / b.mae;
    }
    out.rmse_pct /= static_cast<double>(base.size());
    out.mae_pct /= static_cast<double>(base.size());
    return out;
}

const ExperimentCell* ExperimentReport::cell(std::string_view ticker, std::string_view variant) const {
    for (const auto& c : cells) {
        if (c.ticker == ticker && c.variant == variant) return &c;
    }
    return nullptr;
}

const ImprovementCell* ExperimentReport::improvement(std::string_view ticker, std::string_view variant) const {
    for (const auto& c : improvements) {
        if (c.ticker == ticker && c.variant == variant) return &c;
    }
    return nullptr;
}

std::size_t ExperimentReport::failed_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
}

namespace {

ExperimentCell run_cell(const StockInput& stock, const std::string& variant, const ExperimentConfig& config) {
    ExperimentCell cell;
    cell.ticker = stock.ticker;
    cell.variant = variant;
    try {
        if (variant == kBaselineVariant) {
            cell.rows = align(stock.bars);
        } else {
            const auto it = std::find_if(stock.variants.begin(), stock.variants.end(),
                                         [&](const VariantSeries& v) { return v.name == variant; });
            if (it == stock.variants.end()) throw ContractError("no sentiment series for variant '" + variant + "'");
            cell.rows = align(it->series, stock.bars);
        }
        auto split = temporal_split(cell.rows, config.boundary);
        cell.warnings = std::move(split.warnings);
        cell.n_train = split.train.size();
        cell.n_test = split.test.size();
        if (split.train.empty() || split.test.empty()) throw ContractError("cannot evaluate with an empty split side");

        const Eigen::MatrixXd x_train = feature_matrix(split.train);
        const Eigen::VectorXd y_train = target_vector(split.train);
        const Eigen::MatrixXd x_test = feature_matrix(split.test);
        const Eigen::VectorXd y_test = target_vector(split.test);
        std::vector<RegressorMetrics> metrics;
        for (const auto& spec : config.regressors) {
            try {
                auto reg = spec.make();
                reg->fit(x_train, y_train);
                const Eigen::VectorXd yhat = reg->predict(x_test);
                const std::span<const double> a(yhat.data(), static_cast<std::size_t>(yhat.size()));
                const std::span<const double> b(y_test.data(), static_cast<std::size_t>(y_test.size()));
                metrics.push_back({spec.name, rmse(a, b), mae(a, b)});
            } catch (const std::exception& e) {
                throw Error("regressor '" + spec.name + "': " + e.what());
            }
        }
        cell.report = summarize(std::move(metrics));
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.regressors.empty()) throw ContractError("experiment needs at least one regressor");
    if (config.variants.empty()) throw ContractError("experiment needs at least one variant");
    {
        std::set<std::string> seen;
        for (const auto& v : config.variants) {
            if (!seen.insert(v).second) throw ContractError("variant '" + v + "' listed twice");
        }
        seen.clear();
        for (const auto& r : config.regressors) {
            if (!seen.insert(r.name).second) throw ContractError("regressor '" + r.name + "' listed twice");
        }
        seen.clear();
        for (const auto& s : config.stocks) {
            if (!seen.insert(s.ticker).second) throw ContractError("stock '" + s.ticker + "' listed twice");
        }
    }

    ExperimentReport report;
    report.variants = config.variants;
    report.boundary = config.boundary;
    for (const auto& spec : config.regressors) report.regressors.push_back({spec.name, spec.make()->params()});

    std::vector<const StockInput*> stocks;
    for (const auto& s : config.stocks) stocks.push_back(&s);
    std::sort(stocks.begin(), stocks.end(), [](const auto* a, const auto* b) { return a->ticker < b->ticker; });
    for (const auto* s : stocks) report.tickers.push_back(s->ticker);

    // Cells are independent; run them in batches and collect in key order.
    struct Job {
        const StockInput* stock;
        const std::string* variant;
    };
    std::vector<Job> jobs;
    for (const auto* s : stocks) {
        for (const auto& v : config.variants) jobs.push_back({s, &v});
    }
    const std::size_t width =
        std::max<std::size_t>(1, config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency()));
    report.cells.resize(jobs.size());
    for (std::size_t start = 0; start < jobs.size(); start += width) {
        std::vector<std::future<ExperimentCell>> batch;
        const std::size_t end = std::min(jobs.size(), start + width);
        for (std::size_t i = start; i < end; ++i) {
            batch.push_back(std::async(std::launch::async, [&config, job = jobs[i]] {
                return run_cell(*job.stock, *job.variant, config);
            }));
        }
        for (std::size_t i = start; i < end; ++i) report.cells[i] = batch[i - start].get();
    }

    const bool has_baseline =
        std::find(config.variants.begin(), config.variants.end(), kBaselineVariant) != config.variants.end();
    if (has_baseline) {
        for (const auto& ticker : report.tickers) {
            const ExperimentCell* base = report.cell(ticker, kBaselineVariant);
            for (const auto& variant : config.variants) {
                if (variant == kBaselineVariant) continue;
                ImprovementCell ic{ticker, variant, std::nullopt, {}};
                const ExperimentCell* method = report.cell(ticker, variant);
                try {
                    if (!base->ok()) throw Error("baseline failed: " + base->error);
                    if (!method->ok()) throw Error("variant failed: " + method->error);
                    ic.value = improvement_table(base->report->per_regressor, method->report->per_regressor);
                } catch (const std::exception& e) {
                    ic.error = e.what();
                }
                report.improvements.push_back(std::move(ic));
            }
        }
    }
    return report;
}

void write_regression_csv(std::ostream& out, const ExperimentReport& report) {
    csv::write_row(out, {"ticker", "variant", "regressor", "rmse", "mae", "n_train", "n_test", "error"});
    for (const auto& c : report.cells) {
        const auto n_train = std::to_string(c.n_train);
        const auto n_test = std::to_string(c.n_test);
        if (!c.ok()) {
            csv::write_row(out, {c.ticker, c.variant, "average", "", "", n_train, n_test, c.error});
            continue;
        }
        for (const auto& m : c.report->per_regressor) {
            csv::write_row(out, {c.ticker, c.variant, m.name, format_double(m.rmse), format_double(m.mae), n_train,
                                 n_test, ""});
        }
        csv::write_row(out, {c.ticker, c.variant, "average", format_double(c.report->avg_rmse),
                             format_double(c.report->avg_mae), n_train, n_test, ""});
    }
}

void write_regression_markdown(std::ostream& out, const ExperimentReport& report) {
    out << "| Variant |";
    for (const auto& t : report.tickers) out << ' ' << t << " RMSE | " << t << " MAE |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.tickers.size(); ++i) out << "---:|---:|";
    out << '\n';
    for (const auto& v : report.variants) {
        out << "| " << v << " |";
        for (const auto& t : report.tickers) {
            const ExperimentCell* c = report.cell(t, v);
            if (c && c->ok()) {
                out << ' ' << format_fixed(c->report->avg_rmse, 2) << " | " << format_fixed(c->report->avg_mae, 2)
                    << " |";
            } else {
                out << " error | error |";
            }
        }
        out << '\n';
    }
    bool noted = false;
    for (const auto& c : report.cells) {
        if (c.ok()) continue;
        if (!noted) out << "\nFailed cells:\n\n";
        noted = true;
        out << "- " << c.ticker << " / " << c.variant << ": " << c.error << '\n';
    }
}

namespace {

// Mean over stocks whose improvement was computed; nullopt when none were.
std::optional<Improvement> average_improvement(const ExperimentReport& report, const std::string& variant) {
    Improvement sum;
    std::size_t n = 0;
    for (const auto& ic : report.improvements) {
        if (ic.variant != variant || !ic.value) continue;
        sum.rmse_pct += ic.value->rmse_pct;
        sum.mae_pct += ic.value->mae_pct;
        ++n;
    }
    if (n == 0) return std::nullopt;
    sum.rmse_pct /= static_cast<double>(n);
    sum.mae_pct /= static_cast<double>(n);
    return sum;
}

}  // namespace

void write_improvement_csv(std::ostream& out, const ExperimentReport& report) {
    csv::write_row(out, {"ticker", "variant", "rmse_pct", "mae_pct", "error"});
    for (const auto& ic : report.improvements) {
        if (ic.value) {
            csv::write_row(out, {ic.ticker, ic.variant, format_double(ic.value->rmse_pct),
                                 format_double(ic.value->mae_pct), ""});
        } else {
            csv::write_row(out, {ic.ticker, ic.variant, "", "", ic.error});
        }
    }
    for (const auto& v : report.variants) {
        if (v == kBaselineVariant) continue;
        if (const auto avg = average_improvement(report, v)) {
            csv::write_row(out, {"average", v, format_double(avg->rmse_pct), format_double(avg->mae_pct), ""});
        }
    }
}

void write_improvement_markdown(std::ostream& out, const ExperimentReport& report) {
    out << "| Variant |";
    for (const auto& t : report.tickers) out << ' ' << t << " |";
    out << " Average |\n|---|";
    for (std::size_t i = 0; i <= report.tickers.size(); ++i) out << "---:|";
    out << '\n';
    const auto cell_text = [](const std::optional<Improvement>& v) {
        return v ? pct(v->rmse_pct) + " (" + pct(v->mae_pct) + ")" : std::string("error");
    };
    for (const auto& v : report.variants) {
        if (v == kBaselineVariant) continue;
        out << "| " << v << " |";
        for (const auto& t : report.tickers) {
            const ImprovementCell* ic = report.improvement(t, v);
            out << ' ' << cell_text(ic ? ic->value : std::nullopt) << " |";
        }
        out << ' ' << cell_text(average_improvement(report, v)) << " |\n";
    }
}

void write_feature_rows_csv(std::ostream& out, std::span<const FeatureRow> rows) {
    csv::Row header{"feature_date", "target_date", "inputs_through", "open", "high", "low", "close", "volume"};
    if (!rows.empty() && rows.front().features.size() > kBaselineFeatures) header.emplace_back("sentiment");
    header.emplace_back("target");
    csv::write_row(out, header);
    for (const auto& r : rows) {
        csv::Row line{format_date(r.date), format_date(r.target_date), format_date(r.inputs_through)};
        for (double f : r.features) line.push_back(format_double(f));
        line.push_back(format_double(r.target));
        csv::write_row(out, line);
    }
}

}  // namespace finsent
