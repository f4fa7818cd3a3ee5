#include "finsent/scoring.hpp"

#include "finsent/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

namespace finsent {

std::string_view to_string(ScoreMethod m) noexcept {
    switch (m) {
        case ScoreMethod::quantss: return "quantss";
        case ScoreMethod::csbs: return "csbs";
        case ScoreMethod::csbs_mean: return "csbs_mean";
    }
    return "quantss";
}

ScoreMethod score_method_from_string(std::string_view s) {
    const auto k = to_lower(trim(s));
    if (k == "quantss") return ScoreMethod::quantss;
    if (k == "csbs") return ScoreMethod::csbs;
    if (k == "csbs_mean") return ScoreMethod::csbs_mean;
    throw ParseError("score method must be quantss, csbs or csbs_mean; got '" + std::string(s) + "'");
}

DailySentimentIndex quantss(const DailySentimentCounts& counts) {
    DailySentimentIndex idx;
    idx.ticker = counts.ticker;
    idx.date = counts.date;
    idx.method = ScoreMethod::quantss;
    idx.n_docs = counts.pos + counts.neg + counts.neu;
    if (idx.n_docs == 0) {
        idx.missing = true;
        return idx;
    }
    idx.score = (static_cast<double>(counts.pos) - static_cast<double>(counts.neg)) / static_cast<double>(idx.n_docs);
    return idx;
}

double csbs_contribution(const Prediction& p) {
    if (!p.probs) throw ContractError("document '" + p.doc_id + "' has no class probabilities for CSBS");
    const ProbTriple& probs = *p.probs;
    switch (probs.argmax()) {
        case SentimentLabel::positive: return probs.pos();
        case SentimentLabel::negative: return -probs.neg();
        case SentimentLabel::neutral: {
            const double gap = probs.pos() - probs.neg();
            const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
            return sign * probs.neu();
        }
    }
    return 0.0;
}

DailySentimentIndex csbs_day(std::vector<DatedPrediction> predictions, const std::string& ticker, Date date,
                             bool normalize) {
    std::sort(predictions.begin(), predictions.end(), [](const DatedPrediction& a, const DatedPrediction& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.prediction.doc_id < b.prediction.doc_id;
    });
    DailySentimentIndex idx;
    idx.ticker = ticker;
    idx.date = date;
    idx.method = normalize ? ScoreMethod::csbs_mean : ScoreMethod::csbs;
    idx.n_docs = predictions.size();
    for (const auto& dp : predictions) idx.score += csbs_contribution(dp.prediction);
    if (idx.n_docs == 0) {
        idx.missing = true;
        idx.score = 0.0;
    } else if (normalize) {
        idx.score /= static_cast<double>(idx.n_docs);
    }
    return idx;
}

std::vector<DailySentimentIndex> build_index_series(const std::vector<Document>& docs,
                                                    const std::vector<Prediction>& predictions,
                                                    const std::string& ticker, Date first, Date last,
                                                    ScoreMethod method, const TimeZone& zone) {
    std::unordered_map<std::string_view, const Document*> doc_by_id;
    doc_by_id.reserve(docs.size());
    for (const auto& d : docs) doc_by_id.emplace(d.id, &d);

    std::unordered_map<std::string_view, const Prediction*> pred_by_id;
    pred_by_id.reserve(predictions.size());
    for (const auto& p : predictions) {
        if (!doc_by_id.contains(p.doc_id)) {
            throw ContractError("prediction for unknown document '" + p.doc_id + "'");
        }
        pred_by_id.emplace(p.doc_id, &p);
    }

    std::vector<DailySentimentIndex> series;
    if (first > last) return series;

    std::map<Date, std::vector<DatedPrediction>> buckets;
    for (const auto& d : docs) {
        if (!d.tickers.contains(ticker)) continue;
        const Date day = zone.local_date(d.timestamp);
        if (day < first || day > last) continue;
        const auto it = pred_by_id.find(d.id);
        if (it == pred_by_id.end()) throw ContractError("document '" + d.id + "' has no prediction");
        buckets[day].push_back({d.timestamp, *it->second});
    }

    for (Date day = first; day <= last; day += std::chrono::days{1}) {
        auto bucket = buckets.find(day);
        std::vector<DatedPrediction> preds;
        if (bucket != buckets.end()) preds = std::move(bucket->second);
        if (method == ScoreMethod::quantss) {
            DailySentimentCounts counts{ticker, day};
            for (const auto& dp : preds) {
                switch (dp.prediction.label) {
                    case SentimentLabel::positive: ++counts.pos; break;
                    case SentimentLabel::negative: ++counts.neg; break;
                    case SentimentLabel::neutral: ++counts.neu; break;
                }
            }
            series.push_back(quantss(counts));
        } else {
            series.push_back(csbs_day(std::move(preds), ticker, day, method == ScoreMethod::csbs_mean));
        }
    }
    return series;
}

void write_index_csv(std::ostream& out, std::span<const DailySentimentIndex> series) {
    csv::write_row(out, {"ticker", "date", "method", "score", "n_docs", "missing"});
    for (const auto& s : series) {
        csv::write_row(out, {s.ticker, format_date(s.date), std::string(to_string(s.method)), format_double(s.score),
                             std::to_string(s.n_docs), s.missing ? "true" : "false"});
    }
}

std::vector<DailySentimentIndex> read_index_csv(std::istream& in) {
    std::vector<DailySentimentIndex> out;
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) return out;
    const csv::Header header(row);
    const auto c_ticker = header.require("ticker");
    const auto c_date = header.require("date");
    const auto c_method = header.require("method");
    const auto c_score = header.require("score");
    const auto c_n = header.require("n_docs");
    const auto c_missing = header.require("missing");
    const auto width = std::max({c_ticker, c_date, c_method, c_score, c_n, c_missing}) + 1;
    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const std::string where = "index CSV line " + std::to_string(reader.record_line());
        if (row.size() < width) throw ParseError(where + ": too few fields");
        DailySentimentIndex idx;
        idx.ticker = std::string(trim(row[c_ticker]));
        idx.date = parse_date(row[c_date]);
        idx.method = score_method_from_string(row[c_method]);
        const auto score = trim(row[c_score]);
        if (std::from_chars(score.data(), score.data() + score.size(), idx.score).ptr != score.data() + score.size()) {
            throw ParseError(where + ": bad score '" + std::string(score) + "'");
        }
        const auto n = trim(row[c_n]);
        if (std::from_chars(n.data(), n.data() + n.size(), idx.n_docs).ptr != n.data() + n.size()) {
            throw ParseError(where + ": bad n_docs '" + std::string(n) + "'");
        }
        const auto missing = to_lower(trim(row[c_missing]));
        if (missing != "true" && missing != "false" && missing != "1" && missing != "0") {
            throw ParseError(where + ": missing must be true or false");
        }
        idx.missing = missing == "true" || missing == "1";
        out.push_back(std::move(idx));
    }
    return out;
}

std::vector<DailySentimentIndex> read_index_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open index file '" + path.string() + "'");
    return read_index_csv(in);
}

}  // namespace finsent
