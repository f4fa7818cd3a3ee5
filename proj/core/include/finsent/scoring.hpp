#pragma once

#include "finsent/civil_time.hpp"
#include "finsent/corpus.hpp"
#include "finsent/models.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace finsent {

/// quantss: (pos - neg) / (pos + neu + neg) over the day's labels.
/// csbs: raw confidence-score sum, one signed probability per document.
/// csbs_mean: csbs divided by the document count (not part of the original
/// method; offered for comparing days with different volumes).
enum class ScoreMethod { quantss, csbs, csbs_mean };

[[nodiscard]] std::string_view to_string(ScoreMethod m) noexcept;
[[nodiscard]] ScoreMethod score_method_from_string(std::string_view s);

struct DailySentimentCounts {
    std::string ticker;
    Date date{};
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t neu = 0;
};

struct DailySentimentIndex {
    std::string ticker;
    Date date{};
    double score = 0.0;
    std::size_t n_docs = 0;
    ScoreMethod method = ScoreMethod::quantss;
    bool missing = false;

    friend bool operator==(const DailySentimentIndex&, const DailySentimentIndex&) = default;
};

/// A day with no documents is score 0 with missing = true.
[[nodiscard]] DailySentimentIndex quantss(const DailySentimentCounts& counts);

struct DatedPrediction {
    Instant timestamp{};
    Prediction prediction;
};

/// One document's signed contribution:
///   argmax positive -> +p_pos; argmax negative -> -p_neg;
///   otherwise sign(p_pos - p_neg) * p_neu with sign(0) = 0.
/// Throws ContractError when the prediction has no probabilities.
[[nodiscard]] double csbs_contribution(const Prediction& p);

/// Sums contributions in ascending (timestamp, doc_id) order, so results are
/// bit-identical regardless of the order predictions arrive in.
[[nodiscard]] DailySentimentIndex csbs_day(std::vector<DatedPrediction> predictions, const std::string& ticker,
                                           Date date, bool normalize = false);

/// One entry per calendar date in [first, last] (empty when first > last).
/// Documents are bucketed by their local date in `zone`; only documents that
/// mention `ticker` count. Every such document needs a prediction, and every
/// prediction must name a known document.
[[nodiscard]] std::vector<DailySentimentIndex> build_index_series(const std::vector<Document>& docs,
                                                                  const std::vector<Prediction>& predictions,
                                                                  const std::string& ticker, Date first, Date last,
                                                                  ScoreMethod method,
                                                                  const TimeZone& zone = TimeZone::utc());

/// CSV `ticker,date,method,score,n_docs,missing`; scores in shortest
/// round-trip form.
void write_index_csv(std::ostream& out, std::span<const DailySentimentIndex> series);
[[nodiscard]] std::vector<DailySentimentIndex> read_index_csv(std::istream& in);
[[nodiscard]] std::vector<DailySentimentIndex> read_index_csv(const std::filesystem::path& path);

}  // namespace finsent
