#pragma once

#include "finsent/civil_time.hpp"
#include "finsent/common.hpp"

#include <array>
#include <filesystem>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace finsent {

enum class DocKind { post, comment };

[[nodiscard]] std::string_view to_string(DocKind k) noexcept;

struct Document {
    std::string id;
    Instant timestamp{};
    DocKind kind = DocKind::post;
    std::string body;
    std::set<std::string> tickers;

    friend bool operator==(const Document&, const Document&) = default;
};

/// Validated set of ticker symbols (uppercase A-Z, 1 to 5 letters).
class TickerLexicon {
public:
    TickerLexicon() = default;
    TickerLexicon(std::initializer_list<std::string_view> symbols);
    explicit TickerLexicon(const std::vector<std::string>& symbols);

    /// Parses a comma-separated list such as "GME,AMC,SPY".
    [[nodiscard]] static TickerLexicon parse(std::string_view csv_list);

    [[nodiscard]] bool contains(std::string_view symbol) const;
    [[nodiscard]] bool empty() const noexcept { return symbols_.empty(); }
    [[nodiscard]] const std::set<std::string, std::less<>>& symbols() const noexcept { return symbols_; }

private:
    void add(std::string_view symbol);
    std::set<std::string, std::less<>> symbols_;
};

/// Cashtags ("$gme") match case-insensitively; bare mentions must be an exact
/// uppercase token bounded by non-alphanumeric characters. Bytes outside
/// ASCII count as boundaries so "GME🚀" still matches.
[[nodiscard]] std::set<std::string> detect_tickers(std::string_view text, const TickerLexicon& lexicon);

enum class CorpusFormat { jsonl, csv };

[[nodiscard]] CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

struct CorpusParseResult {
    std::vector<Document> documents;
    std::vector<Diagnostic> diagnostics;
};

/// Parses a corpus stream. Malformed records and duplicate ids are reported
/// as diagnostics and skipped; input order of accepted records is preserved.
/// CSV input needs a header with id, ts, kind and body columns.
[[nodiscard]] CorpusParseResult parse_corpus(std::istream& in, CorpusFormat format,
                                             const TickerLexicon& lexicon);

/// Writes one JSON object per document (id, ts, kind, body, tickers).
void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs);

// ---------------------------------------------------------------------------
// Labeled datasets

enum class Agreement { unanimous, resolved };

struct LabeledSample {
    std::string id;
    std::string text;
    SentimentLabel gold = SentimentLabel::neutral;
    Agreement agreement = Agreement::resolved;
    /// First-round annotations; empty when the source does not carry them.
    std::vector<SentimentLabel> round1;
};

struct DatasetLoadResult {
    std::vector<LabeledSample> samples;
    std::vector<Diagnostic> diagnostics;
};

/// CSV with header `id,text,label[,ann1,ann2,...]`. Every column after
/// `label` is read as a first-round annotation; blank cells are ignored.
[[nodiscard]] DatasetLoadResult load_labeled_dataset(std::istream& in);
[[nodiscard]] DatasetLoadResult load_labeled_dataset(const std::filesystem::path& path);

[[nodiscard]] std::vector<LabeledSample> derive_all_agree(const std::vector<LabeledSample>& full);

struct DatasetStats {
    std::size_t total = 0;
    std::array<std::size_t, 3> counts{};  // indexed by SentimentLabel
    std::array<double, 3> fractions{};

    [[nodiscard]] double fraction(SentimentLabel l) const { return fractions[index_of(l)]; }
};

/// Throws ContractError on empty input.
[[nodiscard]] DatasetStats class_distribution(const std::vector<LabeledSample>& samples);

struct RawAnnotation {
    std::string id;
    std::string text;
    bool relevant = true;
    std::vector<SentimentLabel> round1;
    std::vector<SentimentLabel> resolution;
};

struct RejectedSample {
    std::string id;
    std::string reason;
};

struct ResolveResult {
    std::vector<LabeledSample> samples;
    std::vector<RejectedSample> rejects;
    std::size_t dropped_irrelevant = 0;
};

/// Majority vote over all recorded annotations. Samples still tied after
/// every round go to `rejects`.
[[nodiscard]] ResolveResult resolve_labels(const std::vector<RawAnnotation>& rounds);

}  // namespace finsent
