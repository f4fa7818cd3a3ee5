#include "finsent/corpus.hpp"

#include "finsent/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace finsent {

using nlohmann::json;

namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool is_ascii_alpha(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

DocKind parse_kind(std::string_view s) {
    const auto k = to_lower(trim(s));
    if (k == "post") return DocKind::post;
    if (k == "comment") return DocKind::comment;
    throw ParseError("kind must be \"post\" or \"comment\", got \"" + std::string(s) + "\"");
}

Document make_document(std::string id, std::string_view ts, std::string_view kind, std::string body,
                       const TickerLexicon& lexicon) {
    if (id.empty()) throw ParseError("empty id");
    Document doc;
    doc.id = std::move(id);
    doc.timestamp = parse_rfc3339(ts);
    doc.kind = parse_kind(kind);
    doc.body = std::move(body);
    doc.tickers = detect_tickers(doc.body, lexicon);
    return doc;
}

std::string require_string(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

void parse_jsonl(std::istream& in, const TickerLexicon& lexicon, std::vector<Document>& out,
                 std::vector<std::pair<std::size_t, std::string>>& errors) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            const json obj = json::parse(line);
            if (!obj.is_object()) throw ParseError("record is not a JSON object");
            out.push_back(make_document(require_string(obj, "id"), require_string(obj, "ts"),
                                        require_string(obj, "kind"), require_string(obj, "body"), lexicon));
            errors.emplace_back(lineno, std::string{});
        } catch (const json::exception& e) {
            errors.emplace_back(lineno, std::string("invalid JSON: ") + e.what());
        } catch (const Error& e) {
            errors.emplace_back(lineno, e.what());
        }
    }
}

void parse_csv(std::istream& in, const TickerLexicon& lexicon, std::vector<Document>& out,
               std::vector<std::pair<std::size_t, std::string>>& errors) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) return;
    const csv::Header header(row);
    const auto c_id = header.require("id");
    const auto c_ts = header.require("ts");
    const auto c_kind = header.require("kind");
    const auto c_body = header.require("body");
    const auto width = std::max({c_id, c_ts, c_kind, c_body}) + 1;
    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        try {
            if (row.size() < width) throw ParseError("expected at least " + std::to_string(width) + " fields");
            out.push_back(make_document(row[c_id], row[c_ts], row[c_kind], row[c_body], lexicon));
            errors.emplace_back(reader.record_line(), std::string{});
        } catch (const Error& e) {
            errors.emplace_back(reader.record_line(), e.what());
        }
    }
}

}  // namespace

std::string_view to_string(DocKind k) noexcept {
    return k == DocKind::post ? "post" : "comment";
}

TickerLexicon::TickerLexicon(std::initializer_list<std::string_view> symbols) {
    for (auto s : symbols) add(s);
}

TickerLexicon::TickerLexicon(const std::vector<std::string>& symbols) {
    for (const auto& s : symbols) add(s);
}

TickerLexicon TickerLexicon::parse(std::string_view csv_list) {
    TickerLexicon lex;
    for (const auto& part : split(csv_list, ',')) {
        const auto sym = trim(part);
        if (!sym.empty()) lex.add(sym);
    }
    return lex;
}

void TickerLexicon::add(std::string_view symbol) {
    if (symbol.empty() || symbol.size() > 5 ||
        !std::all_of(symbol.begin(), symbol.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
        throw ParseError("ticker symbols must be 1-5 uppercase letters, got '" + std::string(symbol) + "'");
    }
    symbols_.emplace(symbol);
}

bool TickerLexicon::contains(std::string_view symbol) const {
    return symbols_.find(symbol) != symbols_.end();
}

std::set<std::string> detect_tickers(std::string_view text, const TickerLexicon& lexicon) {
    std::set<std::string> found;
    const auto n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!is_ascii_alnum(c)) {
            if (c == '$' && i + 1 < n && is_ascii_alpha(static_cast<unsigned char>(text[i + 1]))) {
                std::size_t j = i + 1;
                while (j < n && is_ascii_alnum(static_cast<unsigned char>(text[j]))) ++j;
                const auto token = text.substr(i + 1, j - i - 1);
                if (token.size() <= 5 && std::all_of(token.begin(), token.end(), [](char ch) {
                        return is_ascii_alpha(static_cast<unsigned char>(ch));
                    })) {
                    const auto upper = to_upper(token);
                    if (lexicon.contains(upper)) found.insert(upper);
                }
                i = j;
                continue;
            }
            ++i;
            continue;
        }
        // Start of a bare alphanumeric token (preceded by a boundary).
        std::size_t j = i;
        while (j < n && is_ascii_alnum(static_cast<unsigned char>(text[j]))) ++j;
        const auto token = text.substr(i, j - i);
        if (lexicon.contains(token)) found.emplace(token);
        i = j;
    }
    return found;
}

CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
    const auto ext = to_lower(path.extension().string());
    if (ext == ".csv") return CorpusFormat::csv;
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return CorpusFormat::jsonl;
    throw ParseError("cannot infer corpus format from '" + path.string() + "' (use .jsonl or .csv)");
}

CorpusParseResult parse_corpus(std::istream& in, CorpusFormat format, const TickerLexicon& lexicon) {
    std::vector<Document> parsed;
    // One entry per record in input order: empty message = accepted, the
    // next element of `parsed` belongs to it.
    std::vector<std::pair<std::size_t, std::string>> records;
    if (format == CorpusFormat::jsonl) {
        parse_jsonl(in, lexicon, parsed, records);
    } else {
        parse_csv(in, lexicon, parsed, records);
    }

    CorpusParseResult result;
    result.documents.reserve(parsed.size());
    std::unordered_set<std::string> seen;
    std::size_t next = 0;
    for (auto& [line, message] : records) {
        if (!message.empty()) {
            result.diagnostics.push_back({line, std::move(message)});
            continue;
        }
        Document& doc = parsed[next++];
        if (!seen.insert(doc.id).second) {
            result.diagnostics.push_back({line, "duplicate id '" + doc.id + "' rejected"});
            continue;
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& doc : docs) {
        json obj;
        obj["id"] = doc.id;
        obj["ts"] = format_rfc3339(doc.timestamp);
        obj["kind"] = std::string(to_string(doc.kind));
        obj["body"] = doc.body;
        obj["tickers"] = doc.tickers;
        out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

// ---------------------------------------------------------------------------

DatasetLoadResult load_labeled_dataset(std::istream& in) {
    DatasetLoadResult result;
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) return result;
    const csv::Header header(row);
    const auto c_id = header.require("id");
    const auto c_text = header.require("text");
    const auto c_label = header.require("label");
    const auto width = std::max({c_id, c_text, c_label}) + 1;

    std::unordered_set<std::string> seen;
    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const auto line = reader.record_line();
        if (row.size() < width) {
            result.diagnostics.push_back({line, "expected at least " + std::to_string(width) + " fields"});
            continue;
        }
        LabeledSample s;
        s.id = std::string(trim(row[c_id]));
        s.text = row[c_text];
        if (s.id.empty()) {
            result.diagnostics.push_back({line, "missing id"});
            continue;
        }
        if (trim(s.text).empty()) {
            result.diagnostics.push_back({line, "missing text for sample '" + s.id + "'"});
            continue;
        }
        const auto gold = label_from_string(row[c_label]);
        if (!gold) {
            result.diagnostics.push_back({line, "unknown label '" + row[c_label] + "'"});
            continue;
        }
        s.gold = *gold;

        bool bad_annotation = false;
        for (std::size_t col = c_label + 1; col < row.size(); ++col) {
            if (trim(row[col]).empty()) continue;
            const auto ann = label_from_string(row[col]);
            if (!ann) {
                result.diagnostics.push_back({line, "unknown annotation label '" + row[col] + "'"});
                bad_annotation = true;
                break;
            }
            s.round1.push_back(*ann);
        }
        if (bad_annotation) continue;

        if (s.round1.size() >= 2) {
            const bool all_equal = std::all_of(s.round1.begin(), s.round1.end(),
                                               [&](SentimentLabel l) { return l == s.round1.front(); });
            if (all_equal && s.round1.front() != s.gold) {
                result.diagnostics.push_back({line, "gold label disagrees with unanimous annotations for '" + s.id + "'"});
                continue;
            }
            s.agreement = all_equal ? Agreement::unanimous : Agreement::resolved;
        } else {
            s.round1.clear();
            s.agreement = Agreement::resolved;
        }
        if (!seen.insert(s.id).second) {
            result.diagnostics.push_back({line, "duplicate id '" + s.id + "' rejected"});
            continue;
        }
        result.samples.push_back(std::move(s));
    }
    return result;
}

DatasetLoadResult load_labeled_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
    return load_labeled_dataset(in);
}

std::vector<LabeledSample> derive_all_agree(const std::vector<LabeledSample>& full) {
    std::vector<LabeledSample> out;
    std::copy_if(full.begin(), full.end(), std::back_inserter(out),
                 [](const LabeledSample& s) { return s.agreement == Agreement::unanimous; });
    return out;
}

DatasetStats class_distribution(const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw ContractError("class distribution of an empty dataset is undefined");
    DatasetStats stats;
    stats.total = samples.size();
    for (const auto& s : samples) ++stats.counts[index_of(s.gold)];
    for (std::size_t i = 0; i < 3; ++i) {
        stats.fractions[i] = static_cast<double>(stats.counts[i]) / static_cast<double>(stats.total);
    }
    return stats;
}

ResolveResult resolve_labels(const std::vector<RawAnnotation>& rounds) {
    ResolveResult result;
    for (const auto& raw : rounds) {
        if (!raw.relevant) {
            ++result.dropped_irrelevant;
            continue;
        }
        if (raw.round1.size() < 2) {
            result.rejects.push_back({raw.id, "fewer than two first-round annotations"});
            continue;
        }
        LabeledSample s;
        s.id = raw.id;
        s.text = raw.text;
        s.round1 = raw.round1;
        const bool unanimous = std::all_of(raw.round1.begin(), raw.round1.end(),
                                           [&](SentimentLabel l) { return l == raw.round1.front(); });
        if (unanimous) {
            s.gold = raw.round1.front();
            s.agreement = Agreement::unanimous;
            result.samples.push_back(std::move(s));
            continue;
        }
        if (raw.resolution.empty()) {
            result.rejects.push_back({raw.id, "conflicting annotations without a resolution round"});
            continue;
        }
        std::array<std::size_t, 3> votes{};
        for (auto l : raw.round1) ++votes[index_of(l)];
        for (auto l : raw.resolution) ++votes[index_of(l)];
        const auto top = *std::max_element(votes.begin(), votes.end());
        if (std::count(votes.begin(), votes.end(), top) > 1) {
            result.rejects.push_back({raw.id, "tie after all annotation rounds"});
            continue;
        }
        s.gold = static_cast<SentimentLabel>(std::find(votes.begin(), votes.end(), top) - votes.begin());
        s.agreement = Agreement::resolved;
        result.samples.push_back(std::move(s));
    }
    return result;
}

}  // namespace finsent
