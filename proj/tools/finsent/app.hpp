#pragma once

#include <finsent/chat_client.hpp>
#include <finsent/civil_time.hpp>
#include <finsent/prompting.hpp>
#include <finsent/scoring.hpp>

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace finsent::app {

namespace fs = std::filesystem;

enum class Command { ingest, bench, score, predict, report };

[[nodiscard]] std::string_view to_string(Command c) noexcept;

/// Resolved settings for one command run. Loaded from a JSON document, then
/// overridden by command-line flags.
struct RunConfig {
    std::optional<fs::path> corpus;
    std::optional<fs::path> dataset;
    std::optional<fs::path> instruction;
    std::optional<fs::path> cache_dir;
    std::map<std::string, fs::path> prices;                  // ticker -> OHLCV CSV
    std::vector<std::pair<std::string, fs::path>> index;     // variant (may be blank) -> index CSV

    std::string model;   // generative: "fixture:<path>" or "chat"
    std::string scorer;  // probabilistic: "fixture:<path>"
    ModelEndpoint endpoint;

    std::vector<std::string> tickers;
    std::string timezone = "US/Eastern";
    std::optional<Date> first;
    std::optional<Date> last;
    Date split = parse_date("2021-12-31");

    std::string prompt = "aiap";  // base | aiap | ablation | fewshot
    std::vector<IdentifierTerm> identifiers{IdentifierTerm::input};
    std::vector<std::string> datasets{"all_agree", "full"};
    std::vector<ScoreMethod> methods{ScoreMethod::quantss, ScoreMethod::csbs};
    std::vector<std::string> variants;  // empty: baseline plus every index variant
    std::vector<double> ridge{0.0};
    std::size_t workers = 4;
    fs::path out = "out";

    /// Relative paths in the document resolve against `base_dir`.
    [[nodiscard]] static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
    [[nodiscard]] static RunConfig load(const fs::path& path);

    [[nodiscard]] nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON form; embedded in every report.
    [[nodiscard]] std::string hash() const;

    /// Throws ContractError when a path the command needs is missing or the
    /// date range is reversed.
    void validate(Command command) const;
};

struct CommandResult {
    int exit_code = 0;
    std::vector<fs::path> outputs;
    std::vector<std::string> warnings;
};

[[nodiscard]] std::unique_ptr<GenerativeModel> make_generative_model(const RunConfig& config);
[[nodiscard]] std::unique_ptr<ProbabilisticModel> make_probabilistic_model(const RunConfig& config);

/// Normalized corpus.jsonl plus summary.csv (ticker, date, n_docs).
CommandResult cmd_ingest(const RunConfig& config);
/// Accuracy reports for the selected prompt family, identifiers and datasets.
CommandResult cmd_bench(const RunConfig& config);
/// One index CSV per (ticker, method) under <out>/index.
CommandResult cmd_score(const RunConfig& config);
/// Regression and improvement reports; index files default to <out>/index.
CommandResult cmd_predict(const RunConfig& config);
/// Collects the Markdown reports under <out> into report.md.
CommandResult cmd_report(const RunConfig& config);

CommandResult run(Command command, const RunConfig& config);

}  // namespace finsent::app
