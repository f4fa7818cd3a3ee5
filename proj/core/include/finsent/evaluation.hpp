#pragma once

#include "finsent/corpus.hpp"
#include "finsent/models.hpp"
#include "finsent/prompting.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace finsent {

/// Confusion matrix: rows are gold labels, columns are predicted labels with
/// a fourth column for unparseable outputs.
using Confusion = std::array<std::array<std::size_t, 4>, 3>;
inline constexpr std::size_t kUnparseableColumn = 3;

struct EvalReport {
    std::string family;   // "base", "aiap:D+G+E", "2-S", ...
    IdentifierTerm identifier = IdentifierTerm::input;
    std::string dataset;  // "all_agree", "full" or a custom tag
    std::size_t n = 0;
    std::size_t correct = 0;
    std::size_t unparseable = 0;
    double accuracy = 0.0;  // correct / n
    Confusion confusion{};

    [[nodiscard]] double accuracy_pct() const noexcept { return 100.0 * accuracy; }
};

/// A model failure persisted past the retry budget. Finished samples are in
/// the checkpoint, so a rerun resumes where this one stopped.
class EvaluationAborted : public Error {
public:
    EvaluationAborted(const std::string& what, std::size_t completed)
        : Error(what), completed_(completed) {}
    [[nodiscard]] std::size_t completed() const noexcept { return completed_; }

private:
    std::size_t completed_;
};

struct EvalOptions {
    /// Per-sample results are appended here and reused on rerun.
    std::optional<std::filesystem::path> checkpoint_dir;
    std::size_t workers = 1;
};

[[nodiscard]] EvalReport evaluate(GenerativeModel& model, const std::vector<LabeledSample>& dataset,
                                  const PromptSpec& prompt, const InstructionSpec& instruction,
                                  const std::string& dataset_tag, const EvalOptions& options = {});

struct GainEntry {
    double base_pct = 0.0;
    double aiap_pct = 0.0;
    /// Percentage points, from unrounded accuracies.
    [[nodiscard]] double gain() const noexcept { return aiap_pct - base_pct; }
};

/// Base prompt vs full AIAP (D+G+E) for one identifier.
[[nodiscard]] GainEntry compare_prompts(GenerativeModel& model, const std::vector<LabeledSample>& dataset,
                                        IdentifierTerm identifier, const InstructionSpec& instruction,
                                        const std::string& dataset_tag, const EvalOptions& options = {});

/// Evaluations for [base, D, D+G, D+G+E].
[[nodiscard]] std::array<EvalReport, 4> ablation_curve(GenerativeModel& model,
                                                       const std::vector<LabeledSample>& dataset,
                                                       IdentifierTerm identifier, const InstructionSpec& instruction,
                                                       const std::string& dataset_tag,
                                                       const EvalOptions& options = {});

/// Evaluations for [BP, 1-S, 2-S, 3-S, AIAP]; shots come from the
/// instruction examples in the order positive, negative, neutral.
[[nodiscard]] std::array<EvalReport, 5> few_shot_table(GenerativeModel& model,
                                                       const std::vector<LabeledSample>& dataset,
                                                       IdentifierTerm identifier, const InstructionSpec& instruction,
                                                       const std::string& dataset_tag,
                                                       const EvalOptions& options = {});

struct GainSummary {
    double mean = 0.0;
    double max = 0.0;
};

/// Throws ContractError on empty input.
[[nodiscard]] GainSummary mean_gain(std::span<const GainEntry> entries);

// ---------------------------------------------------------------------------
// Report tables (two decimals, percentages)

struct GainRow {
    std::string model;
    std::string dataset;
    IdentifierTerm identifier = IdentifierTerm::input;
    GainEntry entry;
};

struct FewShotRow {
    std::string dataset;
    IdentifierTerm identifier = IdentifierTerm::news;
    std::array<double, 5> accuracy_pct{};  // BP, 1-S, 2-S, 3-S, AIAP
};

struct AblationRow {
    std::string model;
    std::string dataset;
    IdentifierTerm identifier = IdentifierTerm::input;
    std::array<double, 4> accuracy_pct{};  // base, D, D+G, D+G+E
};

/// "+7.63", "-0.40", "0.00".
[[nodiscard]] std::string format_gain(double gain_pct);

void write_gain_csv(std::ostream& out, std::span<const GainRow> rows);
void write_gain_markdown(std::ostream& out, std::span<const GainRow> rows);
void write_few_shot_csv(std::ostream& out, std::span<const FewShotRow> rows);
void write_few_shot_markdown(std::ostream& out, std::span<const FewShotRow> rows);
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);
void write_ablation_markdown(std::ostream& out, std::span<const AblationRow> rows);
void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_eval_markdown(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace finsent
