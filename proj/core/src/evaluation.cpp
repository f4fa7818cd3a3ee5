#include "finsent/evaluation.hpp"

#include "finsent/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace finsent {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool done = false;
    std::optional<SentimentLabel> predicted;  // nullopt = unparseable
};

std::string sanitize(std::string s) {
    for (auto& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return s;
}

class Checkpoint {
public:
    explicit Checkpoint(fs::path path) : path_(std::move(path)) {
        fs::create_directories(path_.parent_path());
        std::ifstream in(path_, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            // A torn final line from a killed run is simply ignored.
            try {
                const json j = json::parse(line);
                Outcome o;
                o.done = true;
                if (!j.at("pred").is_null()) o.predicted = label_from_string(j.at("pred").get<std::string>());
                entries_[{j.at("id").get<std::string>(), j.at("prompt_sha256").get<std::string>()}] = o;
            } catch (const json::exception&) {
            }
        }
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw Error("cannot open checkpoint " + path_.string());
    }

    [[nodiscard]] std::optional<Outcome> find(const std::string& id, const std::string& hash) const {
        if (auto it = entries_.find({id, hash}); it != entries_.end()) return it->second;
        return std::nullopt;
    }

    void record(const std::string& id, const std::string& hash, const Outcome& o, const std::string& raw) {
        if (!out_.is_open()) return;
        json j = {{"id", id}, {"prompt_sha256", hash}, {"raw", raw}};
        j["pred"] = o.predicted ? json(std::string(to_string(*o.predicted))) : json(nullptr);
        const std::lock_guard lock(mutex_);
        out_ << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        out_.flush();
    }

private:
    fs::path path_;
    std::map<std::pair<std::string, std::string>, Outcome> entries_;
    std::ofstream out_;
    std::mutex mutex_;
};

EvalReport fold(const std::vector<LabeledSample>& dataset, const std::vector<Outcome>& outcomes) {
    EvalReport r;
    r.n = dataset.size();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto gold = index_of(dataset[i].gold);
        const auto& o = outcomes[i];
        if (!o.predicted) {
            ++r.unparseable;
            ++r.confusion[gold][kUnparseableColumn];
            continue;
        }
        ++r.confusion[gold][index_of(*o.predicted)];
        if (*o.predicted == dataset[i].gold) ++r.correct;
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n);
    return r;
}

PromptSpec aiap_spec(IdentifierTerm identifier, Components c) {
    PromptSpec spec;
    spec.identifier = identifier;
    spec.components = c;
    return spec;
}

}  // namespace

EvalReport evaluate(GenerativeModel& model, const std::vector<LabeledSample>& dataset, const PromptSpec& prompt,
                    const InstructionSpec& instruction, const std::string& dataset_tag, const EvalOptions& options) {
    if (dataset.empty()) throw ContractError("cannot evaluate on an empty dataset");
    prompt.validate();

    std::optional<Checkpoint> ck;
    if (options.checkpoint_dir) {
        ck.emplace(*options.checkpoint_dir / (sanitize(dataset_tag) + "__" + std::string(to_string(prompt.identifier)) +
                                              "__" + sanitize(prompt.family_tag()) + ".jsonl"));
    }

    std::vector<Outcome> outcomes(dataset.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= dataset.size()) return;
            try {
                const auto& sample = dataset[i];
                const PromptText text = render_prompt(sample.text, prompt, instruction);
                const std::string hash = sha256_hex(text.rendered());
                if (ck) {
                    if (auto prior = ck->find(sample.id, hash)) {
                        outcomes[i] = *prior;
                        continue;
                    }
                }
                Outcome o;
                o.done = true;
                std::string raw;
                try {
                    Prediction p = classify_generative(model, text, sample.id);
                    o.predicted = p.label;
                    raw = p.raw.value_or("");
                } catch (const UnparseableOutput& e) {
                    raw = e.raw();
                }
                if (ck) ck->record(sample.id, hash, o, raw);
                outcomes[i] = o;
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, dataset.size());
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    if (failure) {
        const auto completed = static_cast<std::size_t>(
            std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.done; }));
        try {
            std::rethrow_exception(failure);
        } catch (const Error& e) {
            throw EvaluationAborted(std::string("evaluation aborted: ") + e.what(), completed);
        }
    }

    EvalReport report = fold(dataset, outcomes);
    report.family = prompt.family_tag();
    report.identifier = prompt.identifier;
    report.dataset = dataset_tag;
    return report;
}

GainEntry compare_prompts(GenerativeModel& model, const std::vector<LabeledSample>& dataset, IdentifierTerm identifier,
                          const InstructionSpec& instruction, const std::string& dataset_tag,
                          const EvalOptions& options) {
    const auto base = evaluate(model, dataset, aiap_spec(identifier, Components::none()), instruction, dataset_tag, options);
    const auto aiap = evaluate(model, dataset, aiap_spec(identifier, Components::dge()), instruction, dataset_tag, options);
    return {base.accuracy_pct(), aiap.accuracy_pct()};
}

std::array<EvalReport, 4> ablation_curve(GenerativeModel& model, const std::vector<LabeledSample>& dataset,
                                         IdentifierTerm identifier, const InstructionSpec& instruction,
                                         const std::string& dataset_tag, const EvalOptions& options) {
    instruction.validate();
    constexpr std::array<Components, 4> steps{Components::none(), Components::d(), Components::dg(), Components::dge()};
    std::array<EvalReport, 4> out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out[i] = evaluate(model, dataset, aiap_spec(identifier, steps[i]), instruction, dataset_tag, options);
    }
    return out;
}

std::array<EvalReport, 5> few_shot_table(GenerativeModel& model, const std::vector<LabeledSample>& dataset,
                                         IdentifierTerm identifier, const InstructionSpec& instruction,
                                         const std::string& dataset_tag, const EvalOptions& options) {
    instruction.validate();
    std::array<EvalReport, 5> out;
    out[0] = evaluate(model, dataset, aiap_spec(identifier, Components::none()), instruction, dataset_tag, options);
    for (std::size_t k = 1; k <= 3; ++k) {
        PromptSpec spec;
        spec.identifier = identifier;
        spec.shots = shots_from_spec(instruction, k);
        out[k] = evaluate(model, dataset, spec, instruction, dataset_tag, options);
    }
    out[4] = evaluate(model, dataset, aiap_spec(identifier, Components::dge()), instruction, dataset_tag, options);
    return out;
}

GainSummary mean_gain(std::span<const GainEntry> entries) {
    if (entries.empty()) throw ContractError("mean gain of an empty set is undefined");
    GainSummary s;
    double sum = 0.0;
    s.max = entries.front().gain();
    for (const auto& e : entries) {
        sum += e.gain();
        s.max = std::max(s.max, e.gain());
    }
    s.mean = sum / static_cast<double>(entries.size());
    return s;
}

// ---------------------------------------------------------------------------

std::string format_gain(double gain_pct) {
    std::string s = format_fixed(gain_pct, 2);
    if (s.front() != '-' && s != "0.00") s.insert(s.begin(), '+');
    return s;
}

void write_gain_csv(std::ostream& out, std::span<const GainRow> rows) {
    csv::write_row(out, {"model", "dataset", "identifier", "base_prompt", "aiap", "gain"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.model, r.dataset, std::string(to_string(r.identifier)), format_fixed(r.entry.base_pct, 2),
                             format_fixed(r.entry.aiap_pct, 2), format_gain(r.entry.gain())});
    }
}

void write_gain_markdown(std::ostream& out, std::span<const GainRow> rows) {
    out << "| Model | Dataset | Identifier | Base-Prompt | AIAP | Gain |\n";
    out << "|---|---|---|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out << "| " << r.model << " | " << r.dataset << " | " << to_string(r.identifier) << " | "
            << format_fixed(r.entry.base_pct, 2) << " | " << format_fixed(r.entry.aiap_pct, 2) << " | "
            << format_gain(r.entry.gain()) << " |\n";
    }
    if (!rows.empty()) {
        std::vector<GainEntry> entries;
        for (const auto& r : rows) entries.push_back(r.entry);
        const auto s = mean_gain(entries);
        out << "\nMean gain: " << format_gain(s.mean) << " points; max gain: " << format_gain(s.max) << " points.\n";
    }
}

void write_few_shot_csv(std::ostream& out, std::span<const FewShotRow> rows) {
    csv::write_row(out, {"dataset", "identifier", "BP", "1-S", "2-S", "3-S", "AIAP"});
    for (const auto& r : rows) {
        csv::Row row{r.dataset, std::string(to_string(r.identifier))};
        for (double a : r.accuracy_pct) row.push_back(format_fixed(a, 2));
        csv::write_row(out, row);
    }
}

void write_few_shot_markdown(std::ostream& out, std::span<const FewShotRow> rows) {
    out << "| Dataset | Identifier | BP | 1-S | 2-S | 3-S | AIAP |\n";
    out << "|---|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out << "| " << r.dataset << " | " << to_string(r.identifier);
        for (double a : r.accuracy_pct) out << " | " << format_fixed(a, 2);
        out << " |\n";
    }
    out << "\nShot order: positive, negative, neutral (truncated to k).\n";
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
    csv::write_row(out, {"model", "dataset", "identifier", "base", "D", "D+G", "D+G+E"});
    for (const auto& r : rows) {
        csv::Row row{r.model, r.dataset, std::string(to_string(r.identifier))};
        for (double a : r.accuracy_pct) row.push_back(format_fixed(a, 2));
        csv::write_row(out, row);
    }
}

void write_ablation_markdown(std::ostream& out, std::span<const AblationRow> rows) {
    out << "| Model | Dataset | Identifier | Base | D | D+G | D+G+E |\n";
    out << "|---|---|---|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out << "| " << r.model << " | " << r.dataset << " | " << to_string(r.identifier);
        for (double a : r.accuracy_pct) out << " | " << format_fixed(a, 2);
        out << " |\n";
    }
}

void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports) {
    csv::Row header{"family", "identifier", "dataset", "n", "correct", "accuracy", "unparseable"};
    for (auto g : kAllLabels) {
        for (auto p : kAllLabels) header.push_back(std::string(to_string(g)) + "->" + std::string(to_string(p)));
        header.push_back(std::string(to_string(g)) + "->unparseable");
    }
    csv::write_row(out, header);
    for (const auto& r : reports) {
        csv::Row row{r.family, std::string(to_string(r.identifier)), r.dataset, std::to_string(r.n),
                     std::to_string(r.correct), format_fixed(r.accuracy_pct(), 2), std::to_string(r.unparseable)};
        for (const auto& gold_row : r.confusion) {
            for (auto c : gold_row) row.push_back(std::to_string(c));
        }
        csv::write_row(out, row);
    }
}

void write_eval_markdown(std::ostream& out, std::span<const EvalReport> reports) {
    out << "| Prompt | Identifier | Dataset | n | Correct | Accuracy | Unparseable |\n";
    out << "|---|---|---|---:|---:|---:|---:|\n";
    for (const auto& r : reports) {
        out << "| " << r.family << " | " << to_string(r.identifier) << " | " << r.dataset << " | " << r.n << " | "
            << r.correct << " | " << format_fixed(r.accuracy_pct(), 2) << " | " << r.unparseable << " |\n";
    }
}

}  // namespace finsent
