#include "app.hpp"

#include <finsent/corpus.hpp>
#include <finsent/csv.hpp>
#include <finsent/evaluation.hpp>
#include <finsent/fixture_model.hpp>
#include <finsent/prediction.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace finsent::app {

using nlohmann::json;

namespace {

// Writes through a sibling temp file so readers never see partial output.
void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

class Outputs {
public:
    Outputs(const RunConfig& config, Command command, CommandResult& result)
        : config_(config), command_(command), result_(result), hash_(config.hash()) {}

    void csv(const fs::path& rel, const std::string& body, const json& extra = json::object()) {
        const fs::path path = config_.out / rel;
        write_file(path, body);
        json meta = {{"command", std::string(to_string(command_))},
                     {"config_sha256", hash_},
                     {"config", config_.to_json()}};
        for (const auto& [k, v] : extra.items()) meta[k] = v;
        write_file(path.string() + ".meta.json", meta.dump(2) + "\n");
        result_.outputs.push_back(path);
    }

    void markdown(const fs::path& rel, const std::string& title, const std::string& body) {
        const fs::path path = config_.out / rel;
        write_file(path, "# " + title + "\n\nConfig SHA-256: `" + hash_ + "`\n\n" + body);
        result_.outputs.push_back(path);
    }

private:
    const RunConfig& config_;
    Command command_;
    CommandResult& result_;
    std::string hash_;
};

template <class F>
auto parallel_map(std::size_t n, std::size_t workers, F fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out;
    out.reserve(n);
    const std::size_t width = std::max<std::size_t>(1, workers);
    for (std::size_t start = 0; start < n; start += width) {
        std::vector<std::future<R>> batch;
        const std::size_t end = std::min(n, start + width);
        for (std::size_t i = start; i < end; ++i) batch.push_back(std::async(std::launch::async, fn, i));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

std::unique_ptr<std::istream> open_input(const fs::path& path) {
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw ParseError("cannot open '" + path.string() + "'");
    return in;
}

std::vector<Document> load_corpus(const RunConfig& config, const TickerLexicon& lexicon, CommandResult& result) {
    auto in = open_input(*config.corpus);
    auto parsed = parse_corpus(*in, corpus_format_from_path(*config.corpus), lexicon);
    for (const auto& d : parsed.diagnostics) result.warnings.push_back("corpus " + d.to_string());
    return std::move(parsed.documents);
}

InstructionSpec instruction_of(const RunConfig& config) {
    return config.instruction ? InstructionSpec::load(*config.instruction) : InstructionSpec::bundled_default();
}

std::string with_summary(std::string body, const std::vector<std::string>& lines) {
    if (lines.empty()) return body;
    body += "\n";
    for (const auto& l : lines) body += l + "\n";
    return body;
}

}  // namespace

std::unique_ptr<GenerativeModel> make_generative_model(const RunConfig& config) {
    if (config.model.starts_with("fixture:")) return FixtureGenerativeModel::load(config.model.substr(8));
    if (config.model == "chat") {
        ModelEndpoint endpoint = config.endpoint;
        if (config.cache_dir) endpoint.cache_dir = config.cache_dir;
        return std::make_unique<ChatCompletionClient>(std::move(endpoint));
    }
    throw ContractError("model must be fixture:<path> or chat, got '" + config.model + "'");
}

std::unique_ptr<ProbabilisticModel> make_probabilistic_model(const RunConfig& config) {
    if (config.scorer.starts_with("fixture:")) return FixtureProbabilisticModel::load(config.scorer.substr(8));
    throw ContractError("scorer must be fixture:<path>, got '" + config.scorer + "'");
}

CommandResult cmd_ingest(const RunConfig& config) {
    config.validate(Command::ingest);
    CommandResult result;
    Outputs outputs(config, Command::ingest, result);
    const TickerLexicon lexicon(config.tickers);
    const auto docs = load_corpus(config, lexicon, result);
    const TimeZone zone = TimeZone::from_name(config.timezone);

    std::ostringstream jsonl;
    write_corpus_jsonl(jsonl, docs);
    write_file(config.out / "corpus.jsonl", jsonl.str());
    result.outputs.push_back(config.out / "corpus.jsonl");

    std::map<std::pair<std::string, Date>, std::size_t> counts;
    for (const auto& d : docs) {
        for (const auto& t : d.tickers) ++counts[{t, zone.local_date(d.timestamp)}];
    }
    std::ostringstream summary;
    csv::write_row(summary, {"ticker", "date", "n_docs"});
    for (const auto& [key, n] : counts) csv::write_row(summary, {key.first, format_date(key.second), std::to_string(n)});
    outputs.csv("summary.csv", summary.str(),
                {{"documents", docs.size()}, {"diagnostics", result.warnings.size()}});
    return result;
}

CommandResult cmd_bench(const RunConfig& config) {
    config.validate(Command::bench);
    CommandResult result;
    Outputs outputs(config, Command::bench, result);
    const InstructionSpec instruction = instruction_of(config);
    auto loaded = load_labeled_dataset(*config.dataset);
    for (const auto& d : loaded.diagnostics) result.warnings.push_back("dataset " + d.to_string());
    auto model = make_generative_model(config);
    const std::string model_name = model->identity();

    EvalOptions options;
    options.checkpoint_dir = config.out / "checkpoints";
    options.workers = config.workers;

    std::vector<EvalReport> reports;
    std::vector<GainRow> gains;
    std::vector<AblationRow> ablations;
    std::vector<FewShotRow> few_shots;
    for (const auto& tag : config.datasets) {
        const auto samples = tag == "all_agree" ? derive_all_agree(loaded.samples) : loaded.samples;
        if (samples.empty()) {
            result.warnings.push_back("dataset '" + tag + "' is empty; skipped");
            continue;
        }
        for (const auto id : config.identifiers) {
            if (config.prompt == "base") {
                reports.push_back(evaluate(*model, samples, PromptSpec{id, Components::none(), {}}, instruction, tag, options));
            } else if (config.prompt == "aiap") {
                auto base = evaluate(*model, samples, PromptSpec{id, Components::none(), {}}, instruction, tag, options);
                auto aiap = evaluate(*model, samples, PromptSpec{id, Components::dge(), {}}, instruction, tag, options);
                gains.push_back({model_name, tag, id, GainEntry{base.accuracy_pct(), aiap.accuracy_pct()}});
                reports.push_back(std::move(base));
                reports.push_back(std::move(aiap));
            } else if (config.prompt == "ablation") {
                auto curve = ablation_curve(*model, samples, id, instruction, tag, options);
                AblationRow row{model_name, tag, id, {}};
                for (std::size_t i = 0; i < curve.size(); ++i) row.accuracy_pct[i] = curve[i].accuracy_pct();
                ablations.push_back(row);
                reports.insert(reports.end(), curve.begin(), curve.end());
            } else {
                auto table = few_shot_table(*model, samples, id, instruction, tag, options);
                FewShotRow row{tag, id, {}};
                for (std::size_t i = 0; i < table.size(); ++i) row.accuracy_pct[i] = table[i].accuracy_pct();
                few_shots.push_back(row);
                reports.insert(reports.end(), table.begin(), table.end());
            }
        }
    }

    const json extra = {{"model", model_name}, {"prompt", config.prompt}};
    std::ostringstream csv_out, md;
    write_eval_csv(csv_out, reports);
    outputs.csv("eval.csv", csv_out.str(), extra);
    write_eval_markdown(md, reports);
    outputs.markdown("eval.md", "Accuracy by prompt", md.str());

    if (!gains.empty()) {
        std::ostringstream c, m;
        write_gain_csv(c, gains);
        outputs.csv("gain.csv", c.str(), extra);
        write_gain_markdown(m, gains);
        outputs.markdown("gain.md", "Base prompt vs AIAP", m.str());
    }
    if (!ablations.empty()) {
        std::ostringstream c, m;
        write_ablation_csv(c, ablations);
        outputs.csv("ablation.csv", c.str(), extra);
        write_ablation_markdown(m, ablations);
        outputs.markdown("ablation.md", "Instruction ablation", m.str());
    }
    if (!few_shots.empty()) {
        std::ostringstream c, m;
        write_few_shot_csv(c, few_shots);
        outputs.csv("fewshot.csv", c.str(), extra);
        write_few_shot_markdown(m, few_shots);
        outputs.markdown("fewshot.md", "Few-shot vs AIAP", m.str());
    }
    for (const auto& r : reports) {
        if (r.unparseable > 0) {
            result.warnings.push_back(r.dataset + "/" + std::string(to_string(r.identifier)) + "/" + r.family + ": " +
                                      std::to_string(r.unparseable) + " unparseable outputs");
        }
    }
    return result;
}

CommandResult cmd_score(const RunConfig& config) {
    config.validate(Command::score);
    CommandResult result;
    Outputs outputs(config, Command::score, result);
    const TickerLexicon lexicon(config.tickers);
    auto docs = load_corpus(config, lexicon, result);
    std::erase_if(docs, [](const Document& d) { return d.tickers.empty(); });
    const TimeZone zone = TimeZone::from_name(config.timezone);

    const bool need_probs = std::any_of(config.methods.begin(), config.methods.end(),
                                        [](ScoreMethod m) { return m != ScoreMethod::quantss; });
    if (need_probs && config.scorer.empty()) {
        throw ContractError("csbs needs class probabilities; configure a scorer");
    }

    std::vector<std::optional<Prediction>> preds;
    std::string model_name;
    if (!config.scorer.empty()) {
        auto scorer = make_probabilistic_model(config);
        model_name = scorer->identity();
        preds = parallel_map(docs.size(), config.workers, [&](std::size_t i) -> std::optional<Prediction> {
            return classify_probabilistic(*scorer, docs[i].body, docs[i].id);
        });
    } else {
        auto model = make_generative_model(config);
        model_name = model->identity();
        const InstructionSpec instruction = instruction_of(config);
        const PromptSpec spec{config.identifiers.empty() ? IdentifierTerm::input : config.identifiers.front(),
                              config.prompt == "aiap" ? Components::dge() : Components::none(), {}};
        preds = parallel_map(docs.size(), config.workers, [&](std::size_t i) -> std::optional<Prediction> {
            try {
                return classify_generative(*model, render_prompt(docs[i].body, spec, instruction), docs[i].id);
            } catch (const UnparseableOutput&) {
                return std::nullopt;
            }
        });
    }
    std::vector<Document> scored;
    std::vector<Prediction> predictions;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!preds[i]) {
            result.warnings.push_back("document '" + docs[i].id + "': unparseable model output; excluded");
            continue;
        }
        scored.push_back(std::move(docs[i]));
        predictions.push_back(std::move(*preds[i]));
    }

    std::optional<Date> first = config.first;
    std::optional<Date> last = config.last;
    if (!first || !last) {
        std::optional<Date> lo, hi;
        for (const auto& d : scored) {
            const Date day = zone.local_date(d.timestamp);
            if (!lo || day < *lo) lo = day;
            if (!hi || day > *hi) hi = day;
        }
        if (!first) first = lo;
        if (!last) last = hi;
    }

    for (const auto& ticker : lexicon.symbols()) {
        for (const auto method : config.methods) {
            std::vector<DailySentimentIndex> series;
            if (first && last) {
                series = build_index_series(scored, predictions, ticker, *first, *last, method, zone);
            }
            std::ostringstream body;
            write_index_csv(body, series);
            outputs.csv(fs::path("index") / (ticker + "_" + std::string(to_string(method)) + ".csv"), body.str(),
                        {{"model", model_name}, {"ticker", ticker}, {"method", std::string(to_string(method))}});
        }
    }
    return result;
}

CommandResult cmd_predict(const RunConfig& config) {
    config.validate(Command::predict);
    CommandResult result;
    Outputs outputs(config, Command::predict, result);

    std::vector<std::pair<std::string, fs::path>> index_files = config.index;
    if (index_files.empty()) {
        const fs::path dir = config.out / "index";
        if (fs::is_directory(dir)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(dir)) {
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            for (auto& p : found) index_files.emplace_back("", std::move(p));
        }
    }

    // variant -> ticker -> series
    std::map<std::string, std::map<std::string, std::vector<DailySentimentIndex>>> series;
    std::vector<std::string> found_variants;
    for (const auto& [name, path] : index_files) {
        for (auto& entry : read_index_csv(path)) {
            const std::string variant = name.empty() ? std::string(to_string(entry.method)) : name;
            if (!series.contains(variant)) found_variants.push_back(variant);
            series[variant][entry.ticker].push_back(std::move(entry));
        }
    }

    ExperimentConfig experiment;
    experiment.boundary = config.split;
    experiment.workers = static_cast<unsigned>(config.workers);
    for (double lambda : config.ridge) experiment.regressors.push_back(linear_regressor_spec(lambda));
    if (config.variants.empty()) {
        experiment.variants.emplace_back(kBaselineVariant);
        std::sort(found_variants.begin(), found_variants.end());
        experiment.variants.insert(experiment.variants.end(), found_variants.begin(), found_variants.end());
    } else {
        experiment.variants = config.variants;
    }
    for (const auto& [ticker, path] : config.prices) {
        if (!config.tickers.empty() &&
            std::find(config.tickers.begin(), config.tickers.end(), ticker) == config.tickers.end()) {
            continue;
        }
        StockInput stock{ticker, load_bars(path), {}};
        for (const auto& [variant, by_ticker] : series) {
            if (auto it = by_ticker.find(ticker); it != by_ticker.end()) stock.variants.push_back({variant, it->second});
        }
        experiment.stocks.push_back(std::move(stock));
    }
    if (experiment.stocks.empty()) throw ContractError("no stocks selected for prediction");

    const ExperimentReport report = run_experiment(experiment);

    json regressors = json::array();
    for (const auto& r : report.regressors) regressors.push_back({{"name", r.name}, {"params", r.params}});
    const json extra = {{"regressors", regressors}, {"split", format_date(report.boundary)}};

    std::ostringstream reg_csv, reg_md;
    write_regression_csv(reg_csv, report);
    outputs.csv("regression.csv", reg_csv.str(), extra);
    write_regression_markdown(reg_md, report);
    std::vector<std::string> notes{"Split: train <= " + format_date(report.boundary) + ", test after."};
    for (const auto& r : report.regressors) notes.push_back("Regressor " + r.name + ": " + r.params);
    outputs.markdown("regression.md", "Averaged RMSE and MAE", with_summary(reg_md.str(), notes));

    if (!report.improvements.empty()) {
        std::ostringstream imp_csv, imp_md;
        write_improvement_csv(imp_csv, report);
        outputs.csv("improvement.csv", imp_csv.str(), extra);
        write_improvement_markdown(imp_md, report);
        outputs.markdown("improvement.md", "Improvement over baseline, RMSE % (MAE %)", imp_md.str());
    }
    for (const auto& cell : report.cells) {
        if (!cell.ok()) result.warnings.push_back(cell.ticker + "/" + cell.variant + ": " + cell.error);
        for (const auto& w : cell.warnings) result.warnings.push_back(cell.ticker + "/" + cell.variant + ": " + w);
        if (cell.rows.empty()) continue;
        std::ostringstream rows;
        write_feature_rows_csv(rows, cell.rows);
        outputs.csv(fs::path("features") / (cell.ticker + "_" + cell.variant + ".csv"), rows.str(),
                    {{"ticker", cell.ticker}, {"variant", cell.variant}});
    }
    return result;
}

CommandResult cmd_report(const RunConfig& config) {
    config.validate(Command::report);
    CommandResult result;
    if (!fs::is_directory(config.out)) throw ContractError("output directory '" + config.out.string() + "' does not exist");
    std::vector<fs::path> parts;
    for (const auto& e : fs::directory_iterator(config.out)) {
        if (e.is_regular_file() && e.path().extension() == ".md" && e.path().filename() != "report.md") {
            parts.push_back(e.path());
        }
    }
    std::sort(parts.begin(), parts.end());
    std::string body;
    for (const auto& p : parts) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        std::string section = text.str();
        // Demote headings one level so the sections nest under the report title.
        std::string demoted;
        std::istringstream lines(section);
        for (std::string line; std::getline(lines, line);) {
            demoted += (line.starts_with("#") ? "#" + line : line) + "\n";
        }
        body += demoted + "\n";
    }
    if (parts.empty()) body = "No reports found.\n";
    Outputs(config, Command::report, result).markdown("report.md", "finsent report", body);
    return result;
}

CommandResult run(Command command, const RunConfig& config) {
    switch (command) {
        case Command::ingest: return cmd_ingest(config);
        case Command::bench: return cmd_bench(config);
        case Command::score: return cmd_score(config);
        case Command::predict: return cmd_predict(config);
        case Command::report: return cmd_report(config);
    }
    throw ContractError("unknown command");
}

}  // namespace finsent::app
