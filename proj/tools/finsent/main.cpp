#include "app.hpp"

#include <finsent/evaluation.hpp>

#include <CLI11.hpp>

#include <iostream>

using finsent::app::Command;
using finsent::app::RunConfig;

namespace {

// Flag values as typed; applied over the config file after parsing.
struct Flags {
    std::string config;
    std::string out;
    std::size_t workers = 0;
    std::string timezone;
    std::string corpus;
    std::string dataset;
    std::string instruction;
    std::string cache_dir;
    std::string model;
    std::string scorer;
    std::string endpoint_url;
    std::string endpoint_model;
    std::string auth_env;
    int max_retries = -1;
    std::string tickers;
    std::string from;
    std::string to;
    std::string prompt;
    std::vector<std::string> identifiers;
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::string> prices;
    std::vector<std::string> index;
    std::string split;
    std::vector<double> ridge;
    std::string variants;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& part : finsent::split(s, ',')) {
        const auto t = finsent::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    if (!f.out.empty()) c.out = f.out;
    if (f.workers > 0) c.workers = f.workers;
    if (!f.timezone.empty()) c.timezone = f.timezone;
    if (!f.corpus.empty()) c.corpus = f.corpus;
    if (!f.dataset.empty()) c.dataset = f.dataset;
    if (!f.instruction.empty()) c.instruction = f.instruction;
    if (!f.cache_dir.empty()) c.cache_dir = f.cache_dir;
    if (!f.model.empty()) c.model = f.model;
    if (!f.scorer.empty()) c.scorer = f.scorer;
    if (!f.endpoint_url.empty()) c.endpoint.base_url = f.endpoint_url;
    if (!f.endpoint_model.empty()) c.endpoint.model_name = f.endpoint_model;
    if (!f.auth_env.empty()) c.endpoint.auth_env = f.auth_env;
    if (f.max_retries >= 0) c.endpoint.max_retries = f.max_retries;
    if (!f.tickers.empty()) c.tickers = split_list(f.tickers);
    if (!f.from.empty()) c.first = finsent::parse_date(f.from);
    if (!f.to.empty()) c.last = finsent::parse_date(f.to);
    if (!f.prompt.empty()) c.prompt = f.prompt;
    if (!f.identifiers.empty()) {
        c.identifiers.clear();
        for (const auto& s : f.identifiers) {
            if (s == "all") {
                c.identifiers.assign(finsent::kAllIdentifiers.begin(), finsent::kAllIdentifiers.end());
                break;
            }
            c.identifiers.push_back(finsent::identifier_from_string(s));
        }
    }
    if (!f.datasets.empty()) c.datasets = f.datasets;
    if (!f.methods.empty()) {
        c.methods.clear();
        for (const auto& s : f.methods) c.methods.push_back(finsent::score_method_from_string(s));
    }
    if (!f.prices.empty()) {
        c.prices.clear();
        for (const auto& p : f.prices) {
            const auto eq = p.find('=');
            if (eq != std::string::npos) {
                c.prices[p.substr(0, eq)] = p.substr(eq + 1);
            } else if (c.tickers.size() == 1) {
                c.prices[c.tickers.front()] = p;
            } else {
                throw finsent::ContractError("--prices needs TICKER=path unless exactly one ticker is selected");
            }
        }
    }
    if (!f.index.empty()) {
        c.index.clear();
        for (const auto& p : f.index) {
            const auto eq = p.find('=');
            if (eq == std::string::npos) {
                c.index.emplace_back("", p);
            } else {
                c.index.emplace_back(p.substr(0, eq), p.substr(eq + 1));
            }
        }
    }
    if (!f.split.empty()) c.split = finsent::parse_date(f.split);
    if (!f.ridge.empty()) c.ridge = f.ridge;
    if (!f.variants.empty()) c.variants = split_list(f.variants);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Financial sentiment benchmarking, daily sentiment indices and price regression"};
    cli.require_subcommand(1);
    Flags f;

    const auto common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--workers", f.workers, "Parallel workers");
        sub->add_option("--timezone", f.timezone, "UTC, an IANA zone name or a POSIX TZ rule");
    };
    const auto model_flags = [&f](CLI::App* sub) {
        sub->add_option("--model", f.model, "fixture:<path> or chat");
        sub->add_option("--instruction", f.instruction, "Instruction spec (JSON)");
        sub->add_option("--cache-dir", f.cache_dir, "Response cache directory");
        sub->add_option("--endpoint-url", f.endpoint_url, "Chat endpoint base URL");
        sub->add_option("--endpoint-model", f.endpoint_model, "Model name sent to the endpoint");
        sub->add_option("--auth-env", f.auth_env, "Env var holding the bearer token");
        sub->add_option("--max-retries", f.max_retries, "Retry budget per request");
        sub->add_option("--identifier", f.identifiers, "input, news, tweet or all")->delimiter(',');
    };

    auto* ingest = cli.add_subcommand("ingest", "Parse a corpus and summarize ticker mentions per day");
    common(ingest);
    ingest->add_option("--corpus", f.corpus, "Corpus file (.jsonl or .csv)");
    ingest->add_option("--tickers", f.tickers, "Comma-separated ticker symbols");

    auto* bench = cli.add_subcommand("bench", "Evaluate prompt families on a labeled dataset");
    common(bench);
    model_flags(bench);
    bench->add_option("--dataset", f.dataset, "Labeled dataset CSV");
    bench->add_option("--prompt", f.prompt, "base, aiap, ablation or fewshot");
    bench->add_option("--datasets", f.datasets, "all_agree and/or full")->delimiter(',');

    auto* score = cli.add_subcommand("score", "Build daily sentiment indices per ticker");
    common(score);
    model_flags(score);
    score->add_option("--corpus", f.corpus, "Corpus file (.jsonl or .csv)");
    score->add_option("--tickers", f.tickers, "Comma-separated ticker symbols");
    score->add_option("--scorer", f.scorer, "Probabilistic model, fixture:<path>");
    score->add_option("--prompt", f.prompt, "Prompt for a generative model: base or aiap");
    score->add_option("--methods", f.methods, "quantss, csbs, csbs_mean")->delimiter(',');
    score->add_option("--from", f.from, "First date (YYYY-MM-DD)");
    score->add_option("--to", f.to, "Last date (YYYY-MM-DD)");

    auto* predict = cli.add_subcommand("predict", "Next-day close regression with and without sentiment");
    common(predict);
    predict->add_option("--prices", f.prices, "TICKER=path to an OHLCV CSV (repeatable)");
    predict->add_option("--index", f.index, "[variant=]path to an index CSV (repeatable)");
    predict->add_option("--tickers", f.tickers, "Restrict to these tickers");
    predict->add_option("--split", f.split, "Last training date (YYYY-MM-DD)");
    predict->add_option("--ridge", f.ridge, "Ridge strength; repeat for several regressors")->delimiter(',');
    predict->add_option("--variants", f.variants, "Comma-separated variants, e.g. baseline,quantss,csbs");

    auto* report = cli.add_subcommand("report", "Collect Markdown reports into report.md");
    common(report);

    CLI11_PARSE(cli, argc, argv);

    Command command = Command::report;
    if (*ingest) command = Command::ingest;
    if (*bench) command = Command::bench;
    if (*score) command = Command::score;
    if (*predict) command = Command::predict;

    try {
        const RunConfig config = resolve(f);
        const auto result = finsent::app::run(command, config);
        for (const auto& p : result.outputs) std::cout << "wrote " << p.string() << '\n';
        if (!result.warnings.empty()) {
            std::cerr << result.warnings.size() << " warning(s):\n";
            for (const auto& w : result.warnings) std::cerr << "  " << w << '\n';
        }
        std::cout << "config sha256 " << config.hash() << '\n';
        return result.exit_code;
    } catch (const finsent::EvaluationAborted& e) {
        std::cerr << "error: " << e.what() << " (" << e.completed()
                  << " samples checkpointed; rerun to resume)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
