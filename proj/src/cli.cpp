#include "hoprag/cli.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "hoprag/data_synthesis.hpp"
#include "hoprag/error.hpp"
#include "hoprag/evaluation.hpp"
#include "hoprag/parallel.hpp"
#include "hoprag/run_config.hpp"

namespace hoprag {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string question;
    std::string strategy;
    std::string strategies = "direct_r,oneshot_decompose,efficient_iterative";
    std::string traces;
    std::string run_name;
    std::string output_dir;
    std::string corpus;
    std::string out;
    std::string embedder;
    std::size_t parallel = 0;
    std::size_t limit = 0;
    long long seed = -1;
    bool csv = false;
    bool log_llm = false;
};

bool is_validation(Errc code) {
    switch (code) {
        case Errc::Config:
        case Errc::Format:
        case Errc::Io:
        case Errc::DuplicateId:
        case Errc::EmptyText:
        case Errc::EmptyStore:
        case Errc::InvalidArgument:
        case Errc::UnknownTemplate:
            return true;
        default:
            return false;
    }
}

RunConfig config_with_flags(const Flags& f) {
    RunConfig c = load_run_config(f.config);
    if (!f.strategy.empty()) c.strategy = parse_strategy(f.strategy);
    if (f.parallel > 0) c.parallel = f.parallel;
    if (f.limit > 0) c.limit = f.limit;
    if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.output_dir.empty()) c.output_dir = f.output_dir;
    c.engine.validate();
    return c;
}

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return s.str();
}

/// Creates the run directory and saves the resolved config in it. A named run
/// reuses its directory; an unnamed one gets a fresh timestamped directory.
fs::path open_run_dir(const RunConfig& config, const Flags& f, const std::string& command) {
    fs::path dir;
    if (!f.run_name.empty()) {
        dir = config.output_dir / f.run_name;
    } else {
        std::string base = timestamp() + "-" + command;
        dir = config.output_dir / base;
        for (int n = 2; fs::exists(dir); ++n) dir = config.output_dir / (base + "-" + std::to_string(n));
    }
    fs::create_directories(dir);
    OrderedJson saved = config.to_json();
    saved["command"] = command;
    if (!config.source.empty()) saved["source"] = config.source.string();
    write_text_file(dir / "config.json", saved.dump(2) + "\n");
    return dir;
}

std::unique_ptr<LlmGateway> make_gateway(std::shared_ptr<LlmClient> client, const RunConfig& config,
                                         const fs::path& log_path) {
    LlmGateway::Options o;
    o.max_in_flight = std::max<std::size_t>(1, config.parallel);
    o.log_path = log_path;
    return std::make_unique<LlmGateway>(std::move(client), std::move(o));
}

void print_stats(std::ostream& err, const char* name, const LlmGateway& g) {
    auto s = g.stats();
    err << name << ": " << s.logical_calls << " calls, " << s.attempts << " attempts, " << s.failed_attempts
        << " failed\n";
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Flags& f, std::ostream& out) {
    fs::path corpus = f.corpus, index_out = f.out;
    std::string embedder = f.embedder.empty() ? "hashed:256" : f.embedder;
    OrderedJson embedder_spec = embedder;
    if (!f.config.empty()) {
        RunConfig c = load_run_config(f.config);
        if (corpus.empty() && c.corpus) corpus = *c.corpus;
        if (index_out.empty() && c.index) index_out = *c.index;
        if (f.embedder.empty()) embedder_spec = c.embedder;
    }
    if (corpus.empty()) throw Error(Errc::Config, "ingest needs --corpus (or a config with 'corpus')");
    if (index_out.empty()) throw Error(Errc::Config, "ingest needs --out (or a config with 'index')");
    if (!fs::is_regular_file(corpus)) throw Error(Errc::Config, "corpus not found: " + corpus.string());

    auto chunks = load_corpus_jsonl(corpus);
    auto index = DenseIndex::build(ChunkStore::ingest(chunks), build_embedder(embedder_spec));
    if (index_out.has_parent_path()) fs::create_directories(index_out.parent_path());
    index.save(index_out);
    out << "indexed " << index.size() << " chunks (" << index.embedder().spec() << ") -> " << index_out.string()
        << "\n";
    return kExitOk;
}

int cmd_synthesize(const Flags& f, std::ostream& out, std::ostream& err) {
    RunConfig c = config_with_flags(f);
    validate(c, Needs{.dataset = true, .retrieval = true, .llm = true});
    auto rows = load_rows(c);
    auto index = load_or_build_index(c);
    auto client = build_llm_client(c.llm);

    fs::path dir = open_run_dir(c, f, "synthesize");
    auto gateway = make_gateway(client, c, f.log_llm ? dir / "llm_calls.jsonl" : fs::path());
    if (rows.empty()) err << "warning: dataset is empty; writing empty outputs\n";

    auto result = build_records(*gateway, rows, index, SynthesisOptions{c.request, c.parallel});
    std::vector<OrderedJson> labeler, filter;
    for (const auto& r : result.labeler) labeler.push_back(to_json(r));
    for (const auto& r : result.filter) filter.push_back(to_json(r));
    write_jsonl(dir / "labeler.jsonl", labeler);
    write_jsonl(dir / "filter.jsonl", filter);
    write_text_file(dir / "synthesis_report.json", result.report.to_json().dump(2) + "\n");
    print_stats(err, "llm", *gateway);
    out << "labeler records: " << labeler.size() << ", filter records: " << filter.size() << "\n"
        << "run dir: " << dir.string() << "\n";
    return kExitOk;
}

struct Pipeline {
    DenseIndex index;
    ClassifierPair classifier;
    std::shared_ptr<LlmClient> llm;
    std::shared_ptr<LlmClient> judge;
};

Pipeline load_pipeline(const RunConfig& c, bool need_classifier, bool need_judge) {
    Pipeline p{load_or_build_index(c), {}, build_llm_client(c.llm), nullptr};
    if (need_classifier) p.classifier = build_classifier(c.classifier);
    if (need_judge && !c.judge.is_null()) p.judge = build_llm_client(c.judge);
    return p;
}

StrategyComponents components(Pipeline& p, LlmGateway& generator) {
    return StrategyComponents{&p.index, p.classifier.labeler.get(), p.classifier.filter.get(), &generator, nullptr};
}

int cmd_run(const Flags& f, std::ostream& out, std::ostream& err) {
    RunConfig c = config_with_flags(f);
    const bool single = !f.question.empty();
    const bool iterative = c.strategy == StrategyId::EfficientIterative;
    validate(c, Needs{.dataset = !single, .retrieval = true, .llm = true, .classifier = iterative});
    std::vector<QaPair> rows;
    if (single) {
        rows.push_back(QaPair{"question", f.question, "", {}, std::nullopt});
    } else {
        rows = load_rows(c);
    }
    Pipeline p = load_pipeline(c, iterative, false);

    fs::path dir = open_run_dir(c, f, "run");
    auto generator = make_gateway(p.llm, c, f.log_llm ? dir / "llm_calls.jsonl" : fs::path());
    if (rows.empty()) err << "warning: dataset is empty; writing an empty trace file\n";

    auto comps = components(p, *generator);
    auto sc = to_strategy_config(c);
    std::vector<QuestionOutcome> outcomes(rows.size());
    parallel_for(rows.size(), c.parallel,
                 [&](std::size_t i) { outcomes[i] = run_question(c.strategy, rows[i], comps, sc); });

    std::vector<OrderedJson> traces;
    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        traces.push_back(o.to_json());
        if (o.error) {
            ++failed;
            err << "warning: " << o.id << ": " << *o.error << "\n";
        }
    }
    write_jsonl(dir / "traces.jsonl", traces);
    print_stats(err, "llm", *generator);
    if (single) {
        const auto& o = outcomes.front();
        out << "answer: " << o.prediction << "\n";
        if (o.hops) out << "iterations: " << o.iterations << ", pool: " << o.pool.size() << "\n";
    } else {
        out << "questions: " << outcomes.size() << ", failed: " << failed << "\n";
    }
    out << "run dir: " << dir.string() << "\n";
    return kExitOk;
}

OrderedJson report_json(const std::string& strategy, const AggregateReport& report, const std::vector<EvalRow>& rows) {
    OrderedJson j;
    j["strategy"] = strategy;
    j["aggregate"] = report.to_json();
    j["rows"] = OrderedJson::array();
    for (const auto& r : rows) j["rows"].push_back(r.to_json());
    return j;
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
    RunConfig c = config_with_flags(f);
    validate(c, Needs{.dataset = true, .judge = true});
    if (!fs::is_regular_file(f.traces)) throw Error(Errc::Config, "traces not found: " + f.traces);
    std::map<std::string, QaPair> gold;
    for (auto& qa : load_dataset_jsonl(*c.dataset)) gold.emplace(qa.id, std::move(qa));
    std::vector<QuestionOutcome> outcomes;
    for_each_jsonl(f.traces, [&](const Json& j, std::size_t line) {
        try {
            outcomes.push_back(QuestionOutcome::from_json(j));
        } catch (const std::exception& e) {
            throw Error(Errc::Format, f.traces + ":" + std::to_string(line) + ": " + e.what());
        }
        if (!gold.contains(outcomes.back().id)) {
            throw Error(Errc::Format, f.traces + ":" + std::to_string(line) + ": id '" + outcomes.back().id +
                                          "' is not in the dataset");
        }
    });
    if (outcomes.empty()) throw Error(Errc::Config, "trace file has no rows: " + f.traces);
    std::shared_ptr<LlmClient> judge_client = c.judge.is_null() ? nullptr : build_llm_client(c.judge);

    fs::path dir = open_run_dir(c, f, "eval");
    std::unique_ptr<LlmGateway> judge;
    if (judge_client) judge = make_gateway(judge_client, c, f.log_llm ? dir / "judge_calls.jsonl" : fs::path());
    std::vector<EvalRow> rows(outcomes.size());
    parallel_for(outcomes.size(), c.parallel, [&](std::size_t i) {
        rows[i] = score_outcome(outcomes[i], gold.at(outcomes[i].id), judge.get(), c.request);
    });
    auto report = aggregate(rows);
    std::string name = to_string(outcomes.front().strategy);
    write_text_file(dir / "report.json", report_json(name, report, rows).dump(2) + "\n");
    if (f.csv) write_text_file(dir / "report.csv", aggregate_csv({{name, report}}));
    if (judge) print_stats(err, "judge", *judge);
    out << report.to_json().dump(2) << "\n"
        << "run dir: " << dir.string() << "\n";
    return kExitOk;
}

int cmd_bench(const Flags& f, std::ostream& out, std::ostream& err) {
    RunConfig c = config_with_flags(f);
    std::vector<StrategyId> strategies;
    std::stringstream list(f.strategies);
    for (std::string name; std::getline(list, name, ',');) {
        if (!name.empty()) strategies.push_back(parse_strategy(name));
    }
    if (strategies.empty()) throw Error(Errc::Config, "--strategies is empty");
    bool iterative = std::find(strategies.begin(), strategies.end(), StrategyId::EfficientIterative) != strategies.end();
    validate(c, Needs{.dataset = true, .retrieval = true, .llm = true, .classifier = iterative, .judge = true});
    auto rows = load_rows(c);
    Pipeline p = load_pipeline(c, iterative, true);

    fs::path dir = open_run_dir(c, f, "bench");
    auto generator = make_gateway(p.llm, c, f.log_llm ? dir / "llm_calls.jsonl" : fs::path());
    std::unique_ptr<LlmGateway> judge;
    if (p.judge) judge = make_gateway(p.judge, c, f.log_llm ? dir / "judge_calls.jsonl" : fs::path());
    if (rows.empty()) {
        err << "warning: dataset is empty; nothing to benchmark\n";
        out << "run dir: " << dir.string() << "\n";
        return kExitOk;
    }

    auto comps = components(p, *generator);
    auto sc = to_strategy_config(c);
    OrderedJson report = OrderedJson::object();
    std::vector<std::pair<std::string, AggregateReport>> table;
    for (auto s : strategies) {
        auto result = run_strategy(s, rows, comps, sc, judge.get());
        std::vector<OrderedJson> traces;
        for (const auto& o : result.outcomes) traces.push_back(o.to_json());
        write_jsonl(dir / (std::string("traces_") + to_string(s) + ".jsonl"), traces);
        report[to_string(s)] = report_json(to_string(s), result.report, result.rows);
        table.emplace_back(to_string(s), result.report);
        if (result.report.failed_rows > 0) {
            err << "warning: " << to_string(s) << ": " << result.report.failed_rows << " failed rows\n";
        }
    }
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    std::string csv = aggregate_csv(table);
    if (f.csv) write_text_file(dir / "report.csv", csv);
    print_stats(err, "llm", *generator);
    if (judge) print_stats(err, "judge", *judge);
    out << csv << "run dir: " << dir.string() << "\n";
    return kExitOk;
}

void add_run_options(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--parallel", f.parallel, "Worker bound for questions and LLM calls (default 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--limit", f.limit, "Use a seeded random sample of N dataset rows")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Override the config seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--output-dir", f.output_dir, "Override the config output_dir");
    cmd->add_option("--run-name", f.run_name, "Run directory name (default: UTC timestamp)");
    cmd->add_flag("--log-llm", f.log_llm, "Write every LLM request/response to the run directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Iterative multi-hop retrieval: index, synthesize training data, run and evaluate strategies",
                 "hoprag"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    Flags f;
    const std::vector<std::string> strategy_names{"direct_r", "oneshot_decompose", "efficient_iterative"};

    auto* ingest = app.add_subcommand("ingest", "Embed a corpus JSONL and write a binary index");
    ingest->add_option("--corpus", f.corpus, "Corpus JSONL (id, text, source_id?, meta?)");
    ingest->add_option("-o,--out", f.out, "Index file to write");
    ingest->add_option("--embedder", f.embedder, "Embedder spec, e.g. hashed:256");
    ingest->add_option("-c,--config", f.config, "Take corpus/index/embedder from a config")->check(CLI::ExistingFile);

    auto* synth = app.add_subcommand("synthesize", "Build labeler and filter training records with an LLM");
    add_run_options(synth, f);

    auto* run = app.add_subcommand("run", "Answer one question or the whole dataset, writing traces");
    add_run_options(run, f);
    run->add_option("-q,--question", f.question, "Answer a single question instead of the dataset");
    run->add_option("-s,--strategy", f.strategy, "Override the config strategy")->check(CLI::IsMember(strategy_names));

    auto* eval = app.add_subcommand("eval", "Score a trace file against the dataset");
    add_run_options(eval, f);
    eval->add_option("-t,--traces", f.traces, "traces.jsonl written by `run`")->required();
    eval->add_flag("--csv", f.csv, "Also write report.csv");

    auto* bench = app.add_subcommand("bench", "Run and score several strategies side by side");
    add_run_options(bench, f);
    bench->add_option("--strategies", f.strategies, "Comma-separated strategies (default: all three)");
    bench->add_flag("--csv", f.csv, "Also write report.csv");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(f, out);
        if (synth->parsed()) return cmd_synthesize(f, out, err);
        if (run->parsed()) return cmd_run(f, out, err);
        if (eval->parsed()) return cmd_eval(f, out, err);
        if (bench->parsed()) return cmd_bench(f, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_validation(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace hoprag
