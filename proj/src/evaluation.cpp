#include "hoprag/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <sstream>
#include <unordered_set>

#include "hoprag/error.hpp"
#include "hoprag/parallel.hpp"

namespace hoprag {

// ---------------------------------------------------------------------------
// Metrics

std::string normalize_answer(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (c < 0x80 && std::ispunct(c)) continue;
        cleaned.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
    std::istringstream in(cleaned);
    std::string word, out;
    while (in >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

int exact_match(std::string_view prediction, std::string_view gold) {
    return normalize_answer(prediction) == normalize_answer(gold) ? 1 : 0;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

double token_f1(std::string_view prediction, std::string_view gold) {
    auto pred = split_ws(normalize_answer(prediction));
    auto ref = split_ws(normalize_answer(gold));
    if (pred.empty() && ref.empty()) return 1.0;
    if (pred.empty() || ref.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& w : ref) ++counts[w];
    int common = 0;
    for (const auto& w : pred) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    double recall = static_cast<double>(common) / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

double recall_at_k(std::span<const std::string> retrieved, std::span<const std::string> oracle) {
    std::unordered_set<std::string> gold(oracle.begin(), oracle.end());
    if (gold.empty()) throw Error(Errc::EmptyOracle, "recall needs at least one oracle chunk");
    std::unordered_set<std::string> found;
    for (const auto& id : retrieved) {
        if (gold.contains(id)) found.insert(id);
    }
    return static_cast<double>(found.size()) / static_cast<double>(gold.size());
}

StrategyId parse_strategy(std::string_view name) {
    if (name == "direct_r") return StrategyId::DirectR;
    if (name == "oneshot_decompose") return StrategyId::OneshotDecompose;
    if (name == "efficient_iterative") return StrategyId::EfficientIterative;
    throw Error(Errc::Config, "unknown strategy '" + std::string(name) +
                                  "' (direct_r|oneshot_decompose|efficient_iterative)");
}

const char* to_string(StrategyId id) noexcept {
    switch (id) {
        case StrategyId::DirectR: return "direct_r";
        case StrategyId::OneshotDecompose: return "oneshot_decompose";
        case StrategyId::EfficientIterative: return "efficient_iterative";
    }
    return "direct_r";
}

// ---------------------------------------------------------------------------
// Strategies

OrderedJson QuestionOutcome::to_json() const {
    OrderedJson j;
    j["id"] = id;
    j["question"] = question;
    j["strategy"] = to_string(strategy);
    j["prediction"] = prediction;
    j["retrieved_ids"] = retrieved_ids;
    if (strategy == StrategyId::OneshotDecompose) j["sub_questions"] = sub_questions;
    if (hops) {
        j["pool"] = hoprag::to_json(pool);
        j["hops"] = hoprag::to_json(*hops);
    }
    j["counters"] = {{"k_used", k_used}, {"llm_calls", llm_calls}, {"iterations", iterations}, {"latency_s", latency_s}};
    j["error"] = error ? OrderedJson(*error) : OrderedJson(nullptr);
    return j;
}

QuestionOutcome QuestionOutcome::from_json(const Json& j) {
    QuestionOutcome o;
    o.id = j.at("id").get<std::string>();
    o.question = j.value("question", std::string{});
    o.strategy = parse_strategy(j.at("strategy").get<std::string>());
    o.prediction = j.value("prediction", std::string{});
    o.retrieved_ids = j.value("retrieved_ids", std::vector<std::string>{});
    o.sub_questions = j.value("sub_questions", std::vector<std::string>{});
    const auto& c = j.at("counters");
    o.k_used = c.value("k_used", 0.0);
    o.llm_calls = c.value("llm_calls", 0);
    o.iterations = c.value("iterations", 0);
    o.latency_s = c.value("latency_s", 0.0);
    if (auto it = j.find("error"); it != j.end() && it->is_string()) o.error = it->get<std::string>();
    return o;
}

namespace {

std::string answer_over(const std::vector<std::string>& ids, std::string_view question, const DenseIndex& index,
                        LlmGateway& generator, const StrategyConfig& config) {
    LlmRequest req = config.request;
    if (ids.empty()) {
        req.prompt = render_prompt(qa_prompt_id("qa.direct", config.dataset), {{"question", std::string(question)}});
    } else {
        std::string knowledge;
        for (const auto& id : ids) {
            if (!knowledge.empty()) knowledge.push_back('\n');
            knowledge += index.store().at(id).text;
        }
        req.prompt = render_prompt(qa_prompt_id("qa.retrieval", config.dataset),
                                   {{"knowledge", knowledge}, {"question", std::string(question)}});
    }
    std::string response;
    try {
        response = generator.complete(req);
    } catch (const Error& e) {
        throw Error(Errc::GeneratorFailure, e.what());
    }
    return parse_answer(response);
}

}  // namespace

QuestionOutcome run_question(StrategyId strategy, const QaPair& qa, const StrategyComponents& components,
                             const StrategyConfig& config) {
    QuestionOutcome out;
    out.id = qa.id;
    out.question = qa.question;
    out.strategy = strategy;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (components.index == nullptr || components.generator == nullptr) {
            throw Error(Errc::InvalidArgument, "strategy needs an index and a generator");
        }
        const DenseIndex& index = *components.index;
        switch (strategy) {
            case StrategyId::DirectR: {
                for (auto& hit : index.search(qa.question, config.direct_k)) out.retrieved_ids.push_back(hit.chunk_id);
                out.k_used = static_cast<double>(out.retrieved_ids.size());
                ++out.llm_calls;
                out.prediction = answer_over(out.retrieved_ids, qa.question, index, *components.generator, config);
                break;
            }
            case StrategyId::OneshotDecompose: {
                LlmGateway& decomposer = components.decomposer ? *components.decomposer : *components.generator;
                LlmRequest req = config.request;
                req.prompt = render_prompt("qa.decompose", {{"question", qa.question}});
                ++out.llm_calls;
                auto obj = parse_json_object(decomposer.complete(req), {"decomposed_questions"});
                for (const auto& s : obj.at("decomposed_questions")) {
                    if (s.is_string() && !s.get<std::string>().empty()) out.sub_questions.push_back(s.get<std::string>());
                }
                if (out.sub_questions.empty()) throw Error(Errc::LlmParseFailure, "no sub-questions returned");
                std::unordered_set<std::string> seen;
                for (const auto& sq : out.sub_questions) {
                    for (auto& hit : index.search(sq, config.decompose_k)) {
                        if (seen.insert(hit.chunk_id).second) out.retrieved_ids.push_back(hit.chunk_id);
                    }
                }
                out.k_used = static_cast<double>(out.retrieved_ids.size());
                out.iterations = 1;
                ++out.llm_calls;
                out.prediction = answer_over(out.retrieved_ids, qa.question, index, *components.generator, config);
                break;
            }
            case StrategyId::EfficientIterative: {
                if (components.labeler == nullptr || components.filter == nullptr) {
                    throw Error(Errc::InvalidArgument, "iterative strategy needs a labeler and a filter");
                }
                IndexRetriever retriever(index);
                auto result = run(qa.question, retriever, *components.labeler, *components.filter, config.engine);
                out.pool = std::move(result.pool);
                out.hops = std::move(result.trace);
                out.retrieved_ids = out.pool.chunk_ids();
                out.k_used = static_cast<double>(out.hops->chunks_tagged);
                out.iterations = out.hops->iterations_run;
                ++out.llm_calls;
                out.prediction = answer(qa.question, out.pool, retriever, *components.generator,
                                        AnswerOptions{config.dataset, config.request}, &*out.hops);
                break;
            }
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

EvalRow score_outcome(const QuestionOutcome& outcome, const QaPair& qa, LlmGateway* judge_gateway,
                      const LlmRequest& judge_request) {
    EvalRow row;
    row.id = outcome.id;
    row.prediction = outcome.prediction;
    row.em = exact_match(outcome.prediction, qa.gold_answer);
    row.f1 = token_f1(outcome.prediction, qa.gold_answer);
    if (!qa.oracle_chunk_ids.empty()) row.recall_at_k = recall_at_k(outcome.retrieved_ids, qa.oracle_chunk_ids);
    row.k_used = outcome.k_used;
    row.llm_calls = outcome.llm_calls;
    row.iterations = outcome.iterations;
    row.latency_s = outcome.latency_s;
    row.failed = outcome.error.has_value();
    if (judge_gateway != nullptr) {
        if (outcome.prediction.empty() || qa.gold_answer.empty()) {
            row.acc = 0;
        } else {
            try {
                row.acc = judge(*judge_gateway, qa.question, outcome.prediction, qa.gold_answer, judge_request).correct;
            } catch (const Error&) {
                row.acc.reset();
            }
        }
    }
    return row;
}

OrderedJson EvalRow::to_json() const {
    OrderedJson j;
    j["id"] = id;
    j["prediction"] = prediction;
    j["em"] = em;
    j["f1"] = f1;
    j["acc"] = acc ? OrderedJson(*acc) : OrderedJson(nullptr);
    j["recall_at_k"] = recall_at_k ? OrderedJson(*recall_at_k) : OrderedJson(nullptr);
    j["k_used"] = k_used;
    j["llm_calls"] = llm_calls;
    j["iterations"] = iterations;
    j["latency_s"] = latency_s;
    j["failed"] = failed;
    return j;
}

AggregateReport aggregate(std::span<const EvalRow> rows) {
    if (rows.empty()) throw Error(Errc::EmptyRows, "nothing to aggregate");
    AggregateReport r;
    r.rows = rows.size();
    double acc_sum = 0.0, recall_sum = 0.0;
    std::size_t judged = 0, with_oracle = 0;
    for (const auto& row : rows) {
        r.failed_rows += row.failed ? 1 : 0;
        r.em += row.em;
        r.f1 += row.f1;
        r.k_used += row.k_used;
        r.llm_calls += row.llm_calls;
        r.iterations += row.iterations;
        r.latency_s += row.latency_s;
        if (row.acc) {
            acc_sum += *row.acc;
            ++judged;
        }
        if (row.recall_at_k) {
            recall_sum += *row.recall_at_k;
            ++with_oracle;
        }
    }
    const double n = static_cast<double>(rows.size());
    r.em /= n;
    r.f1 /= n;
    r.k_used /= n;
    r.llm_calls /= n;
    r.iterations /= n;
    r.latency_s /= n;
    if (judged > 0) r.acc = acc_sum / static_cast<double>(judged);
    if (with_oracle > 0) r.recall_at_k = recall_sum / static_cast<double>(with_oracle);
    return r;
}

OrderedJson AggregateReport::to_json() const {
    OrderedJson j;
    j["rows"] = rows;
    j["failed_rows"] = failed_rows;
    j["em"] = em;
    j["f1"] = f1;
    j["acc"] = acc ? OrderedJson(*acc) : OrderedJson(nullptr);
    j["recall_at_k"] = recall_at_k ? OrderedJson(*recall_at_k) : OrderedJson(nullptr);
    j["k_used"] = k_used;
    j["llm_calls"] = llm_calls;
    j["iterations"] = iterations;
    j["latency_s"] = latency_s;
    return j;
}

StrategyRun run_strategy(StrategyId strategy, std::span<const QaPair> dataset, const StrategyComponents& components,
                         const StrategyConfig& config, LlmGateway* judge_gateway) {
    StrategyRun out;
    out.outcomes.resize(dataset.size());
    out.rows.resize(dataset.size());
    parallel_for(dataset.size(), config.parallel, [&](std::size_t i) {
        out.outcomes[i] = run_question(strategy, dataset[i], components, config);
        out.rows[i] = score_outcome(out.outcomes[i], dataset[i], judge_gateway, config.request);
    });
    out.report = aggregate(out.rows);
    return out;
}

std::string aggregate_csv(const std::vector<std::pair<std::string, AggregateReport>>& reports) {
    std::ostringstream csv;
    csv.setf(std::ios::fixed);
    csv.precision(6);
    csv << "method,rows,failed_rows,recall_at_k,k,em,f1,acc,llm_calls,iterations,latency_s\n";
    for (const auto& [name, r] : reports) {
        csv << name << ',' << r.rows << ',' << r.failed_rows << ',';
        if (r.recall_at_k) csv << *r.recall_at_k;
        csv << ',' << r.k_used << ',' << r.em << ',' << r.f1 << ',';
        if (r.acc) csv << *r.acc;
        csv << ',' << r.llm_calls << ',' << r.iterations << ',' << r.latency_s << '\n';
    }
    return csv.str();
}

}  // namespace hoprag
