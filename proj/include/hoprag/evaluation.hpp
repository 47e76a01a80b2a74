#pragma once

/// Answer metrics (EM, token F1, judge accuracy), retrieval recall, and the
/// three retrieval strategies compared side by side: one-shot dense retrieval
/// on the question, one LLM decomposition followed by per-sub-question
/// retrieval, and the iterative hop loop.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoprag/dataset.hpp"
#include "hoprag/hop_engine.hpp"
#include "hoprag/jsonl.hpp"
#include "hoprag/llm_gateway.hpp"

namespace hoprag {

/// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace.
std::string normalize_answer(std::string_view text);

int exact_match(std::string_view prediction, std::string_view gold);

/// Harmonic mean of token precision and recall over normalized token
/// multisets; 1 when both sides are empty, 0 when exactly one is.
double token_f1(std::string_view prediction, std::string_view gold);

/// |set(retrieved) ∩ oracle| / |oracle|. Throws EmptyOracle.
double recall_at_k(std::span<const std::string> retrieved, std::span<const std::string> oracle);

enum class StrategyId { DirectR, OneshotDecompose, EfficientIterative };

/// "direct_r" | "oneshot_decompose" | "efficient_iterative"
StrategyId parse_strategy(std::string_view name);
const char* to_string(StrategyId id) noexcept;

struct StrategyComponents {
    const DenseIndex* index = nullptr;
    const Labeler* labeler = nullptr;      // EfficientIterative
    const QueryFilter* filter = nullptr;   // EfficientIterative
    LlmGateway* generator = nullptr;       // all strategies
    LlmGateway* decomposer = nullptr;      // OneshotDecompose; defaults to generator
};

struct StrategyConfig {
    EngineConfig engine;
    std::size_t direct_k = 10;
    std::size_t decompose_k = 4;  // per sub-question
    DatasetId dataset = DatasetId::HotpotQA;
    LlmRequest request;
    std::size_t parallel = 1;
};

/// Everything one strategy produced for one question. Serialized as a trace
/// line; scoring only needs this plus the gold data.
struct QuestionOutcome {
    std::string id;
    std::string question;
    StrategyId strategy = StrategyId::DirectR;
    std::string prediction;
    std::vector<std::string> retrieved_ids;  // chunks handed to the generator
    std::vector<std::string> sub_questions;  // OneshotDecompose
    std::optional<HopTrace> hops;            // EfficientIterative
    CandidatePool pool;                      // EfficientIterative
    double k_used = 0.0;
    int llm_calls = 0;
    int iterations = 0;
    double latency_s = 0.0;
    std::optional<std::string> error;

    OrderedJson to_json() const;
    /// Reads back the fields scoring needs (hops/pool stay as written).
    static QuestionOutcome from_json(const Json& j);
};

/// Never throws for component errors: they land in outcome.error.
QuestionOutcome run_question(StrategyId strategy, const QaPair& qa, const StrategyComponents& components,
                             const StrategyConfig& config);

struct EvalRow {
    std::string id;
    std::string prediction;
    int em = 0;
    double f1 = 0.0;
    std::optional<int> acc;  // only when a judge ran
    std::optional<double> recall_at_k;  // absent when the row has no oracle chunks
    double k_used = 0.0;
    int llm_calls = 0;
    int iterations = 0;
    double latency_s = 0.0;
    bool failed = false;

    OrderedJson to_json() const;
};

/// Scores an outcome against its gold row. With a judge gateway the judge is
/// asked once (an empty prediction scores acc = 0 without a call).
EvalRow score_outcome(const QuestionOutcome& outcome, const QaPair& qa, LlmGateway* judge_gateway = nullptr,
                      const LlmRequest& judge_request = {});

struct AggregateReport {
    std::size_t rows = 0;
    std::size_t failed_rows = 0;
    double em = 0.0;
    double f1 = 0.0;
    std::optional<double> acc;          // mean over judged rows
    std::optional<double> recall_at_k;  // mean over rows with oracle chunks
    double k_used = 0.0;
    double llm_calls = 0.0;
    double iterations = 0.0;
    double latency_s = 0.0;

    OrderedJson to_json() const;
};

/// Unweighted means over the rows. Throws EmptyRows.
AggregateReport aggregate(std::span<const EvalRow> rows);

struct StrategyRun {
    std::vector<QuestionOutcome> outcomes;
    std::vector<EvalRow> rows;
    AggregateReport report;
};

/// Runs and scores `strategy` over the dataset; rows keep dataset order.
StrategyRun run_strategy(StrategyId strategy, std::span<const QaPair> dataset, const StrategyComponents& components,
                         const StrategyConfig& config, LlmGateway* judge_gateway = nullptr);

/// Header plus one line per (name, report), columns shaped like the
/// retrieval / QA / efficiency tables.
std::string aggregate_csv(const std::vector<std::pair<std::string, AggregateReport>>& reports);

}  // namespace hoprag
