#pragma once

/// The iterative retrieval loop: retrieve for every frontier query, tag each
/// chunk, pool the CONTINUE chunks, grow the frontier with filtered next-hop
/// queries, and finally make a single generator call over the pool.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hoprag/corpus_index.hpp"
#include "hoprag/jsonl.hpp"
#include "hoprag/llm_gateway.hpp"
#include "hoprag/prompt_registry.hpp"
#include "hoprag/token_model.hpp"

namespace hoprag {

class Retriever {
public:
    virtual ~Retriever() = default;
    /// Top-k chunks for `query` among those not in `exclude`.
    virtual std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k,
                                               const std::unordered_set<std::string>& exclude) const = 0;
    virtual const Chunk& chunk(std::string_view id) const = 0;
};

class IndexRetriever final : public Retriever {
public:
    explicit IndexRetriever(const DenseIndex& index) : index_(index) {}
    std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k,
                                       const std::unordered_set<std::string>& exclude) const override {
        return index_.search_excluding(query, k, exclude);
    }
    const Chunk& chunk(std::string_view id) const override { return index_.store().at(id); }

private:
    const DenseIndex& index_;
};

struct EngineConfig {
    int k_per_hop = 4;
    int max_iterations = 4;
    bool dedupe_queries = true;
    /// Reject filter outputs containing words absent from its input.
    bool check_filter_output = true;

    /// Throws InvalidArgument unless k_per_hop and max_iterations are positive.
    void validate() const;
};

struct QueryNode {
    std::string text;
    int depth = 0;
    std::optional<std::string> parent_query;
    std::optional<std::string> origin_chunk;
};

struct PoolEntry {
    std::string chunk_id;
    double score = 0.0;
    int depth = 0;
};

/// CONTINUE-tagged chunks in admission order, without duplicates.
class CandidatePool {
public:
    /// False (and no change) if the chunk is already pooled.
    bool admit(PoolEntry entry);
    bool contains(const std::string& chunk_id) const { return seen_.contains(chunk_id); }

    const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
    const std::unordered_set<std::string>& seen() const noexcept { return seen_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::vector<std::string> chunk_ids() const;

private:
    std::vector<PoolEntry> entries_;
    std::unordered_set<std::string> seen_;
};

struct TaggedChunk {
    std::string chunk_id;
    double score = 0.0;
    int rank = 0;
    ChunkTag tag = ChunkTag::Terminate;
    /// The labeler said CONTINUE but labeled no words.
    bool downgraded = false;
    std::string span_text;
    /// Filter output; empty string for a dead branch, nullopt when not asked.
    std::optional<std::string> next_query;
    /// Whether next_query joined the frontier (false when empty or a repeat).
    bool spawned = false;
};

struct QueryRecord {
    QueryNode node;
    std::vector<TaggedChunk> chunks;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    std::vector<QueryRecord> queries;
};

struct HopTrace {
    std::vector<IterationRecord> iterations;
    int generator_llm_calls = 0;
    int iterations_run = 0;
    int retrieval_calls = 0;
    int frontier_nodes = 0;       // nodes ever created, the root included
    std::size_t chunks_tagged = 0;  // distinct chunk ids tagged
    double wall_time_s = 0.0;

    /// Distinct chunk ids tagged, in first-seen order.
    std::vector<std::string> tagged_chunk_ids() const;
};

struct RunResult {
    CandidatePool pool;
    HopTrace trace;
};

/// Runs the loop for one question. Errors from the components are rethrown as
/// ComponentFailure naming the iteration, query and component.
RunResult run(std::string_view question, const Retriever& retriever, const Labeler& labeler,
              const QueryFilter& filter, const EngineConfig& config = {});

struct AnswerOptions {
    DatasetId dataset = DatasetId::HotpotQA;
    LlmRequest request;  // prompt is filled in
};

/// Chunk texts of the pool, one per line, in pool order.
std::string pool_knowledge(const CandidatePool& pool, const Retriever& retriever);

/// Exactly one generator call: the retrieval-QA prompt over the pool, or the
/// direct-answer prompt when the pool is empty. Increments
/// trace->generator_llm_calls when a trace is given. Throws GeneratorFailure
/// or AnswerParseFailure.
std::string answer(std::string_view question, const CandidatePool& pool, const Retriever& retriever,
                   LlmGateway& generator, const AnswerOptions& options = {}, HopTrace* trace = nullptr);

/// Parses {"answer": ...} out of a generator response. Throws AnswerParseFailure.
std::string parse_answer(std::string_view response);

OrderedJson to_json(const HopTrace& trace);
OrderedJson to_json(const CandidatePool& pool);

}  // namespace hoprag
