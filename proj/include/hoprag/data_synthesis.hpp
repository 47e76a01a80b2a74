#pragma once

/// Builds Labeler and Filter training records from a multi-hop QA dataset with
/// an LLM: decompose each question into single-hop sub-questions with
/// dependencies, have the LLM extract the useful words of each supporting
/// chunk, have it write the next-hop query from the sub-question plus its
/// parents' extracted words, and pair every positive chunk with the most
/// similar non-oracle chunk as a TERMINATE example.
///
/// LLM output that breaks the prompts' rules (invented or reordered words,
/// dangling dependencies) is rejected, never repaired.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hoprag/corpus_index.hpp"
#include "hoprag/dataset.hpp"
#include "hoprag/llm_gateway.hpp"
#include "hoprag/token_model.hpp"

namespace hoprag {

struct DecomposedQuestion {
    std::string id;
    std::string sub_question;
    std::string answer;
    std::vector<std::string> dependency;
    std::string document;  // chunk id
};

/// Validates a "decomposed_questions" object against the supporting docs.
/// "document" may be a chunk id, "#n" or "n" (1-based position in `docs`).
/// Result is in dependency order (parents first, ties by id). Throws
/// LlmParseFailure for malformed entries and InvalidDependencyGraph for
/// dangling or cyclic dependencies or unknown documents.
std::vector<DecomposedQuestion> parse_decomposition(const Json& decomposed_questions, std::span<const Chunk> docs);

/// Prompt sent for decomposition: the synthesis.decompose instruction followed
/// by the question and the numbered documents.
std::string decomposition_prompt(std::string_view question, std::span<const Chunk> docs);

std::vector<DecomposedQuestion> decompose(LlmGateway& gateway, std::string_view question,
                                          std::span<const Chunk> docs, const LlmRequest& base = {});

/// Indices of `extracted` matched as an in-order subsequence of the chunk's
/// words (case-sensitive, earliest match). Throws ExtractionNotInChunk.
std::vector<std::size_t> match_in_order(const std::vector<std::string>& extracted,
                                        const std::vector<WordToken>& chunk_words);

std::string token_label_prompt(const DecomposedQuestion& sub_q, const Chunk& chunk);

/// Word indices of the chunk the LLM marks as useful for `sub_q`.
std::vector<std::size_t> extract_tokens(LlmGateway& gateway, const DecomposedQuestion& sub_q, const Chunk& chunk,
                                        const LlmRequest& base = {});

std::string query_filter_prompt(const DecomposedQuestion& sub_q, const std::vector<std::string>& parent_infos);

/// Next-hop query for `sub_q` given its parents' extracted spans. With no
/// parents there is nothing known to remove and the sub-question is returned
/// unchanged without an LLM call. Throws FilteredQueryInvalid when the output
/// is empty or uses words outside the sub-question and parent spans.
std::string build_filtered_query(LlmGateway& gateway, const DecomposedQuestion& sub_q,
                                 const std::vector<std::string>& parent_infos, const LlmRequest& base = {});

/// Highest-ranked chunk for `next_query` whose id is not in `oracle_ids`.
/// Throws NoNegativeAvailable.
const Chunk& sample_hard_negative(std::string_view next_query, const std::unordered_set<std::string>& oracle_ids,
                                  const DenseIndex& index);

struct LabelerRecord {
    std::string question_id;
    std::string sub_question_id;
    std::string query;
    std::string chunk_id;
    std::string chunk_text;
    std::vector<bool> word_labels;
    ChunkTag tag = ChunkTag::Terminate;

    std::vector<std::size_t> labeled_words() const;
};

struct FilterRecord {
    std::string question_id;
    std::string sub_question_id;
    std::string query;  // the sub-question
    std::vector<std::string> info;
    std::string rendered_input;
    std::vector<bool> target_words;  // over FilterInput::role_tokens()
    std::string filtered_query;
    bool passthrough = false;  // no parents: filtered_query == query
};

struct SynthesisReport {
    std::size_t questions = 0;
    std::size_t questions_decomposed = 0;
    std::size_t sub_questions = 0;
    std::size_t positive_records = 0;
    std::size_t negative_records = 0;
    std::size_t filter_records = 0;
    std::size_t passthrough_filter_records = 0;
    /// Rejections by stage: "missing_chunk", "decompose", "extract",
    /// "filter", "negative", "dependency_skipped".
    std::map<std::string, std::size_t> failures;

    OrderedJson to_json() const;
};

struct SynthesisOutput {
    std::vector<LabelerRecord> labeler;
    std::vector<FilterRecord> filter;
    SynthesisReport report;
};

struct SynthesisOptions {
    LlmRequest request;
    std::size_t parallel = 1;
};

/// For every sub-question that survives validation: one positive
/// LabelerRecord (CONTINUE), one hard negative (TERMINATE, no labels) and one
/// FilterRecord. Output order follows the dataset regardless of `parallel`.
SynthesisOutput build_records(LlmGateway& gateway, std::span<const QaPair> dataset, const DenseIndex& index,
                              const SynthesisOptions& options = {});

/// Target mask for a filter training example: each word of `filtered_query`
/// claims the first unclaimed non-marker input word with the same surface.
std::vector<bool> filter_target_words(const FilterInput& input, std::string_view filtered_query);

OrderedJson to_json(const LabelerRecord& record);
OrderedJson to_json(const FilterRecord& record);

}  // namespace hoprag
