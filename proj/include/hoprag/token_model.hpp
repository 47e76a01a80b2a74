#pragma once

/// Word tokenization and the two token-level classifier contracts used by the
/// hop loop: the Labeler (marks useful words in a chunk and tags the chunk
/// CONTINUE/TERMINATE) and the Filter (picks next-hop query words out of
/// "query + labeled spans").
///
/// Two implementations of each contract ship here: fixture-backed oracles for
/// tests and reproducible runs, and adapters over a trained dual-head token
/// classifier reached through TokenClassifierBackend.

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hoprag/corpus_index.hpp"

namespace hoprag {

struct WordToken {
    std::string surface;
    std::size_t start = 0;  // byte offsets into the source text
    std::size_t end = 0;
    std::size_t index = 0;
};

/// Splits on whitespace, then peels leading and trailing ASCII punctuation off
/// each piece as one-character tokens. Inner punctuation ("Carl-Nielsen",
/// "Modern's") stays attached.
std::vector<WordToken> tokenize_words(std::string_view text);
std::vector<std::string> word_surfaces(std::string_view text);

/// Space-joins words, attaching closing punctuation to the preceding word.
std::string join_words(const std::vector<std::string>& words);

enum class ChunkTag { Continue, Terminate };

const char* to_string(ChunkTag tag) noexcept;
/// Accepts "continue" / "terminate" (case-insensitive).
ChunkTag parse_chunk_tag(std::string_view text);

struct LabelOutcome {
    ChunkTag tag = ChunkTag::Terminate;
    std::vector<bool> word_mask;  // aligned with tokenize_words(chunk.text)
    std::string span_text;
};

/// Text of the masked words in chunk order. Adjacent selected words keep the
/// chunk's original gap between them, non-adjacent ones are joined by a
/// single space, so "KGOT, in" survives as written.
std::string span_from_mask(std::string_view text, const std::vector<WordToken>& tokens,
                           const std::vector<bool>& mask);

struct FilterInput {
    std::string query;
    std::vector<std::string> info_spans;

    /// "Q: <query> Info: <span1>, <span2>, ..."
    std::string render() const;

    enum class Role { Marker, Query, Info };
    struct RoleToken {
        std::string surface;
        Role role;
    };
    /// Tokens of render(), each tagged with the part of the input it came from.
    std::vector<RoleToken> role_tokens() const;
};

/// True when every word of `output` (multiset) is drawn from the words of
/// `query` plus the words of all `info_spans`.
bool is_drawn_from(std::string_view output, const FilterInput& input);

class Labeler {
public:
    virtual ~Labeler() = default;
    virtual LabelOutcome label_and_tag(std::string_view query, const Chunk& chunk) const = 0;
};

class QueryFilter {
public:
    virtual ~QueryFilter() = default;
    /// May return an empty string, which marks a dead branch.
    virtual std::string next_query(const FilterInput& input) const = 0;
};

/// Ground-truth labeler backed by a fixture. Records are JSONL with keys
/// `query`, `chunk_id`, `tag` ("continue"|"terminate"), `labeled_words`
/// (0-based word indices into tokenize_words(chunk text)).
class OracleLabeler final : public Labeler {
public:
    enum class Unlisted { Error, Terminate };

    struct Annotation {
        ChunkTag tag = ChunkTag::Terminate;
        std::vector<std::size_t> labeled_words;
    };

    explicit OracleLabeler(Unlisted unlisted = Unlisted::Error) : unlisted_(unlisted) {}

    static OracleLabeler from_jsonl(const std::filesystem::path& path, Unlisted unlisted = Unlisted::Error);

    void add(std::string query, std::string chunk_id, Annotation annotation);
    std::size_t size() const noexcept { return table_.size(); }

    /// Throws AnnotationMissing for an unlisted pair under Unlisted::Error, and
    /// Format when a labeled index is outside the chunk.
    LabelOutcome label_and_tag(std::string_view query, const Chunk& chunk) const override;

private:
    static std::string key(std::string_view query, std::string_view chunk_id);

    Unlisted unlisted_;
    std::unordered_map<std::string, Annotation> table_;
};

/// Fixture-backed filter. Records are JSONL with keys `query`, `info` (list of
/// strings), `filtered_query`.
class OracleFilter final : public QueryFilter {
public:
    enum class Unlisted { Error, PassThrough };

    explicit OracleFilter(Unlisted unlisted = Unlisted::Error) : unlisted_(unlisted) {}

    static OracleFilter from_jsonl(const std::filesystem::path& path, Unlisted unlisted = Unlisted::Error);

    void add(std::string query, std::vector<std::string> info, std::string filtered_query);
    std::size_t size() const noexcept { return table_.size(); }

    /// Throws AnnotationMissing for an unlisted input under Unlisted::Error.
    std::string next_query(const FilterInput& input) const override;

private:
    static std::string key(const FilterInput& input);

    Unlisted unlisted_;
    std::unordered_map<std::string, std::string> table_;
};

/// Raw output of a dual-head token classifier over whole words. Each logit
/// pair is {negative, positive}: {useless, useful} per token and
/// {continue, terminate} for the chunk tag.
struct TokenClassification {
    std::vector<std::array<double, 2>> token_logits;
    std::optional<std::array<double, 2>> tag_logits;
};

/// Word-level inference contract. Implementations own subword alignment: they
/// receive whole words and must return exactly one logit pair per word.
class TokenClassifierBackend {
public:
    virtual ~TokenClassifierBackend() = default;
    /// `task` is "labeler" or "filter". Throws InferenceFailure.
    virtual TokenClassification classify(std::string_view task, const std::vector<std::string>& query_words,
                                         const std::vector<std::string>& words) const = 0;
};

/// POSTs {"task", "query_words", "words"} to an endpoint and expects
/// {"token_logits": [[a, b], ...], "tag_logits": [c, t]} back.
class HttpTokenClassifier final : public TokenClassifierBackend {
public:
    HttpTokenClassifier(std::string url, double timeout_s = 30.0, int retries = 2);
    TokenClassification classify(std::string_view task, const std::vector<std::string>& query_words,
                                 const std::vector<std::string>& words) const override;

private:
    std::string url_;
    double timeout_s_;
    int retries_;
};

/// Labeler over a trained classifier: per-word argmax for the mask, argmax of
/// the tag head for the chunk tag (a tie resolves to TERMINATE).
class ModelLabeler final : public Labeler {
public:
    explicit ModelLabeler(std::shared_ptr<const TokenClassifierBackend> backend);
    LabelOutcome label_and_tag(std::string_view query, const Chunk& chunk) const override;

private:
    std::shared_ptr<const TokenClassifierBackend> backend_;
};

/// Filter over a trained classifier: the words selected by the token head, in
/// input order, with the "Q:"/"Info:" markers never selectable.
class ModelFilter final : public QueryFilter {
public:
    explicit ModelFilter(std::shared_ptr<const TokenClassifierBackend> backend);
    std::string next_query(const FilterInput& input) const override;

private:
    std::shared_ptr<const TokenClassifierBackend> backend_;
};

}  // namespace hoprag
