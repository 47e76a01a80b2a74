#pragma once

/// Chunk storage, the embedding-provider contract, and exact dense top-k
/// retrieval over L2-normalized vectors.
///
/// A DenseIndex is immutable once built; concurrent searches are safe.
/// ChunkStore ingestion is single-writer.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hoprag {

struct Chunk {
    std::string id;
    std::string text;
    std::string source_id;
    std::map<std::string, std::string> meta;
};

class ChunkStore {
public:
    ChunkStore() = default;

    /// Throws DuplicateId / EmptyText; on error the store is left unchanged.
    static ChunkStore ingest(std::span<const Chunk> records);

    void add(Chunk chunk);

    const Chunk* find(std::string_view id) const;
    const Chunk& at(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }

    std::size_t size() const noexcept { return chunks_.size(); }
    bool empty() const noexcept { return chunks_.empty(); }
    /// Chunks in ingestion order.
    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }

private:
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Reads the corpus JSONL format: `id`, `text`, `source_id`, optional `meta`
/// (object of strings). Format errors carry the 1-based line number.
std::vector<Chunk> load_corpus_jsonl(const std::filesystem::path& path);

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    double norm() const noexcept;
};

/// Dot product of two unit vectors. Dimensions must agree.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    /// Identifies the embedder configuration; persisted with an index.
    virtual std::string spec() const = 0;
    /// Deterministic, unit-norm. Throws EmptyText on empty input.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Signed feature hashing over lowercased word tokens (maximal runs of ASCII
/// alphanumerics and non-ASCII bytes). Bucket = fnv1a64(token) mod d, sign
/// from bit 32 of the hash, counts accumulated then L2-normalized.
class HashedBowEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDimension = 256;

    explicit HashedBowEmbedder(std::size_t dimension = kDefaultDimension);

    std::size_t dimension() const override { return dimension_; }
    std::string spec() const override;
    EmbeddingVector embed(std::string_view text) const override;

    static std::vector<std::string> hash_tokens(std::string_view text);
    static std::uint64_t fnv1a64(std::string_view bytes) noexcept;

private:
    std::size_t dimension_;
};

/// OpenAI-compatible `/embeddings` endpoint. Output is re-normalized; a
/// dimension mismatch or exhausted retries raise ProviderFailure.
class HttpEmbedder final : public Embedder {
public:
    struct Options {
        std::string url;  // full endpoint URL, e.g. http://host:port/v1/embeddings
        std::string model;
        std::string api_key;
        std::size_t dimension = 0;
        int retries = 3;
        double timeout_s = 30.0;
    };

    explicit HttpEmbedder(Options options);

    std::size_t dimension() const override { return options_.dimension; }
    std::string spec() const override;
    EmbeddingVector embed(std::string_view text) const override;

private:
    Options options_;
};

/// Parses "hashed", "hashed:<dim>" specs. Other kinds are built by the CLI.
std::unique_ptr<Embedder> make_embedder_from_spec(std::string_view spec);

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;
    int rank = 0;  // 1-based
};

class DenseIndex {
public:
    /// Throws EmptyStore.
    static DenseIndex build(ChunkStore store, std::shared_ptr<const Embedder> embedder);

    /// Exact cosine top-k; ties broken by ascending chunk id. Throws EmptyQuery
    /// for an empty query and InvalidArgument for k < 1.
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k) const;

    /// As search(), but chunks whose id is in `exclude` are not candidates.
    std::vector<RetrievalHit> search_excluding(std::string_view query, std::size_t k,
                                               const std::unordered_set<std::string>& exclude) const;

    std::vector<RetrievalHit> search_vector(const EmbeddingVector& query, std::size_t k,
                                            const std::unordered_set<std::string>* exclude = nullptr) const;

    std::size_t size() const noexcept { return store_.size(); }
    const ChunkStore& store() const noexcept { return store_; }
    const Embedder& embedder() const noexcept { return *embedder_; }
    std::span<const double> embedding(std::size_t position) const;

    /// Binary format documented in README ("Index file"). Writing the same
    /// index twice yields byte-identical files.
    void save(const std::filesystem::path& path) const;
    /// The embedder's spec() must match the one recorded in the file.
    static DenseIndex load(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder);

private:
    DenseIndex(ChunkStore store, std::shared_ptr<const Embedder> embedder, std::vector<double> matrix);

    ChunkStore store_;
    std::shared_ptr<const Embedder> embedder_;
    std::vector<double> matrix_;  // size() x dimension, row-major
};

}  // namespace hoprag
