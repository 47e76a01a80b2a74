#include "hoprag/corpus_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "hoprag/error.hpp"
#include "hoprag/jsonl.hpp"

namespace hoprag {

// ---------------------------------------------------------------------------
// ChunkStore

ChunkStore ChunkStore::ingest(std::span<const Chunk> records) {
    ChunkStore store;
    for (const auto& record : records) store.add(record);
    return store;
}

void ChunkStore::add(Chunk chunk) {
    if (chunk.id.empty()) throw Error(Errc::InvalidArgument, "chunk with empty id");
    if (chunk.text.empty()) throw Error(Errc::EmptyText, "chunk '" + chunk.id + "' has empty text");
    if (by_id_.contains(chunk.id)) throw Error(Errc::DuplicateId, "duplicate chunk id '" + chunk.id + "'");
    by_id_.emplace(chunk.id, chunks_.size());
    chunks_.push_back(std::move(chunk));
}

const Chunk* ChunkStore::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const Chunk& ChunkStore::at(std::string_view id) const {
    const Chunk* c = find(id);
    if (c == nullptr) throw Error(Errc::InvalidArgument, "unknown chunk id '" + std::string(id) + "'");
    return *c;
}

std::vector<Chunk> load_corpus_jsonl(const std::filesystem::path& path) {
    std::vector<Chunk> chunks;
    for_each_jsonl(path, [&](const Json& obj, std::size_t line_no) {
        auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
        if (!obj.contains("id") || !obj.contains("text")) {
            throw Error(Errc::Format, where() + ": corpus record needs 'id' and 'text'");
        }
        Chunk c;
        c.id = obj.at("id").get<std::string>();
        c.text = obj.at("text").get<std::string>();
        c.source_id = obj.value("source_id", std::string{});
        if (auto it = obj.find("meta"); it != obj.end() && !it->is_null()) {
            for (const auto& [k, v] : it->items()) {
                c.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
        if (c.id.empty()) throw Error(Errc::Format, where() + ": empty id");
        if (c.text.empty()) throw Error(Errc::EmptyText, where() + ": empty text for '" + c.id + "'");
        chunks.push_back(std::move(c));
    });
    return chunks;
}

// ---------------------------------------------------------------------------
// Embeddings

double EmbeddingVector::norm() const noexcept {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) throw Error(Errc::InvalidArgument, "embedding dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

HashedBowEmbedder::HashedBowEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::string HashedBowEmbedder::spec() const { return "hashed:" + std::to_string(dimension_); }

std::uint64_t HashedBowEmbedder::fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> HashedBowEmbedder::hash_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
        if (word) {
            cur.push_back(static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

EmbeddingVector HashedBowEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
    EmbeddingVector v;
    v.values.assign(dimension_, 0.0);
    auto bump = [&](std::string_view token) {
        std::uint64_t h = fnv1a64(token);
        double sign = ((h >> 32) & 1ULL) ? -1.0 : 1.0;
        v.values[h % dimension_] += sign;
    };
    for (const auto& token : hash_tokens(text)) bump(token);
    double n = v.norm();
    if (n == 0.0) {
        // No word tokens, or the signed counts cancelled: hash the raw text.
        std::fill(v.values.begin(), v.values.end(), 0.0);
        bump(text);
        n = 1.0;
    }
    for (double& x : v.values) x /= n;
    return v;
}

std::unique_ptr<Embedder> make_embedder_from_spec(std::string_view spec) {
    if (spec == "hashed") return std::make_unique<HashedBowEmbedder>();
    if (spec.starts_with("hashed:")) {
        std::string dim(spec.substr(7));
        std::size_t parsed = 0;
        try {
            parsed = std::stoul(dim);
        } catch (const std::exception&) {
            throw Error(Errc::Config, "bad embedder spec '" + std::string(spec) + "'");
        }
        return std::make_unique<HashedBowEmbedder>(parsed);
    }
    throw Error(Errc::Config, "unsupported embedder spec '" + std::string(spec) + "'");
}

// ---------------------------------------------------------------------------
// DenseIndex

DenseIndex::DenseIndex(ChunkStore store, std::shared_ptr<const Embedder> embedder, std::vector<double> matrix)
    : store_(std::move(store)), embedder_(std::move(embedder)), matrix_(std::move(matrix)) {}

DenseIndex DenseIndex::build(ChunkStore store, std::shared_ptr<const Embedder> embedder) {
    if (!embedder) throw Error(Errc::InvalidArgument, "null embedder");
    if (store.empty()) throw Error(Errc::EmptyStore, "cannot index an empty chunk store");
    const std::size_t d = embedder->dimension();
    std::vector<double> matrix;
    matrix.reserve(store.size() * d);
    for (const auto& chunk : store.chunks()) {
        auto v = embedder->embed(chunk.text);
        if (v.dimension() != d) throw Error(Errc::ProviderFailure, "embedder returned wrong dimension");
        matrix.insert(matrix.end(), v.values.begin(), v.values.end());
    }
    return DenseIndex(std::move(store), std::move(embedder), std::move(matrix));
}

std::span<const double> DenseIndex::embedding(std::size_t position) const {
    const std::size_t d = embedder_->dimension();
    return std::span<const double>(matrix_).subspan(position * d, d);
}

std::vector<RetrievalHit> DenseIndex::search(std::string_view query, std::size_t k) const {
    return search_excluding(query, k, {});
}

std::vector<RetrievalHit> DenseIndex::search_excluding(std::string_view query, std::size_t k,
                                                       const std::unordered_set<std::string>& exclude) const {
    if (query.empty()) throw Error(Errc::EmptyQuery, "empty query");
    if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
    return search_vector(embedder_->embed(query), k, &exclude);
}

std::vector<RetrievalHit> DenseIndex::search_vector(const EmbeddingVector& query, std::size_t k,
                                                    const std::unordered_set<std::string>* exclude) const {
    if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
    const std::size_t d = embedder_->dimension();
    if (query.dimension() != d) throw Error(Errc::InvalidArgument, "query dimension mismatch");

    const auto& chunks = store_.chunks();
    std::vector<std::size_t> candidates;
    std::vector<double> scores(chunks.size(), 0.0);
    candidates.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (exclude != nullptr && exclude->contains(chunks[i].id)) continue;
        const double* row = matrix_.data() + i * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += row[j] * query.values[j];
        scores[i] = s;
        candidates.push_back(i);
    }

    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return chunks[a].id < chunks[b].id;
    };
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);

    std::vector<RetrievalHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        std::size_t i = candidates[r];
        hits.push_back({chunks[i].id, scores[i], static_cast<int>(r + 1)});
    }
    return hits;
}

// Index file: little-endian.
//   "HRIX" | u32 version | u32 dim | str embedder_spec | u64 count
//   count x { str id | str text | str source_id | u32 n_meta | n_meta x (str, str) | f64[dim] }
// where str = u32 byte length followed by the bytes.

namespace {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

constexpr char kMagic[4] = {'H', 'R', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_str(std::ofstream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error(Errc::Format, "truncated index file");
    return value;
}

std::string get_str(std::ifstream& in) {
    auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw Error(Errc::Format, "truncated index file");
    return s;
}

}  // namespace

void DenseIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    const std::size_t d = embedder_->dimension();
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    put_str(out, embedder_->spec());
    put<std::uint64_t>(out, store_.size());
    for (std::size_t i = 0; i < store_.size(); ++i) {
        const auto& c = store_.chunks()[i];
        put_str(out, c.id);
        put_str(out, c.text);
        put_str(out, c.source_id);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(c.meta.size()));
        for (const auto& [k, v] : c.meta) {
            put_str(out, k);
            put_str(out, v);
        }
        out.write(reinterpret_cast<const char*>(matrix_.data() + i * d),
                  static_cast<std::streamsize>(d * sizeof(double)));
    }
    if (!out) throw Error(Errc::Io, "failed writing " + path.string());
}

DenseIndex DenseIndex::load(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder) {
    if (!embedder) throw Error(Errc::InvalidArgument, "null embedder");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::Format, path.string() + ": not an index file");
    if (get<std::uint32_t>(in) != kVersion) throw Error(Errc::Format, path.string() + ": unsupported version");
    const auto d = get<std::uint32_t>(in);
    const auto spec = get_str(in);
    if (spec != embedder->spec() || d != embedder->dimension()) {
        throw Error(Errc::Config, path.string() + ": index built with '" + spec + "', configured embedder is '" +
                                      embedder->spec() + "'");
    }
    const auto count = get<std::uint64_t>(in);
    ChunkStore store;
    std::vector<double> matrix(count * d);
    for (std::uint64_t i = 0; i < count; ++i) {
        Chunk c;
        c.id = get_str(in);
        c.text = get_str(in);
        c.source_id = get_str(in);
        auto n_meta = get<std::uint32_t>(in);
        for (std::uint32_t m = 0; m < n_meta; ++m) {
            auto k = get_str(in);
            c.meta[k] = get_str(in);
        }
        in.read(reinterpret_cast<char*>(matrix.data() + i * d), static_cast<std::streamsize>(d * sizeof(double)));
        if (!in) throw Error(Errc::Format, "truncated index file");
        store.add(std::move(c));
    }
    if (store.empty()) throw Error(Errc::EmptyStore, path.string() + ": empty index");
    return DenseIndex(std::move(store), std::move(embedder), std::move(matrix));
}

}  // namespace hoprag
