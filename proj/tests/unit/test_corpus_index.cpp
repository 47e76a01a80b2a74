#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "hoprag/corpus_index.hpp"
#include "hoprag/jsonl.hpp"
#include "hoprag/error.hpp"
#include "test_support.hpp"

using namespace hoprag;
using hoprag::testing::chunk;
using hoprag::testing::index_of;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no hoprag::Error thrown";
    return Errc::Io;
}

std::vector<Chunk> kgot_chunks() {
    return {chunk("c1", "KGOT is a radio station in Anchorage; its studios are in the Dimond Center."),
            chunk("c2", "Dimond Center is the largest shopping mall in Alaska."),
            chunk("c3", "Orbital mechanics describes the motion of satellites."),
            chunk("c4", "Anchorage is a city in Alaska.")};
}

}  // namespace

TEST(ChunkStore, IngestKeepsOrderAndLooksUpById) {
    auto store = ChunkStore::ingest(kgot_chunks());
    ASSERT_EQ(store.size(), 4u);
    EXPECT_EQ(store.chunks()[2].id, "c3");
    EXPECT_EQ(store.at("c2").text, "Dimond Center is the largest shopping mall in Alaska.");
    EXPECT_TRUE(store.contains("c4"));
    EXPECT_EQ(store.find("nope"), nullptr);
    EXPECT_EQ(code_of([&] { (void)store.at("nope"); }), Errc::InvalidArgument);
}

TEST(ChunkStore, DuplicateIdLeavesStoreUnchanged) {
    auto store = ChunkStore::ingest(kgot_chunks());
    EXPECT_EQ(code_of([&] { store.add(chunk("c1", "again")); }), Errc::DuplicateId);
    EXPECT_EQ(store.size(), 4u);
    std::vector<Chunk> dup{chunk("a", "x"), chunk("b", "y"), chunk("a", "z")};
    EXPECT_EQ(code_of([&] { ChunkStore::ingest(dup); }), Errc::DuplicateId);
}

TEST(ChunkStore, EmptyTextRejected) {
    std::vector<Chunk> bad{chunk("a", "x"), chunk("b", "")};
    EXPECT_EQ(code_of([&] { ChunkStore::ingest(bad); }), Errc::EmptyText);
}

TEST(CorpusJsonl, MalformedLineReportsLineNumber) {
    auto dir = hoprag::testing::scratch_dir("corpus_bad");
    std::ofstream(dir / "c.jsonl") << "{\"id\": \"a\", \"text\": \"x\"}\n\n{\"id\": \"b\", \"text\": \n";
    try {
        load_corpus_jsonl(dir / "c.jsonl");
        FAIL() << "expected a format error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Format);
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(CorpusJsonl, ReadsMetaAndSource) {
    auto dir = hoprag::testing::scratch_dir("corpus_meta");
    std::ofstream(dir / "c.jsonl") << R"({"id": "a", "text": "x y", "source_id": "doc1", "meta": {"title": "X"}})"
                                   << "\n";
    auto chunks = load_corpus_jsonl(dir / "c.jsonl");
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].source_id, "doc1");
    EXPECT_EQ(chunks[0].meta.at("title"), "X");
}

TEST(HashedBowEmbedder, MatchesReferenceImplementation) {
    // Frozen from tests/oracles/hashed_bow.py.
    EXPECT_EQ(HashedBowEmbedder::fnv1a64(""), 14695981039346656037ULL);
    EXPECT_EQ(HashedBowEmbedder::fnv1a64("a"), 12638187200555641996ULL);
    EXPECT_EQ(HashedBowEmbedder::fnv1a64("dimond"), 9197577996677154528ULL);

    HashedBowEmbedder e;
    auto v = e.embed("Dimond Center");
    ASSERT_EQ(v.dimension(), 256u);
    EXPECT_DOUBLE_EQ(v.values[196], 0.7071067811865475);
    EXPECT_DOUBLE_EQ(v.values[224], -0.7071067811865475);

    HashedBowEmbedder small(16);
    auto w = small.embed("the the cat");
    EXPECT_DOUBLE_EQ(w.values[7], -0.4472135954999579);
    EXPECT_DOUBLE_EQ(w.values[12], -0.8944271909999159);

    // No word characters: the raw text is hashed instead.
    auto p = e.embed("...");
    EXPECT_DOUBLE_EQ(p.values[25], -1.0);
}

TEST(HashedBowEmbedder, CosineValuesMatchReference) {
    HashedBowEmbedder e;
    EXPECT_DOUBLE_EQ(cosine(e.embed("How large is Dimond Center?"),
                            e.embed("Dimond Center is the largest shopping mall in Alaska.")),
                     0.44721359549995787);
    EXPECT_DOUBLE_EQ(cosine(e.embed("Dimond Center"), e.embed("dimond CENTER!")), 0.9999999999999998);
    EXPECT_DOUBLE_EQ(cosine(e.embed("orbital mechanics"), e.embed("Dimond Center")), 0.0);
    HashedBowEmbedder e64(64);
    EXPECT_DOUBLE_EQ(cosine(e64.embed("orbital mechanics"), e64.embed("orbital period of a satellite")),
                     0.3162277660168379);
}

TEST(HashedBowEmbedder, TokensAreLowercasedAlnumRuns) {
    EXPECT_EQ(HashedBowEmbedder::hash_tokens("KGOT's 101.3-FM, Dimond"),
              (std::vector<std::string>{"kgot", "s", "101", "3", "fm", "dimond"}));
    EXPECT_EQ(code_of([] { HashedBowEmbedder().embed(""); }), Errc::EmptyText);
    EXPECT_EQ(code_of([] { HashedBowEmbedder(0); }), Errc::InvalidArgument);
}

TEST(HashedBowEmbedder, OutputHasUnitNorm) {
    HashedBowEmbedder e(32);
    std::mt19937_64 rng(5);
    const std::string alphabet = "abcdefgh ,.!?";
    for (int n = 0; n < 200; ++n) {
        std::string text(1 + rng() % 40, ' ');
        for (auto& c : text) c = alphabet[rng() % alphabet.size()];
        EXPECT_NEAR(e.embed(text).norm(), 1.0, 1e-12) << text;
    }
}

TEST(EmbedderSpec, ParsesHashedSpecs) {
    EXPECT_EQ(make_embedder_from_spec("hashed")->spec(), "hashed:256");
    EXPECT_EQ(make_embedder_from_spec("hashed:64")->dimension(), 64u);
    EXPECT_EQ(code_of([] { make_embedder_from_spec("hashed:x"); }), Errc::Config);
    EXPECT_EQ(code_of([] { make_embedder_from_spec("bert"); }), Errc::Config);
}

TEST(DenseIndex, BridgeEntityQueryFindsItsChunkFirst) {
    auto index = index_of(kgot_chunks());
    auto hits = index.search("How large is Dimond Center?", 2);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].chunk_id, "c2");
    EXPECT_EQ(hits[0].rank, 1);
    EXPECT_EQ(hits[1].rank, 2);
    EXPECT_GE(hits[0].score, hits[1].score);
}

TEST(DenseIndex, KLargerThanCorpusReturnsEverything) {
    auto index = index_of(kgot_chunks());
    EXPECT_EQ(index.search("Alaska", 50).size(), 4u);
}

TEST(DenseIndex, ErrorsOnBadInput) {
    auto index = index_of(kgot_chunks());
    EXPECT_EQ(code_of([&] { index.search("", 3); }), Errc::EmptyQuery);
    EXPECT_EQ(code_of([&] { index.search("x", 0); }), Errc::InvalidArgument);
    EXPECT_EQ(code_of([] { DenseIndex::build(ChunkStore{}, std::make_shared<HashedBowEmbedder>()); }),
              Errc::EmptyStore);
}

TEST(DenseIndex, ExcludedChunksAreNeverReturned) {
    auto index = index_of(kgot_chunks());
    auto hits = index.search_excluding("Dimond Center Alaska", 4, {"c2", "c4"});
    ASSERT_EQ(hits.size(), 2u);
    for (const auto& h : hits) EXPECT_TRUE(h.chunk_id != "c2" && h.chunk_id != "c4");
    EXPECT_TRUE(index.search_excluding("Alaska", 3, {"c1", "c2", "c3", "c4"}).empty());
}

TEST(DenseIndex, TiesBreakByAscendingId) {
    std::vector<Chunk> same{chunk("b", "same words"), chunk("c", "same words"), chunk("a", "same words")};
    auto hits = index_of(same).search("same words", 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].chunk_id, "a");
    EXPECT_EQ(hits[1].chunk_id, "b");
    EXPECT_EQ(hits[2].chunk_id, "c");
}

TEST(DenseIndex, SaveLoadRoundTripIsByteStable) {
    auto dir = hoprag::testing::scratch_dir("index_roundtrip");
    auto chunks = kgot_chunks();
    chunks[0].source_id = "KGOT";
    chunks[0].meta["title"] = "KGOT";
    auto index = index_of(chunks);
    index.save(dir / "a.hrix");
    auto loaded = DenseIndex::load(dir / "a.hrix", std::make_shared<HashedBowEmbedder>());
    loaded.save(dir / "b.hrix");
    EXPECT_EQ(read_text_file(dir / "a.hrix"), read_text_file(dir / "b.hrix"));
    EXPECT_EQ(loaded.store().at("c1").meta.at("title"), "KGOT");
    for (const auto* q : {"Dimond Center", "orbital satellites", "Anchorage Alaska city"}) {
        auto a = index.search(q, 4);
        auto b = loaded.search(q, 4);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].chunk_id, b[i].chunk_id);
            EXPECT_EQ(a[i].score, b[i].score);
        }
    }
}

TEST(DenseIndex, LoadRejectsMismatchedEmbedderAndGarbage) {
    auto dir = hoprag::testing::scratch_dir("index_bad");
    index_of(kgot_chunks()).save(dir / "a.hrix");
    EXPECT_EQ(code_of([&] { DenseIndex::load(dir / "a.hrix", std::make_shared<HashedBowEmbedder>(64)); }),
              Errc::Config);
    std::ofstream(dir / "junk.hrix") << "not an index";
    EXPECT_EQ(code_of([&] { DenseIndex::load(dir / "junk.hrix", std::make_shared<HashedBowEmbedder>()); }),
              Errc::Format);
    EXPECT_EQ(code_of([&] { DenseIndex::load(dir / "missing.hrix", std::make_shared<HashedBowEmbedder>()); }),
              Errc::Io);
}
