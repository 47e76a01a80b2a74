#include <gtest/gtest.h>

#include "hoprag/error.hpp"
#include "hoprag/hop_engine.hpp"
#include "test_support.hpp"

using namespace hoprag;
using hoprag::testing::chunk;
using hoprag::testing::fixtures_dir;

namespace {

const std::string kQuestion = "How large is the shopping mall where KGOT radio station has its studios?";

struct Micro {
    DenseIndex index = DenseIndex::build(ChunkStore::ingest(load_corpus_jsonl(fixtures_dir() / "micro/corpus.jsonl")),
                                         std::make_shared<HashedBowEmbedder>());
    OracleLabeler labeler =
        OracleLabeler::from_jsonl(fixtures_dir() / "micro/labels.jsonl", OracleLabeler::Unlisted::Terminate);
    OracleFilter filter = OracleFilter::from_jsonl(fixtures_dir() / "micro/filters.jsonl");
    IndexRetriever retriever{index};
};

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no hoprag::Error thrown";
    return Errc::Io;
}

/// Labels every chunk CONTINUE with its first word and always asks the same
/// next query, to exercise deduplication and the iteration cap.
class EchoLabeler final : public Labeler {
public:
    LabelOutcome label_and_tag(std::string_view, const Chunk& c) const override {
        auto tokens = tokenize_words(c.text);
        std::vector<bool> mask(tokens.size(), false);
        mask[0] = true;
        return {ChunkTag::Continue, mask, span_from_mask(c.text, tokens, mask)};
    }
};

class FixedFilter final : public QueryFilter {
public:
    explicit FixedFilter(std::string q) : q_(std::move(q)) {}
    std::string next_query(const FilterInput&) const override { return q_; }

private:
    std::string q_;
};

EngineConfig config(int k, int iters) {
    EngineConfig c;
    c.k_per_hop = k;
    c.max_iterations = iters;
    return c;
}

}  // namespace

TEST(HopLoop, MicroCorpusFollowsTheBridgeEntity) {
    Micro m;
    auto result = run(kQuestion, m.retriever, m.labeler, m.filter, config(4, 4));
    EXPECT_EQ(result.pool.chunk_ids(), (std::vector<std::string>{"c01", "c02"}));
    const auto& t = result.trace;
    EXPECT_EQ(t.iterations_run, 2);
    EXPECT_EQ(t.retrieval_calls, 2);
    EXPECT_EQ(t.frontier_nodes, 2);
    EXPECT_EQ(t.generator_llm_calls, 0);
    ASSERT_EQ(t.iterations.size(), 2u);

    const auto& first = t.iterations[0].queries.at(0);
    EXPECT_EQ(first.node.text, kQuestion);
    const auto& c01 = first.chunks.back();
    EXPECT_EQ(c01.chunk_id, "c01");
    EXPECT_EQ(c01.tag, ChunkTag::Continue);
    EXPECT_EQ(c01.span_text, "KGOT, in the Dimond Center");
    EXPECT_EQ(c01.next_query, "How large is Dimond Center?");
    EXPECT_TRUE(c01.spawned);

    const auto& second = t.iterations[1].queries.at(0);
    EXPECT_EQ(second.node.text, "How large is Dimond Center?");
    EXPECT_EQ(second.node.depth, 1);
    EXPECT_EQ(second.node.origin_chunk, "c01");
    EXPECT_EQ(second.chunks.front().chunk_id, "c02");
    EXPECT_EQ(second.chunks.front().next_query, "");
    EXPECT_FALSE(second.chunks.front().spawned);
    EXPECT_EQ(result.pool.entries()[1].depth, 1);
    EXPECT_EQ(t.chunks_tagged, t.tagged_chunk_ids().size());
}

TEST(HopLoop, PooledChunksAreNotRetrievedAgain) {
    Micro m;
    auto result = run(kQuestion, m.retriever, m.labeler, m.filter, config(4, 4));
    for (const auto& q : result.trace.iterations[1].queries) {
        for (const auto& c : q.chunks) EXPECT_NE(c.chunk_id, "c01");
    }
}

TEST(HopLoop, MaxIterationsCapsTheLoop) {
    Micro m;
    auto result = run(kQuestion, m.retriever, m.labeler, m.filter, config(4, 1));
    EXPECT_EQ(result.trace.iterations_run, 1);
    EXPECT_EQ(result.pool.chunk_ids(), std::vector<std::string>{"c01"});
}

TEST(HopLoop, RepeatedNextQueriesAreDeduplicated) {
    Micro m;
    EchoLabeler labeler;
    FixedFilter filter("Anchorage Alaska");
    auto cfg = config(2, 5);
    cfg.check_filter_output = false;
    auto result = run(kQuestion, m.retriever, labeler, filter, cfg);
    // Round 1 spawns "Anchorage Alaska" once; round 2 would only repeat it.
    EXPECT_EQ(result.trace.iterations_run, 2);
    EXPECT_EQ(result.trace.frontier_nodes, 2);
    EXPECT_EQ(result.pool.size(), 4u);

    auto no_dedupe = config(2, 3);
    no_dedupe.dedupe_queries = false;
    no_dedupe.check_filter_output = false;
    auto wide = run(kQuestion, m.retriever, labeler, filter, no_dedupe);
    EXPECT_EQ(wide.trace.iterations_run, 3);
}

TEST(HopLoop, ContinueWithoutWordsIsDowngraded) {
    Micro m;
    OracleLabeler labeler(OracleLabeler::Unlisted::Terminate);
    labeler.add(kQuestion, "c01", {ChunkTag::Continue, {}});
    auto result = run(kQuestion, m.retriever, labeler, m.filter, config(4, 4));
    EXPECT_TRUE(result.pool.empty());
    EXPECT_EQ(result.trace.iterations_run, 1);
    const auto& c01 = result.trace.iterations[0].queries[0].chunks.back();
    EXPECT_EQ(c01.tag, ChunkTag::Terminate);
    EXPECT_TRUE(c01.downgraded);
    EXPECT_FALSE(c01.next_query.has_value());
}

TEST(HopLoop, InventedFilterWordsAreRejected) {
    Micro m;
    FixedFilter filter("How big is Dimond Center?");
    EXPECT_EQ(code_of([&] { run(kQuestion, m.retriever, m.labeler, filter, config(4, 4)); }), Errc::ComponentFailure);
    auto lax = config(4, 1);
    lax.check_filter_output = false;
    EXPECT_NO_THROW(run(kQuestion, m.retriever, m.labeler, filter, lax));
}

TEST(HopLoop, ComponentErrorsAreWrapped) {
    Micro m;
    OracleLabeler strict;  // no annotations at all
    try {
        run(kQuestion, m.retriever, strict, m.filter, config(4, 4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ComponentFailure);
        EXPECT_NE(std::string(e.what()).find("labeler failed in iteration 1"), std::string::npos) << e.what();
    }
    EXPECT_EQ(code_of([&] { run("", m.retriever, m.labeler, m.filter); }), Errc::InvalidArgument);
    EXPECT_EQ(code_of([&] { run(kQuestion, m.retriever, m.labeler, m.filter, config(0, 4)); }), Errc::InvalidArgument);
}

TEST(Answer, OneGeneratorCallOverThePool) {
    Micro m;
    auto result = run(kQuestion, m.retriever, m.labeler, m.filter, config(4, 4));
    auto mock = std::make_shared<ScriptedMockClient>();
    mock->add_match("<Question>: " + kQuestion, "```json\n{\"answer\": \"1,100,000 square feet\"}\n```");
    LlmGateway gw(mock);
    auto prediction = answer(kQuestion, result.pool, m.retriever, gw, {}, &result.trace);
    EXPECT_EQ(prediction, "1,100,000 square feet");
    EXPECT_EQ(result.trace.generator_llm_calls, 1);
    ASSERT_EQ(mock->sent(), 1u);
    auto expected = render_prompt("qa.retrieval.hotpotqa",
                                  {{"knowledge", m.index.store().at("c01").text + "\n" + m.index.store().at("c02").text},
                                   {"question", kQuestion}});
    EXPECT_EQ(mock->prompts()[0], expected);
}

TEST(Answer, EmptyPoolUsesTheDirectPrompt) {
    Micro m;
    auto mock = std::make_shared<ScriptedMockClient>();
    mock->add_match("Q?", "{\"answer\": \"x\"}");
    LlmGateway gw(mock);
    AnswerOptions opts;
    opts.dataset = DatasetId::MuSiQue;
    EXPECT_EQ(answer("Q?", CandidatePool{}, m.retriever, gw, opts), "x");
    EXPECT_EQ(mock->prompts()[0], render_prompt("qa.direct.musique", {{"question", "Q?"}}));
}

TEST(Answer, Failures) {
    Micro m;
    auto mock = std::make_shared<ScriptedMockClient>();
    mock->add_match("prose", "The answer is Rome.");
    LlmGateway gw(mock);
    EXPECT_EQ(code_of([&] { answer("prose?", CandidatePool{}, m.retriever, gw); }), Errc::AnswerParseFailure);
    EXPECT_EQ(code_of([&] { answer("unscripted?", CandidatePool{}, m.retriever, gw); }), Errc::GeneratorFailure);
    EXPECT_EQ(parse_answer("{\"answer\": 1979}"), "1979");
}

TEST(TraceJson, CarriesCountersAndPerChunkRecords) {
    Micro m;
    auto result = run(kQuestion, m.retriever, m.labeler, m.filter, config(4, 4));
    auto j = to_json(result.trace);
    EXPECT_TRUE(j.contains("iterations"));
    for (const char* key : {"generator_llm_calls", "iterations_run", "retrieval_calls", "frontier_nodes", "chunks_tagged",
                            "wall_time_s"}) {
        EXPECT_TRUE(j["counters"].contains(key)) << key;
    }
    EXPECT_EQ(j["counters"]["iterations_run"], 2);
    EXPECT_EQ(j["iterations"][0]["queries"][0]["chunks"][3]["span"], "KGOT, in the Dimond Center");
    auto pool = to_json(result.pool);
    EXPECT_EQ(pool[1]["chunk_id"], "c02");
    EXPECT_EQ(pool[1]["depth"], 1);
}
