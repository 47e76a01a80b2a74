#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hoprag/error.hpp"
#include "hoprag/evaluation.hpp"
#include "metric_cases.hpp"
#include "pipeline.hpp"
#include "test_support.hpp"

using namespace hoprag;
using hoprag::testing::fixtures_dir;
using hoprag::testing::LoadedPipeline;

TEST(Metrics, MatchReferenceTable) {
    ASSERT_GE(std::size(hoprag::testing::kMetricCases), 50u);
    for (const auto& c : hoprag::testing::kMetricCases) {
        EXPECT_EQ(exact_match(c.prediction, c.gold), c.em) << c.prediction << " | " << c.gold;
        EXPECT_NEAR(token_f1(c.prediction, c.gold), c.f1, 1e-9) << c.prediction << " | " << c.gold;
    }
    for (const auto& c : hoprag::testing::kRecallCases) {
        EXPECT_EQ(recall_at_k(c.retrieved, c.oracle), c.recall);
    }
}

TEST(Metrics, Normalization) {
    EXPECT_EQ(normalize_answer("  The Neva, River! "), "neva river");
    EXPECT_EQ(normalize_answer("An apple a day"), "apple day");
    EXPECT_EQ(normalize_answer("theater"), "theater");
    EXPECT_EQ(normalize_answer(""), "");
    EXPECT_NEAR(token_f1("b c d", "c d e"), 2.0 / 3.0, 1e-12);
}

TEST(Metrics, RecallNeedsOracle) {
    std::vector<std::string> r{"a"};
    try {
        recall_at_k(r, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyOracle);
    }
}

TEST(Metrics, F1PropertiesOnRandomBags) {
    const std::vector<std::string> vocab{"rome", "paris", "river", "neva", "salce", "x", "y", "1922"};
    std::mt19937_64 rng(3);
    auto bag = [&] {
        std::string s;
        std::size_t n = rng() % 5;
        for (std::size_t i = 0; i < n; ++i) s += vocab[rng() % vocab.size()] + " ";
        return s;
    };
    for (int i = 0; i < 500; ++i) {
        auto a = bag(), b = bag();
        double f = token_f1(a, b);
        EXPECT_DOUBLE_EQ(f, token_f1(b, a));
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
        EXPECT_EQ(token_f1(a, a), 1.0);
        if (exact_match(a, b)) {
            EXPECT_EQ(f, 1.0);
        }
        // A word added to both sides adds one to the overlap: 2(c+1)/(n+2) >= 2c/n.
        EXPECT_GE(token_f1(a + " neva", b + " neva") + 1e-12, f);
    }
}

TEST(Strategies, ParseNames) {
    EXPECT_EQ(parse_strategy("direct_r"), StrategyId::DirectR);
    EXPECT_EQ(parse_strategy("oneshot_decompose"), StrategyId::OneshotDecompose);
    EXPECT_EQ(parse_strategy("efficient_iterative"), StrategyId::EfficientIterative);
    EXPECT_STREQ(to_string(StrategyId::OneshotDecompose), "oneshot_decompose");
    EXPECT_THROW(parse_strategy("bm25"), Error);
}

TEST(Strategies, MicroFixtureOutcomes) {
    LoadedPipeline p(fixtures_dir() / "micro/config.json");
    const auto& qa = p.rows.at(0);

    auto direct = run_question(StrategyId::DirectR, qa, p.components(), p.strategy());
    EXPECT_FALSE(direct.error);
    EXPECT_EQ(direct.retrieved_ids.size(), 4u);
    EXPECT_EQ(direct.llm_calls, 1);
    EXPECT_EQ(direct.iterations, 0);

    auto iter = run_question(StrategyId::EfficientIterative, qa, p.components(), p.strategy());
    ASSERT_FALSE(iter.error) << *iter.error;
    EXPECT_EQ(iter.retrieved_ids, (std::vector<std::string>{"c01", "c02"}));
    EXPECT_EQ(iter.prediction, "1,100,000 square feet");
    EXPECT_EQ(iter.llm_calls, 1);
    EXPECT_EQ(iter.iterations, 2);
    ASSERT_TRUE(iter.hops);
    EXPECT_EQ(iter.k_used, static_cast<double>(iter.hops->chunks_tagged));

    auto row = score_outcome(iter, qa, p.judge.get());
    EXPECT_EQ(row.em, 1);
    EXPECT_EQ(row.f1, 1.0);
    EXPECT_EQ(row.acc, 1);
    EXPECT_EQ(row.recall_at_k, 1.0);
    EXPECT_FALSE(row.failed);
}

TEST(Strategies, OneshotDecomposeUnionsSubQuestionHits) {
    LoadedPipeline p(fixtures_dir() / "ordering/config.json");
    auto out = run_question(StrategyId::OneshotDecompose, p.rows.at(0), p.components(), p.strategy());
    ASSERT_FALSE(out.error) << *out.error;
    EXPECT_EQ(out.sub_questions.size(), 2u);
    EXPECT_EQ(out.llm_calls, 2);
    EXPECT_EQ(out.iterations, 1);
    std::set<std::string> distinct(out.retrieved_ids.begin(), out.retrieved_ids.end());
    EXPECT_EQ(distinct.size(), out.retrieved_ids.size());
    EXPECT_LE(out.retrieved_ids.size(), 2 * p.config.decompose_k);
    EXPECT_EQ(out.k_used, static_cast<double>(out.retrieved_ids.size()));
}

TEST(Strategies, ErrorsLandInOutcome) {
    LoadedPipeline p(fixtures_dir() / "ordering/config.json");
    QaPair unknown{"u", "A question the mock has no script for?", "x", {"a1"}, std::nullopt};
    auto out = run_question(StrategyId::DirectR, unknown, p.components(), p.strategy());
    ASSERT_TRUE(out.error);
    auto row = score_outcome(out, unknown);
    EXPECT_TRUE(row.failed);
    EXPECT_EQ(row.em, 0);
    EXPECT_EQ(row.f1, 0.0);
    EXPECT_FALSE(row.acc);

    auto j = QuestionOutcome::from_json(Json::parse(out.to_json().dump()));
    EXPECT_EQ(j.error, out.error);
    EXPECT_EQ(j.strategy, StrategyId::DirectR);
}

TEST(Strategies, OrderingFixtureBench) {
    LoadedPipeline p(fixtures_dir() / "ordering/config.json");
    auto direct = run_strategy(StrategyId::DirectR, p.rows, p.components(), p.strategy());
    auto oneshot = run_strategy(StrategyId::OneshotDecompose, p.rows, p.components(), p.strategy());
    auto iter = run_strategy(StrategyId::EfficientIterative, p.rows, p.components(), p.strategy());
    EXPECT_EQ(*direct.report.recall_at_k, 0.5);
    EXPECT_EQ(direct.report.k_used, 6.0);
    EXPECT_EQ(*oneshot.report.recall_at_k, 0.5);
    EXPECT_NEAR(oneshot.report.k_used, 23.0 / 3.0, 1e-12);
    EXPECT_EQ(*iter.report.recall_at_k, 1.0);
    EXPECT_EQ(iter.report.k_used, 5.0);
    EXPECT_EQ(iter.report.llm_calls, 1.0);
    EXPECT_EQ(oneshot.report.llm_calls, 2.0);
    EXPECT_EQ(iter.report.em, 1.0);
    EXPECT_EQ(iter.rows[0].id, "silent");
    EXPECT_EQ(iter.rows[2].id, "arlo");
}

TEST(Strategies, ParallelRunsKeepDatasetOrderAndResults) {
    LoadedPipeline p(fixtures_dir() / "ordering/config.json");
    auto serial = run_strategy(StrategyId::EfficientIterative, p.rows, p.components(), p.strategy());
    auto cfg = p.strategy();
    cfg.parallel = 3;
    auto parallel = run_strategy(StrategyId::EfficientIterative, p.rows, p.components(), cfg);
    ASSERT_EQ(serial.rows.size(), parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        EXPECT_EQ(serial.outcomes[i].id, parallel.outcomes[i].id);
        EXPECT_EQ(serial.outcomes[i].retrieved_ids, parallel.outcomes[i].retrieved_ids);
        EXPECT_EQ(serial.rows[i].f1, parallel.rows[i].f1);
    }
}

TEST(Aggregate, MeansAndOptionalColumns) {
    std::vector<EvalRow> rows(2);
    rows[0].em = 1;
    rows[0].f1 = 1.0;
    rows[0].acc = 1;
    rows[0].recall_at_k = 1.0;
    rows[0].k_used = 4;
    rows[0].llm_calls = 1;
    rows[1].f1 = 0.5;
    rows[1].failed = true;
    rows[1].k_used = 6;
    rows[1].llm_calls = 2;
    auto r = aggregate(rows);
    EXPECT_EQ(r.rows, 2u);
    EXPECT_EQ(r.failed_rows, 1u);
    EXPECT_EQ(r.em, 0.5);
    EXPECT_EQ(r.f1, 0.75);
    EXPECT_EQ(r.acc, 1.0);
    EXPECT_EQ(r.recall_at_k, 1.0);
    EXPECT_EQ(r.k_used, 5.0);
    EXPECT_EQ(r.llm_calls, 1.5);

    std::vector<EvalRow> bare(1);
    auto b = aggregate(bare);
    EXPECT_FALSE(b.acc);
    EXPECT_FALSE(b.recall_at_k);
    EXPECT_THROW(aggregate(std::vector<EvalRow>{}), Error);
}

TEST(Aggregate, CsvLayout) {
    AggregateReport r;
    r.rows = 3;
    r.em = 1.0 / 3.0;
    r.f1 = 0.5;
    r.recall_at_k = 1.0;
    r.k_used = 5;
    r.llm_calls = 1;
    r.iterations = 2;
    auto csv = aggregate_csv({{"efficient_iterative", r}});
    EXPECT_EQ(csv,
              "method,rows,failed_rows,recall_at_k,k,em,f1,acc,llm_calls,iterations,latency_s\n"
              "efficient_iterative,3,0,1.000000,5.000000,0.333333,0.500000,,1.000000,2.000000,0.000000\n");
}
