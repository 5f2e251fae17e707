#include "impactir/eval.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "impactir/toy.hpp"

using namespace impactir;

namespace {

Run run_of(const std::map<std::string, std::vector<std::string>>& ranked)
{
    Run run;
    for (const auto& [qid, docs] : ranked) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            run[qid].push_back({qid, docs[i], static_cast<int>(i + 1), static_cast<double>(docs.size() - i), "t"});
        }
    }
    return run;
}

}  // namespace

TEST(Mrr, ThreeQueryFixture)
{
    Qrels qrels{{"q1", {{"a", 1}}}, {"q2", {{"b", 1}}}, {"q3", {{"c", 1}}}};
    auto run = run_of({{"q1", {"a", "x"}}, {"q2", {"x", "b"}}, {"q3", {"x", "y"}}});
    EXPECT_NEAR(mrr_at(run, qrels), 0.5, 1e-12);
}

TEST(Mrr, RankThreeAndCutoff)
{
    Qrels qrels{{"q", {{"r", 2}}}};
    EXPECT_NEAR(mrr_at(run_of({{"q", {"x", "y", "r"}}}), qrels), 1.0 / 3.0, 1e-12);
    std::vector<std::string> long_list(10, "");
    for (int i = 0; i < 10; ++i) {
        long_list[static_cast<std::size_t>(i)] = "n" + std::to_string(i);
    }
    long_list.push_back("r");
    EXPECT_EQ(mrr_at(run_of({{"q", long_list}}), qrels), 0.0);
    EXPECT_EQ(mrr_at(run_of({{"q", {"r"}}}), qrels, 10, 3), 0.0);
}

TEST(Mrr, QueriesMissingFromRunCountAsZero)
{
    Qrels qrels{{"q1", {{"a", 1}}}, {"q2", {{"b", 1}}}};
    auto run = run_of({{"q1", {"a"}}, {"q9", {"b"}}});
    EXPECT_NEAR(mrr_at(run, qrels), 0.5, 1e-12);
}

TEST(Ndcg, Fixture)
{
    Qrels qrels{{"q", {{"d1", 3}, {"d2", 1}}}};
    EXPECT_NEAR(ndcg_at(run_of({{"q", {"d2", "d1"}}}), qrels), 0.7098097413968655, 1e-9);
    EXPECT_NEAR(ndcg_at(run_of({{"q", {"d1", "d2"}}}), qrels), 1.0, 1e-15);
    EXPECT_EQ(ndcg_at(run_of({{"q", {"x", "y"}}}), qrels), 0.0);
}

TEST(Ndcg, ZeroIdealContributesZero)
{
    Qrels qrels{{"q1", {{"a", 0}}}, {"q2", {{"b", 1}}}};
    auto run = run_of({{"q1", {"a"}}, {"q2", {"b"}}});
    EXPECT_NEAR(ndcg_at(run, qrels), 0.5, 1e-15);
}

TEST(Recall, Definition)
{
    Qrels qrels{{"q", {{"a", 1}, {"b", 1}}}, {"empty", {{"c", 0}}}};
    EXPECT_NEAR(recall_at(run_of({{"q", {"a", "x"}}}), qrels, 10), 0.5, 1e-15);
    EXPECT_NEAR(recall_at(run_of({{"q", {"b", "a"}}}), qrels, 10), 1.0, 1e-15);
    EXPECT_NEAR(recall_at(run_of({{"q", {"x", "a", "b"}}}), qrels, 2), 0.5, 1e-15);
    EXPECT_THROW(recall_at(impactir::Run{}, qrels, 0), ValidationError);
}

TEST(Metrics, BoundedAndRecallMonotoneOnFuzzedRuns)
{
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        Qrels qrels;
        impactir::Run run;
        const auto nq = 1 + uniform_below(rng, 8);
        for (std::uint64_t q = 0; q < nq; ++q) {
            const auto qid = "q" + std::to_string(q);
            for (std::uint64_t j = 0; j < uniform_below(rng, 6); ++j) {
                qrels[qid]["d" + std::to_string(uniform_below(rng, 1500))] = static_cast<int>(uniform_below(rng, 4));
            }
            std::vector<int> docs(1500);
            std::iota(docs.begin(), docs.end(), 0);
            shuffle(std::span(docs), rng);
            const auto depth = uniform_below(rng, 1200);
            for (std::uint64_t i = 0; i < depth; ++i) {
                run[qid].push_back({qid, "d" + std::to_string(docs[i]), static_cast<int>(i + 1), 0.0, "t"});
            }
        }
        auto report = evaluate(run, qrels);
        EXPECT_GE(report.mrr_at_10, 0.0);
        EXPECT_LE(report.mrr_at_10, 1.0);
        EXPECT_GE(report.ndcg_at_10, 0.0);
        EXPECT_LE(report.ndcg_at_10, 1.0 + 1e-12);
        double previous = 0.0;
        for (int d : kRecallDepths) {
            const double r = report.recall_at.at(d);
            EXPECT_GE(r, previous);
            EXPECT_LE(r, 1.0);
            previous = r;
        }
    }
}

TEST(TrecRun, WriteAndParseBack)
{
    auto run = run_of({{"q1", {"a", "b"}}, {"q2", {}}});
    std::ostringstream out;
    write_trec_run(run, out);
    EXPECT_EQ(out.str(), "q1 Q0 a 1 2 t\nq1 Q0 b 2 1 t\n");
    std::istringstream in(out.str());
    auto back = read_trec_run(in);
    ASSERT_EQ(back.at("q1").size(), 2U);
    EXPECT_EQ(back.at("q1")[1].doc_id, "b");
    EXPECT_EQ(back.at("q1")[1].rank, 2);
    std::ostringstream empty;
    write_trec_run(impactir::Run{}, empty);
    EXPECT_TRUE(empty.str().empty());
    std::istringstream bad("q1 Q0 a x 1 t\n");
    EXPECT_THROW(read_trec_run(bad), ParseError);
}

TEST(TrecRun, EntriesFromSearchResult)
{
    ImpactIndex index;
    index.num_docs = 3;
    index.doc_table = {"zeta", "alpha", "mid"};
    TopKResult r{{{2, 9}, {0, 5}, {1, 5}}, 10};
    auto e = to_run_entries("q", r, index, "tag");
    ASSERT_EQ(e.size(), 3U);
    EXPECT_EQ(e[0].doc_id, "mid");
    EXPECT_EQ(e[1].doc_id, "alpha");
    EXPECT_EQ(e[2].doc_id, "zeta");
    EXPECT_EQ(e[2].rank, 3);
}

TEST(ResponseTime, CountsAndMonotoneWork)
{
    toy::SyntheticIndexConfig cfg;
    cfg.num_docs = 2000;
    auto index = toy::make_synthetic_index(cfg);
    Rng rng(2);
    std::vector<Query> queries;
    for (int i = 0; i < 20; ++i) {
        queries.push_back(toy::random_query(rng, 60, 3, "q" + std::to_string(i)));
    }
    auto a = measure_mrt(index, queries, 10, 3);
    EXPECT_EQ(a.timings, 60U);
    EXPECT_GT(a.mrt_ms, 0.0);
    auto b = measure_mrt(index, queries, 20, 3);
    EXPECT_GE(b.postings_touched, a.postings_touched);
    EXPECT_THROW(measure_mrt(index, {}, 10, 1), ValidationError);
    EXPECT_THROW(measure_mrt(index, queries, 10, 0), ValidationError);
}
