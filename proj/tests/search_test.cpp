#include "impactir/search.hpp"

#include <gtest/gtest.h>

#include "impactir/toy.hpp"

using namespace impactir;

namespace {

// Scores every document of the collection by summing the impacts of every
// distinct query term, then sorts by (score desc, doc asc).
TopKResult brute_force(const ImpactIndex& index, const Query& q, std::size_t k)
{
    std::vector<Score> acc(index.num_docs, 0);
    std::set<std::string> terms(q.tokens.begin(), q.tokens.end());
    for (const auto& t : terms) {
        if (const auto* l = index.find(t)) {
            for (const auto& p : l->postings) {
                acc[p.doc] += p.impact;
            }
        }
    }
    std::vector<ScoredEntry> all;
    for (DocId d = 0; d < index.num_docs; ++d) {
        if (acc[d] > 0) {
            all.push_back({d, acc[d]});
        }
    }
    std::sort(all.begin(), all.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return {all, k};
}

ImpactIndex hand_index()
{
    ImpactIndex index;
    index.num_docs = 6;
    index.w_max = 1.0;
    for (int d = 0; d < 6; ++d) {
        index.doc_table.push_back("d" + std::to_string(d));
    }
    index.lexicon["a"] = {"a", {{0, 3}, {2, 7}, {5, 7}}, 7};
    index.lexicon["b"] = {"b", {{1, 2}, {2, 1}}, 2};
    index.lexicon["c"] = {"c", {{0, 9}, {3, 4}, {4, 9}}, 9};
    return index;
}

toy::SyntheticIndexConfig random_config(Rng& rng)
{
    toy::SyntheticIndexConfig cfg;
    cfg.num_docs = 1 + uniform_below(rng, 2000);
    cfg.vocabulary = 1 + uniform_below(rng, 500);
    cfg.doc_length = 1 + uniform_below(rng, 60);
    cfg.term_zipf_s = 0.5 + uniform01(rng);
    cfg.impacts = uniform_below(rng, 2) == 0 ? toy::ImpactDistribution::uniform : toy::ImpactDistribution::zipfian;
    cfg.seed = rng();
    return cfg;
}

}  // namespace

TEST(PrepareQuery, DedupeDropOovAndSort)
{
    auto index = hand_index();
    auto lists = prepare_query(index, Query::from_text("q", "c a a zzz b"));
    ASSERT_EQ(lists.size(), 3U);
    EXPECT_EQ(lists[0]->term, "b");
    EXPECT_EQ(lists[1]->term, "a");
    EXPECT_EQ(lists[2]->term, "c");
    EXPECT_TRUE(prepare_query(index, Query::from_text("q", "x y")).empty());
    EXPECT_EQ(prepare_query(index, Query::from_text("q", "a a b")).size(), 2U);
}

TEST(TopKQueue, KeepsBestUnderTieRule)
{
    TopKQueue q(2);
    EXPECT_EQ(q.threshold(), 0U);
    q.insert({5, 10});
    q.insert({3, 10});
    EXPECT_EQ(q.threshold(), 10U);
    EXPECT_FALSE(q.insert({7, 10}));
    EXPECT_TRUE(q.insert({1, 10}));
    auto r = q.finalize();
    EXPECT_EQ(r.entries, (std::vector<ScoredEntry>{{1, 10}, {3, 10}}));
    EXPECT_THROW(TopKQueue(0), ValidationError);
}

TEST(Exhaustive, EmptyQuery)
{
    auto index = hand_index();
    auto out = exhaustive_daat(index, Query::from_text("q", "nothing"), 5);
    EXPECT_TRUE(out.result.entries.empty());
    EXPECT_EQ(out.stats.postings_touched, 0U);
    EXPECT_TRUE(maxscore_daat(index, Query::from_text("q", ""), 5).result.entries.empty());
}

TEST(Exhaustive, SingleTermIsItsPostingList)
{
    auto index = hand_index();
    auto out = exhaustive_daat(index, Query::from_text("q", "a"), 2);
    EXPECT_EQ(out.result.entries, (std::vector<ScoredEntry>{{2, 7}, {5, 7}}));
    EXPECT_EQ(out.result.k_requested, 2U);
}

TEST(Exhaustive, HandComputedScores)
{
    auto index = hand_index();
    auto out = exhaustive_daat(index, Query::from_text("q", "a b c"), 10);
    std::vector<ScoredEntry> expect{{0, 12}, {4, 9}, {2, 8}, {5, 7}, {3, 4}, {1, 2}};
    EXPECT_EQ(out.result.entries, expect);
    EXPECT_EQ(out.stats.postings_touched, 8U);
    EXPECT_EQ(out.stats.docs_scored, 6U);
    EXPECT_EQ(maxscore_daat(index, Query::from_text("q", "a b c"), 10).result, out.result);
}

TEST(Exhaustive, MatchesBruteForce)
{
    Rng rng(1);
    for (int trial = 0; trial < 60; ++trial) {
        auto cfg = random_config(rng);
        cfg.num_docs = 1 + uniform_below(rng, 300);
        auto index = toy::make_synthetic_index(cfg);
        for (int qi = 0; qi < 5; ++qi) {
            auto q = toy::random_query(rng, cfg.vocabulary + 3, 1 + uniform_below(rng, 8));
            for (std::size_t k : {1, 10, 100}) {
                EXPECT_EQ(exhaustive_daat(index, q, k).result, brute_force(index, q, k));
            }
        }
    }
}

TEST(MaxScore, SafeAgainstExhaustive)
{
    Rng rng(2);
    for (int trial = 0; trial < 80; ++trial) {
        auto cfg = random_config(rng);
        auto index = toy::make_synthetic_index(cfg);
        for (int qi = 0; qi < 6; ++qi) {
            auto q = toy::random_query(rng, cfg.vocabulary, 1 + uniform_below(rng, 8));
            for (std::size_t k : {1, 10, 100}) {
                auto a = maxscore_daat(index, q, k);
                auto b = exhaustive_daat(index, q, k);
                ASSERT_EQ(a.result, b.result) << "trial " << trial << " k " << k;
                EXPECT_LE(a.stats.postings_touched, b.stats.postings_touched);
            }
        }
    }
}

TEST(MaxScore, ManyTiesStaySafe)
{
    // every impact equal, so the k-th score ties with many candidates
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        ImpactIndex index;
        index.num_docs = 200;
        index.w_max = 1.0;
        index.doc_table.resize(200);
        for (int t = 0; t < 5; ++t) {
            PostingList l{"t" + std::to_string(t), {}, 3};
            for (DocId d = 0; d < 200; ++d) {
                if (uniform_below(rng, 3) == 0) {
                    l.postings.push_back({d, 3});
                }
            }
            if (!l.postings.empty()) {
                index.lexicon.emplace(l.term, l);
            }
        }
        auto q = Query::from_text("q", "t0 t1 t2 t3 t4");
        for (std::size_t k : {1, 5, 10, 50}) {
            EXPECT_EQ(maxscore_daat(index, q, k).result, exhaustive_daat(index, q, k).result);
        }
    }
}

TEST(MaxScore, UnionSmallerThanKMatches)
{
    auto index = hand_index();
    auto q = Query::from_text("q", "a c");
    EXPECT_EQ(maxscore_daat(index, q, 100).result, exhaustive_daat(index, q, 100).result);
}

TEST(MaxScore, PrunesOnZipfianCollection)
{
    toy::SyntheticIndexConfig cfg;
    cfg.num_docs = 10000;
    cfg.vocabulary = 500;
    cfg.seed = 11;
    auto index = toy::make_synthetic_index(cfg);
    const toy::ZipfSampler terms(cfg.vocabulary, cfg.term_zipf_s);
    Rng rng(4);
    int fewer = 0;
    for (int i = 0; i < 50; ++i) {
        auto q = toy::zipf_query(rng, terms, 2 + uniform_below(rng, 4));
        if (prepare_query(index, q).size() < 2) {
            continue;
        }
        auto a = maxscore_daat(index, q, 10);
        auto b = exhaustive_daat(index, q, 10);
        fewer += a.stats.postings_touched < b.stats.postings_touched ? 1 : 0;
    }
    EXPECT_GE(fewer, 40);
}

TEST(MaxScore, DeterministicAndMonotoneInK)
{
    toy::SyntheticIndexConfig cfg;
    cfg.num_docs = 3000;
    auto index = toy::make_synthetic_index(cfg);
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        auto q = toy::random_query(rng, 100, 3);
        std::uint64_t previous = 0;
        for (std::size_t k : {1, 10, 100, 1000}) {
            auto a = maxscore_daat(index, q, k);
            auto b = maxscore_daat(index, q, k);
            EXPECT_EQ(a.result, b.result);
            EXPECT_EQ(a.stats.postings_touched, b.stats.postings_touched);
            EXPECT_GE(a.stats.postings_touched, previous);
            previous = a.stats.postings_touched;
        }
    }
}

TEST(PostingCursor, SeekCountsLandings)
{
    PostingList l{"t", {{1, 1}, {4, 1}, {9, 1}, {16, 1}, {25, 1}}, 1};
    std::uint64_t touched = 0;
    PostingCursor c(l, touched);
    EXPECT_EQ(touched, 1U);
    c.seek(10);
    EXPECT_EQ(c.doc(), 16U);
    EXPECT_EQ(touched, 2U);
    c.seek(16);
    EXPECT_EQ(touched, 2U);
    c.seek(26);
    EXPECT_EQ(c.doc(), PostingCursor::kEnd);
    EXPECT_EQ(touched, 2U);
}
