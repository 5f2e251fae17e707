#include "impactir/index.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "impactir/toy.hpp"

using namespace impactir;

namespace {

std::vector<std::string> ids(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back("doc" + std::to_string(i));
    }
    return out;
}

std::vector<DocImpacts> random_impacts(Rng& rng, std::size_t docs, std::size_t vocab)
{
    std::vector<DocImpacts> out(docs);
    for (auto& d : out) {
        std::set<std::string> terms;
        const auto n = uniform_below(rng, 12);
        for (std::uint64_t i = 0; i < n; ++i) {
            terms.insert("term" + std::to_string(uniform_below(rng, vocab)));
        }
        for (const auto& t : terms) {
            // some exact zeros and some tiny values that hit the clamp
            const auto kind = uniform_below(rng, 10);
            const double w = kind == 0 ? 0.0 : kind == 1 ? 1e-6 * uniform01(rng) : 5.0 * uniform01(rng);
            d.emplace_back(t, w);
        }
    }
    return out;
}

}  // namespace

TEST(Varint, RoundTripAndSizes)
{
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = i < 64 ? (std::uint64_t{1} << i) - 1 : rng() >> uniform_below(rng, 64);
        std::vector<std::uint8_t> buf;
        varint::encode(v, buf);
        EXPECT_EQ(buf.size(), varint::encoded_size(v));
        std::size_t pos = 0;
        auto back = varint::decode(buf, pos);
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, v);
        EXPECT_EQ(pos, buf.size());
    }
    std::vector<std::uint8_t> truncated{0x80};
    std::size_t pos = 0;
    EXPECT_FALSE(varint::decode(truncated, pos).has_value());
}

TEST(Quantize, Examples)
{
    EXPECT_EQ(quantize_impact(0.0, 3.0), 0);
    EXPECT_EQ(quantize_impact(3.0, 3.0), 255);
    EXPECT_EQ(quantize_impact(3.0 * 0.001, 3.0), 1);
    EXPECT_EQ(quantize_impact(0.5, 1.0), 128);  // 127.5 rounds up
    EXPECT_THROW(quantize_impact(3.1, 3.0), RangeError);
    EXPECT_THROW(quantize_impact(-0.1, 3.0), RangeError);
    EXPECT_THROW(quantize_impact(0.1, 0.0), RangeError);
}

TEST(Quantize, MonotoneWithBoundedError)
{
    Rng rng(2);
    const double w_max = 7.25;
    std::vector<double> ws(20000);
    for (auto& w : ws) {
        w = w_max * uniform01(rng);
    }
    std::sort(ws.begin(), ws.end());
    int previous = 0;
    for (double w : ws) {
        const int q = quantize_impact(w, w_max);
        EXPECT_GE(q, previous);
        previous = q;
        EXPECT_LE(std::abs(w - dequantize_impact(static_cast<std::uint8_t>(q), w_max)), w_max / 255.0);
    }
}

TEST(ComputeImpacts, OneEntryPerUniqueTerm)
{
    auto doc = merge_expansion(Document::from_text("d", "a b a c"), {"z"});
    std::vector<ExpandedDocument> docs{doc};
    auto zero = compute_collection_impacts(ImpactModel{}, docs);
    ASSERT_EQ(zero.size(), 1U);
    ASSERT_EQ(zero[0].size(), 4U);
    for (const auto& [t, w] : zero[0]) {
        EXPECT_EQ(w, 0.0);
    }
    ImpactModel m;
    m.weights[1] = 2.0;  // injected flag
    auto imp = compute_collection_impacts(m, docs);
    for (const auto& [t, w] : imp[0]) {
        EXPECT_EQ(w, t == "z" ? 2.0 : 0.0) << t;
    }
}

TEST(BuildIndex, SingleDocAtMaximum)
{
    std::vector<DocImpacts> imp{{{"a", 4.0}}};
    auto index = build_index(imp, ids(1));
    ASSERT_EQ(index.lexicon.size(), 1U);
    EXPECT_EQ(index.lexicon.at("a").postings, (std::vector<ImpactPosting>{{0, 255}}));
    EXPECT_EQ(index.lexicon.at("a").max_impact, 255);
    EXPECT_EQ(index.w_max, 4.0);
}

TEST(BuildIndex, PostingsSortedByDoc)
{
    std::vector<DocImpacts> imp{{{"t", 1.0}}, {{"t", 2.0}}, {{"t", 3.0}}};
    auto index = build_index(imp, ids(3));
    const auto& p = index.lexicon.at("t").postings;
    ASSERT_EQ(p.size(), 3U);
    for (DocId d = 0; d < 3; ++d) {
        EXPECT_EQ(p[d].doc, d);
    }
}

TEST(BuildIndex, AllZeroIsEmpty)
{
    std::vector<DocImpacts> imp{{{"a", 0.0}}, {}};
    auto index = build_index(imp, ids(2));
    EXPECT_TRUE(index.empty());
    EXPECT_EQ(index.num_docs, 2U);
    EXPECT_EQ(index.w_max, 0.0);
}

TEST(BuildIndex, WMaxOverride)
{
    std::vector<DocImpacts> imp{{{"a", 1.0}}};
    auto index = build_index(imp, ids(1), 2.0);
    EXPECT_EQ(index.lexicon.at("a").postings[0].impact, 128);
    EXPECT_THROW(build_index(imp, ids(1), 0.5), RangeError);
}

TEST(BuildIndex, StructuralInvariantsOnRandomCollections)
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto imp = random_impacts(rng, 50, 30);
        auto index = build_index(imp, ids(50));
        double w_max = 0.0;
        std::map<std::string, std::vector<ImpactPosting>> expected;
        for (const auto& d : imp) {
            for (const auto& [t, w] : d) {
                w_max = std::max(w_max, w);
            }
        }
        for (std::size_t d = 0; d < imp.size(); ++d) {
            for (const auto& [t, w] : imp[d]) {
                if (w > 0.0) {
                    expected[t].push_back({static_cast<DocId>(d), quantize_impact(w, w_max)});
                }
            }
        }
        ASSERT_EQ(index.lexicon.size(), expected.size());
        for (const auto& [t, list] : index.lexicon) {
            EXPECT_EQ(list.postings, expected.at(t));
            std::uint8_t m = 0;
            for (std::size_t i = 0; i < list.postings.size(); ++i) {
                EXPECT_GE(list.postings[i].impact, 1);
                EXPECT_LT(list.postings[i].doc, index.num_docs);
                if (i > 0) {
                    EXPECT_LT(list.postings[i - 1].doc, list.postings[i].doc);
                }
                m = std::max(m, list.postings[i].impact);
            }
            EXPECT_EQ(list.max_impact, m);
        }
    }
}

TEST(Serialize, EmptyIndexRoundTrips)
{
    ImpactIndex empty;
    auto bytes = serialize_index(empty);
    EXPECT_EQ(deserialize_index(bytes), empty);
    ImpactIndex no_terms = build_index(std::vector<DocImpacts>(3), ids(3));
    EXPECT_EQ(deserialize_index(serialize_index(no_terms)), no_terms);
}

TEST(Serialize, RandomIndexesCanonical)
{
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 1 + uniform_below(rng, 80);
        auto index = build_index(random_impacts(rng, n, 40), ids(n));
        std::stringstream buf;
        write_index(index, buf);
        const auto first = buf.str();
        auto back = read_index(buf);
        EXPECT_EQ(back, index);
        std::stringstream again;
        write_index(back, again);
        EXPECT_EQ(again.str(), first);
    }
}

TEST(Serialize, SyntheticIndexRoundTrips)
{
    toy::SyntheticIndexConfig cfg;
    cfg.num_docs = 2000;
    cfg.vocabulary = 300;
    auto index = toy::make_synthetic_index(cfg);
    auto bytes = serialize_index(index);
    EXPECT_EQ(deserialize_index(bytes), index);
    EXPECT_EQ(serialize_index(deserialize_index(bytes)), bytes);
}

TEST(Serialize, CorruptionReportsOffset)
{
    std::vector<DocImpacts> imp{{{"a", 1.0}, {"b", 0.5}}, {{"a", 0.25}}};
    auto bytes = serialize_index(build_index(imp, ids(2)));

    auto bad_magic = bytes;
    bad_magic[0] ^= 0xFF;
    try {
        deserialize_index(bad_magic);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset, 0U);
    }

    auto bad_version = bytes;
    bad_version[4] = 9;
    try {
        deserialize_index(bad_version);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset, 4U);
    }

    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        EXPECT_THROW(deserialize_index(std::span(bytes.data(), cut)), FormatError) << cut;
    }
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(deserialize_index(trailing), FormatError);
}

TEST(Serialize, RandomByteFlipsNeverCrash)
{
    Rng rng(5);
    auto index = build_index(random_impacts(rng, 30, 20), ids(30));
    const auto bytes = serialize_index(index);
    for (int trial = 0; trial < 2000; ++trial) {
        auto b = bytes;
        b[uniform_below(rng, b.size())] ^= static_cast<std::uint8_t>(1 + uniform_below(rng, 255));
        try {
            auto back = deserialize_index(b);
            // a flip that still parses must re-serialize to the same bytes
            EXPECT_EQ(serialize_index(back), b);
        } catch (const FormatError&) {
        }
    }
}

TEST(DumpIndex, OneLinePerTerm)
{
    std::vector<DocImpacts> imp{{{"a", 1.0}, {"b", 0.5}}};
    std::ostringstream out;
    dump_index_jsonl(build_index(imp, ids(1)), out);
    std::istringstream in(out.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("term"));
        ++n;
    }
    EXPECT_EQ(n, 2);
}
