#pragma once

// Seeded synthetic data: a toy text collection with training / evaluation
// files, and random impact indexes for exercising the query processors.
//
// Toy collection: documents draw words from a Zipfian vocabulary and each
// carries one unique marker token. A query names the marker of its target
// document plus a few words of that document, so the target is the only
// document matching the rare marker term.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "index.hpp"
#include "random.hpp"

namespace impactir::toy {

/// Samples ranks 0..n-1 with P(r) proportional to 1 / (r + 1)^s.
class ZipfSampler {
  public:
    ZipfSampler(std::size_t n, double s)
    {
        cdf_.resize(n);
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cdf_[r] = total;
        }
        for (auto& c : cdf_) {
            c /= total;
        }
    }

    std::size_t operator()(Rng& rng) const
    {
        const double u = uniform01(rng);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

  private:
    std::vector<double> cdf_;
};

struct ToyConfig {
    std::size_t num_docs = 300;
    std::size_t vocabulary = 400;
    std::size_t min_doc_len = 20;
    std::size_t max_doc_len = 40;
    double zipf_s = 1.0;
    std::size_t train_queries = 80;
    std::size_t test_queries = 50;
    std::size_t query_words = 2;  // common words added next to the marker
    std::size_t negatives = 7;
    std::uint64_t seed = 7;
};

struct ToyCorpus {
    std::vector<Document> docs;
    std::vector<Query> train_queries;
    std::vector<Query> test_queries;
    Qrels train_qrels;
    Qrels test_qrels;
    std::vector<DistillationGroup> groups;
    std::vector<TrainTriple> triples;
};

inline std::string toy_doc_id(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "D%05zu", i);
    return buf;
}

inline std::string toy_marker(std::size_t i)
{
    return "mk" + std::to_string(i);
}

inline ToyCorpus make_toy_corpus(const ToyConfig& cfg)
{
    if (cfg.num_docs < cfg.train_queries + cfg.test_queries || cfg.num_docs < cfg.negatives + 1 ||
        cfg.min_doc_len < cfg.query_words || cfg.max_doc_len < cfg.min_doc_len || cfg.vocabulary == 0) {
        throw ValidationError("toy config: not enough documents or words for the requested queries");
    }
    Rng rng(cfg.seed);
    ZipfSampler words(cfg.vocabulary, cfg.zipf_s);
    ToyCorpus toy;
    std::vector<std::vector<std::string>> common(cfg.num_docs);
    for (std::size_t i = 0; i < cfg.num_docs; ++i) {
        const auto len = cfg.min_doc_len + uniform_below(rng, cfg.max_doc_len - cfg.min_doc_len + 1);
        Terms toks;
        for (std::size_t j = 0; j < len; ++j) {
            toks.push_back("w" + std::to_string(words(rng)));
        }
        common[i] = toks;
        toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, toks.size() + 1)), toy_marker(i));
        toy.docs.push_back(Document::from_text(toy_doc_id(i), join(toks)));
    }

    std::vector<std::size_t> targets(cfg.num_docs);
    std::iota(targets.begin(), targets.end(), std::size_t{0});
    shuffle(std::span(targets), rng);

    auto make_query = [&](std::size_t n, std::size_t target, const char* prefix) {
        std::vector<std::string> picked;
        auto pool = common[target];
        shuffle(std::span(pool), rng);
        for (const auto& w : pool) {
            if (picked.size() == cfg.query_words) {
                break;
            }
            if (std::find(picked.begin(), picked.end(), w) == picked.end()) {
                picked.push_back(w);
            }
        }
        Terms toks{toy_marker(target)};
        toks.insert(toks.end(), picked.begin(), picked.end());
        return Query::from_text(prefix + std::to_string(n), join(toks));
    };

    for (std::size_t n = 0; n < cfg.train_queries + cfg.test_queries; ++n) {
        const bool train = n < cfg.train_queries;
        const auto target = targets[n];
        auto q = make_query(train ? n : n - cfg.train_queries, target, train ? "train" : "test");
        (train ? toy.train_qrels : toy.test_qrels)[q.query_id][toy_doc_id(target)] = 1;
        if (!train) {
            toy.test_queries.push_back(std::move(q));
            continue;
        }

        // Hard negatives: documents sharing the most query words.
        std::unordered_set<std::string> qwords(q.tokens.begin() + 1, q.tokens.end());
        std::vector<std::pair<std::size_t, double>> overlap;
        for (std::size_t d = 0; d < cfg.num_docs; ++d) {
            if (d == target) {
                continue;
            }
            std::unordered_set<std::string> seen;
            std::size_t shared = 0;
            for (const auto& w : common[d]) {
                if (qwords.contains(w) && seen.insert(w).second) {
                    ++shared;
                }
            }
            overlap.emplace_back(d, static_cast<double>(shared) + uniform01(rng));
        }
        std::partial_sort(overlap.begin(), overlap.begin() + static_cast<std::ptrdiff_t>(cfg.negatives), overlap.end(),
                          [](const auto& a, const auto& b) { return a.second > b.second; });
        std::vector<ScoredDoc> negatives;
        for (std::size_t j = 0; j < cfg.negatives; ++j) {
            negatives.push_back({toy_doc_id(overlap[j].first), 2.0 * overlap[j].second});
        }
        toy.triples.push_back({q, toy_doc_id(target), negatives.front().doc_id});
        const double positive_score = 10.0 + uniform01(rng);
        toy.groups.push_back(make_group(q, {toy_doc_id(target), positive_score}, std::move(negatives)));
        toy.train_queries.push_back(std::move(q));
    }
    return toy;
}

enum class ImpactDistribution { uniform, zipfian };

struct SyntheticIndexConfig {
    std::size_t num_docs = 1000;
    std::size_t vocabulary = 200;
    std::size_t doc_length = 30;  // tokens per document, drawn from doc_length/2 .. 3*doc_length/2
    double term_zipf_s = 1.0;
    ImpactDistribution impacts = ImpactDistribution::zipfian;
    std::uint64_t seed = 1;
};

inline std::string synthetic_term(std::size_t r)
{
    return "t" + std::to_string(r);
}

/// Random quantized index. Every document draws its tokens from a Zipfian
/// over the vocabulary, so document frequencies are Zipfian and common
/// terms co-occur. Impacts are uniform on 1..255, or Zipfian over 1..cap
/// (small values most likely) where the per-term cap grows with idf, as
/// learned impacts of rare terms run higher.
inline ImpactIndex make_synthetic_index(const SyntheticIndexConfig& cfg)
{
    Rng rng(cfg.seed);
    ImpactIndex index;
    index.num_docs = static_cast<std::uint32_t>(cfg.num_docs);
    index.w_max = 1.0;
    if (cfg.num_docs == 0 || cfg.vocabulary == 0) {
        return index;
    }
    ZipfSampler terms(cfg.vocabulary, cfg.term_zipf_s);
    std::vector<std::vector<DocId>> docs_of(cfg.vocabulary);
    for (std::size_t d = 0; d < cfg.num_docs; ++d) {
        index.doc_table.push_back(toy_doc_id(d));
        const auto len = std::max<std::size_t>(1, cfg.doc_length / 2 + uniform_below(rng, cfg.doc_length + 1));
        std::vector<std::size_t> drawn(len);
        for (auto& t : drawn) {
            t = terms(rng);
        }
        std::sort(drawn.begin(), drawn.end());
        drawn.erase(std::unique(drawn.begin(), drawn.end()), drawn.end());
        for (auto t : drawn) {
            docs_of[t].push_back(static_cast<DocId>(d));
        }
    }
    const double n = static_cast<double>(cfg.num_docs);
    for (std::size_t r = 0; r < cfg.vocabulary; ++r) {
        if (docs_of[r].empty()) {
            continue;
        }
        const double df = static_cast<double>(docs_of[r].size());
        const double idf_share = n > 1.0 ? std::log(n / df) / std::log(n) : 1.0;
        const auto cap = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(kMaxQuantized * idf_share)), 1,
                                                 kMaxQuantized);
        ZipfSampler impact_zipf(cap, 1.0);
        PostingList list{synthetic_term(r), {}, 0};
        for (auto d : docs_of[r]) {
            const auto q = cfg.impacts == ImpactDistribution::uniform
                               ? static_cast<std::uint8_t>(1 + uniform_below(rng, kMaxQuantized))
                               : static_cast<std::uint8_t>(1 + impact_zipf(rng));
            list.postings.push_back({d, q});
            list.max_impact = std::max(list.max_impact, q);
        }
        index.lexicon.emplace(list.term, std::move(list));
    }
    return index;
}

/// Query of `len` terms drawn uniformly from the first `vocabulary` synthetic
/// terms; may contain repeats and terms absent from the index.
inline Query random_query(Rng& rng, std::size_t vocabulary, std::size_t len, const std::string& id = "q")
{
    Terms toks;
    for (std::size_t i = 0; i < len; ++i) {
        toks.push_back(synthetic_term(static_cast<std::size_t>(uniform_below(rng, vocabulary))));
    }
    return Query::from_text(id, join(toks));
}

/// Query of `len` terms drawn from `terms`, the same Zipfian the collection
/// was generated from, so query terms follow collection frequency.
inline Query zipf_query(Rng& rng, const ZipfSampler& terms, std::size_t len, const std::string& id = "q")
{
    Terms toks;
    for (std::size_t i = 0; i < len; ++i) {
        toks.push_back(synthetic_term(terms(rng)));
    }
    return Query::from_text(id, join(toks));
}

}  // namespace impactir::toy
