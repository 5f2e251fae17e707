#pragma once

// A Laplace-smoothed n-gram language model and the two decoding procedures
// used to generate expansion queries: combined top-k / top-p sampling and
// length-normalized beam search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace impactir {

inline const std::string kEndOfSequence = "</s>";
inline const std::string kStartPadding = "<s>";

/// term -> probability, iterated in lexicographic term order.
using TokenDistribution = std::map<std::string, double>;

struct NGramModel {
    int order = 1;
    double smoothing_alpha = 1.0;
    std::map<Terms, std::map<std::string, std::uint64_t>> counts;
    std::set<std::string> vocabulary;

    /// Pads or trims `history` to the model's context length.
    [[nodiscard]] Terms context_of(const Terms& history) const
    {
        const auto n = static_cast<std::size_t>(order - 1);
        Terms ctx(n, kStartPadding);
        const std::size_t take = std::min(n, history.size());
        std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
                  ctx.end() - static_cast<std::ptrdiff_t>(take));
        return ctx;
    }
};

struct SamplerConfig {
    int k = 50;
    double p = 0.95;
    int max_len = 16;
    int num_queries = 80;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (k < 1 || !(p > 0.0 && p <= 1.0) || max_len < 1 || num_queries < 1) {
            throw ValidationError("sampler config requires k >= 1, 0 < p <= 1, max_len >= 1, num_queries >= 1");
        }
    }
};

inline NGramModel build_ngram_model(const std::vector<Document>& collection, int order, double alpha)
{
    if (order < 1 || !(alpha > 0.0)) {
        throw ValidationError("n-gram model requires order >= 1 and alpha > 0");
    }
    if (collection.empty()) {
        throw ValidationError("cannot build an n-gram model from an empty collection");
    }
    NGramModel m;
    m.order = order;
    m.smoothing_alpha = alpha;
    m.vocabulary.insert(kEndOfSequence);
    const auto pad = static_cast<std::size_t>(order - 1);
    for (const auto& doc : collection) {
        Terms stream(pad, kStartPadding);
        stream.insert(stream.end(), doc.tokens.begin(), doc.tokens.end());
        stream.push_back(kEndOfSequence);
        for (std::size_t i = pad; i < stream.size(); ++i) {
            Terms ctx(stream.begin() + static_cast<std::ptrdiff_t>(i - pad),
                      stream.begin() + static_cast<std::ptrdiff_t>(i));
            ++m.counts[std::move(ctx)][stream[i]];
            m.vocabulary.insert(stream[i]);
        }
    }
    return m;
}

/// P(t | c) = (count(c, t) + alpha) / (sum_t' count(c, t') + alpha * |V|).
inline TokenDistribution next_token_dist(const NGramModel& model, const Terms& history)
{
    const auto ctx = model.context_of(history);
    const std::map<std::string, std::uint64_t>* row = nullptr;
    if (auto it = model.counts.find(ctx); it != model.counts.end()) {
        row = &it->second;
    }
    double total = 0.0;
    if (row != nullptr) {
        for (const auto& [t, c] : *row) {
            total += static_cast<double>(c);
        }
    }
    const double denom = total + model.smoothing_alpha * static_cast<double>(model.vocabulary.size());
    TokenDistribution dist;
    for (const auto& t : model.vocabulary) {
        double c = 0.0;
        if (row != nullptr) {
            if (auto it = row->find(t); it != row->end()) {
                c = static_cast<double>(it->second);
            }
        }
        dist.emplace(t, (c + model.smoothing_alpha) / denom);
    }
    return dist;
}

namespace detail {

    using RankedTokens = std::vector<std::pair<std::string, double>>;

    // Descending probability, ties by ascending term.
    inline RankedTokens rank_tokens(const TokenDistribution& dist)
    {
        RankedTokens ranked(dist.begin(), dist.end());
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        return ranked;
    }

    inline void renormalize(RankedTokens& ranked)
    {
        double total = 0.0;
        for (const auto& [t, p] : ranked) {
            total += p;
        }
        for (auto& [t, p] : ranked) {
            p /= total;
        }
    }

}  // namespace detail

/// Keeps the k most probable tokens, renormalizes, then keeps the shortest
/// descending-probability prefix whose cumulative mass reaches p and
/// renormalizes again.
inline TokenDistribution filter_top_k_top_p(const TokenDistribution& dist, int k, double p)
{
    if (k < 1 || !(p > 0.0 && p <= 1.0)) {
        throw ValidationError("filter requires k >= 1 and 0 < p <= 1");
    }
    auto ranked = detail::rank_tokens(dist);
    if (ranked.size() > static_cast<std::size_t>(k)) {
        ranked.resize(static_cast<std::size_t>(k));
    }
    detail::renormalize(ranked);
    double cumulative = 0.0;
    std::size_t keep = ranked.size();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        cumulative += ranked[i].second;
        if (cumulative >= p) {
            keep = i + 1;
            break;
        }
    }
    ranked.resize(keep);
    detail::renormalize(ranked);
    return TokenDistribution(ranked.begin(), ranked.end());
}

/// Draws one token; walks the support in descending-probability order.
inline std::string sample_token(const TokenDistribution& dist, Rng& rng)
{
    auto ranked = detail::rank_tokens(dist);
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (const auto& [t, p] : ranked) {
        cumulative += p;
        if (u < cumulative) {
            return t;
        }
    }
    return ranked.back().first;
}

/// Autoregressive top-k/top-p sampling. The generation context starts with
/// the document's first order-1 tokens; those seed tokens are not part of
/// the returned query.
inline std::string sample_query(const NGramModel& model, const Document& doc, const SamplerConfig& cfg, Rng& rng)
{
    cfg.validate();
    const auto seed_len = std::min(doc.tokens.size(), static_cast<std::size_t>(model.order - 1));
    Terms history(doc.tokens.begin(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(seed_len));
    Terms generated;
    for (int step = 0; step < cfg.max_len; ++step) {
        auto dist = filter_top_k_top_p(next_token_dist(model, history), cfg.k, cfg.p);
        auto token = sample_token(dist, rng);
        if (token == kEndOfSequence) {
            break;
        }
        history.push_back(token);
        generated.push_back(std::move(token));
    }
    return join(generated);
}

struct Hypothesis {
    Terms tokens;  // excludes the end marker
    double log_prob = 0.0;
    int length = 0;  // generated tokens, end marker included
    bool finished = false;

    [[nodiscard]] double normalized() const { return length == 0 ? 0.0 : log_prob / length; }
};

namespace detail {

    inline Terms sequence_key(const Hypothesis& h)
    {
        Terms key = h.tokens;
        if (h.finished && h.length > static_cast<int>(h.tokens.size())) {
            key.push_back(kEndOfSequence);
        }
        return key;
    }

    inline bool better_hypothesis(const Hypothesis& a, const Hypothesis& b)
    {
        const double na = a.normalized();
        const double nb = b.normalized();
        if (na != nb) {
            return na > nb;
        }
        return sequence_key(a) < sequence_key(b);
    }

}  // namespace detail

/// Length-normalized beam search. Returns up to `n` finished hypotheses,
/// best first. Hypotheses still open at `max_len` tokens are finished as-is.
inline std::vector<Hypothesis> beam_search(const NGramModel& model, const Document& doc, int width,
                                           int max_len, int n)
{
    if (n < 1 || width < n || max_len < 1) {
        throw ValidationError("beam search requires width >= n >= 1 and max_len >= 1");
    }
    const auto seed_len = std::min(doc.tokens.size(), static_cast<std::size_t>(model.order - 1));
    const Terms prefix(doc.tokens.begin(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(seed_len));

    std::vector<Hypothesis> beam{Hypothesis{}};
    std::vector<Hypothesis> finished;
    for (int step = 0; step < max_len && !beam.empty(); ++step) {
        std::vector<Hypothesis> children;
        for (const auto& h : beam) {
            Terms history = prefix;
            history.insert(history.end(), h.tokens.begin(), h.tokens.end());
            for (const auto& [t, p] : next_token_dist(model, history)) {
                Hypothesis c = h;
                c.log_prob += std::log(p);
                c.length += 1;
                if (t == kEndOfSequence) {
                    c.finished = true;
                } else {
                    c.tokens.push_back(t);
                    c.finished = (c.length == max_len);
                }
                children.push_back(std::move(c));
            }
        }
        std::sort(children.begin(), children.end(), detail::better_hypothesis);
        if (children.size() > static_cast<std::size_t>(width)) {
            children.resize(static_cast<std::size_t>(width));
        }
        beam.clear();
        for (auto& c : children) {
            (c.finished ? finished : beam).push_back(std::move(c));
        }
    }
    std::sort(finished.begin(), finished.end(), detail::better_hypothesis);
    if (finished.size() > static_cast<std::size_t>(n)) {
        finished.resize(static_cast<std::size_t>(n));
    }
    return finished;
}

inline std::vector<std::string> beam_search_queries(const NGramModel& model, const Document& doc, int width,
                                                    int max_len, int n)
{
    std::vector<std::string> out;
    for (const auto& h : beam_search(model, doc, width, max_len, n)) {
        out.push_back(join(h.tokens));
    }
    return out;
}

}  // namespace impactir
