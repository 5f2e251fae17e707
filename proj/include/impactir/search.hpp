#pragma once

// Disjunctive top-k retrieval over an ImpactIndex. Scores are integer sums
// of quantized impacts. exhaustive_daat scores every document in the union
// of the query's lists; maxscore_daat returns the same results while
// skipping documents that cannot enter the top k.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "index.hpp"

namespace impactir {

using Score = std::uint32_t;

struct ScoredEntry {
    DocId doc = 0;
    Score score = 0;
    friend bool operator==(const ScoredEntry&, const ScoredEntry&) = default;
};

/// Higher score first, then lower doc id.
inline bool ranks_before(const ScoredEntry& a, const ScoredEntry& b)
{
    return a.score != b.score ? a.score > b.score : a.doc < b.doc;
}

struct TopKResult {
    std::vector<ScoredEntry> entries;
    std::size_t k_requested = 0;
    friend bool operator==(const TopKResult&, const TopKResult&) = default;
};

struct SearchStats {
    std::uint64_t postings_touched = 0;
    std::uint64_t docs_scored = 0;
    std::uint64_t elapsed_ns = 0;

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"postings_touched", postings_touched}, {"docs_scored", docs_scored}, {"elapsed_ns", elapsed_ns}};
    }
};

struct SearchOutput {
    TopKResult result;
    SearchStats stats;
};

/// Bounded min-heap keeping the k best entries under ranks_before.
class TopKQueue {
  public:
    explicit TopKQueue(std::size_t k) : k_(k)
    {
        if (k == 0) {
            throw ValidationError("k must be at least 1");
        }
        heap_.reserve(k);
    }

    /// Score a new document must exceed to enter. Documents arrive in
    /// ascending id order, so a later document tying the current k-th
    /// entry loses the tie.
    [[nodiscard]] Score threshold() const { return full() ? heap_.front().score : 0; }

    [[nodiscard]] bool full() const { return heap_.size() == k_; }

    bool insert(ScoredEntry e)
    {
        if (!full()) {
            heap_.push_back(e);
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
            return true;
        }
        if (!ranks_before(e, heap_.front())) {
            return false;
        }
        std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
        heap_.back() = e;
        std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        return true;
    }

    [[nodiscard]] TopKResult finalize() const
    {
        TopKResult r{heap_, k_};
        std::sort(r.entries.begin(), r.entries.end(), ranks_before);
        return r;
    }

  private:
    std::size_t k_;
    std::vector<ScoredEntry> heap_;  // heap front = worst kept entry
};

/// Forward-only iterator over a posting list. Counts every posting the
/// cursor lands on; postings jumped over by seek() are not counted.
class PostingCursor {
  public:
    static constexpr DocId kEnd = std::numeric_limits<DocId>::max();

    PostingCursor(const PostingList& list, std::uint64_t& touched) : list_(&list), touched_(&touched)
    {
        if (!list_->postings.empty()) {
            ++*touched_;
        }
    }

    [[nodiscard]] DocId doc() const { return pos_ < list_->postings.size() ? list_->postings[pos_].doc : kEnd; }
    [[nodiscard]] Score impact() const { return list_->postings[pos_].impact; }
    [[nodiscard]] Score max_impact() const { return list_->max_impact; }
    [[nodiscard]] const PostingList& list() const { return *list_; }

    void next()
    {
        if (pos_ < list_->postings.size()) {
            ++pos_;
            if (pos_ < list_->postings.size()) {
                ++*touched_;
            }
        }
    }

    /// Moves to the first posting with doc >= target (galloping search).
    void seek(DocId target)
    {
        const auto& p = list_->postings;
        if (pos_ >= p.size() || p[pos_].doc >= target) {
            return;
        }
        std::size_t lo = pos_;
        std::size_t step = 1;
        while (lo + step < p.size() && p[lo + step].doc < target) {
            lo += step;
            step *= 2;
        }
        const std::size_t hi = std::min(lo + step, p.size());
        auto it = std::lower_bound(p.begin() + static_cast<std::ptrdiff_t>(lo + 1),
                                   p.begin() + static_cast<std::ptrdiff_t>(hi), target,
                                   [](const ImpactPosting& a, DocId d) { return a.doc < d; });
        pos_ = static_cast<std::size_t>(it - p.begin());
        if (pos_ < p.size()) {
            ++*touched_;
        }
    }

  private:
    const PostingList* list_;
    std::uint64_t* touched_;
    std::size_t pos_ = 0;
};

/// Distinct in-vocabulary query terms, ordered by ascending max impact
/// (ties by term).
inline std::vector<const PostingList*> prepare_query(const ImpactIndex& index, const Query& query)
{
    std::vector<const PostingList*> lists;
    std::unordered_set<std::string> seen;
    for (const auto& t : query.tokens) {
        if (!seen.insert(t).second) {
            continue;
        }
        if (const auto* l = index.find(t)) {
            lists.push_back(l);
        }
    }
    std::sort(lists.begin(), lists.end(), [](const PostingList* a, const PostingList* b) {
        return a->max_impact != b->max_impact ? a->max_impact < b->max_impact : a->term < b->term;
    });
    return lists;
}

namespace detail {

    class Stopwatch {
      public:
        Stopwatch() : start_(std::chrono::steady_clock::now()) {}
        [[nodiscard]] std::uint64_t elapsed_ns() const
        {
            return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                                  std::chrono::steady_clock::now() - start_)
                                                  .count());
        }

      private:
        std::chrono::steady_clock::time_point start_;
    };

}  // namespace detail

inline SearchOutput exhaustive_daat(const std::vector<const PostingList*>& lists, std::size_t k)
{
    detail::Stopwatch clock;
    SearchOutput out;
    TopKQueue top(k);
    std::vector<PostingCursor> cursors;
    cursors.reserve(lists.size());
    for (const auto* l : lists) {
        cursors.emplace_back(*l, out.stats.postings_touched);
    }
    auto next_doc = [&] {
        DocId d = PostingCursor::kEnd;
        for (const auto& c : cursors) {
            d = std::min(d, c.doc());
        }
        return d;
    };
    for (DocId cur = next_doc(); cur != PostingCursor::kEnd; cur = next_doc()) {
        Score s = 0;
        for (auto& c : cursors) {
            if (c.doc() == cur) {
                s += c.impact();
                c.next();
            }
        }
        ++out.stats.docs_scored;
        top.insert({cur, s});
    }
    out.result = top.finalize();
    out.stats.elapsed_ns = clock.elapsed_ns();
    return out;
}

inline SearchOutput exhaustive_daat(const ImpactIndex& index, const Query& query, std::size_t k)
{
    return exhaustive_daat(prepare_query(index, query), k);
}

/// MaxScore. Lists are ordered by ascending max impact; bound[i] is the sum
/// of the max impacts of lists 0..i. Lists whose bound does not exceed the
/// current threshold are non-essential: a document found only in them
/// cannot enter the top k, so candidates come from the essential lists and
/// non-essential lists are probed with seek() while the candidate can still
/// beat the threshold.
inline SearchOutput maxscore_daat(const std::vector<const PostingList*>& lists, std::size_t k)
{
    detail::Stopwatch clock;
    SearchOutput out;
    TopKQueue top(k);
    std::vector<PostingCursor> cursors;
    cursors.reserve(lists.size());
    for (const auto* l : lists) {
        cursors.emplace_back(*l, out.stats.postings_touched);
    }
    const std::size_t n = cursors.size();
    std::vector<Score> bound(n);
    for (std::size_t i = 0; i < n; ++i) {
        bound[i] = cursors[i].max_impact() + (i == 0 ? 0 : bound[i - 1]);
    }

    std::size_t first_essential = 0;
    DocId cur = PostingCursor::kEnd;
    for (const auto& c : cursors) {
        cur = std::min(cur, c.doc());
    }
    while (first_essential < n && cur != PostingCursor::kEnd) {
        Score s = 0;
        DocId next = PostingCursor::kEnd;
        for (std::size_t i = first_essential; i < n; ++i) {
            auto& c = cursors[i];
            if (c.doc() == cur) {
                s += c.impact();
                c.next();
            }
            next = std::min(next, c.doc());
        }
        for (std::size_t i = first_essential; i-- > 0;) {
            if (s + bound[i] <= top.threshold()) {
                break;
            }
            cursors[i].seek(cur);
            if (cursors[i].doc() == cur) {
                s += cursors[i].impact();
            }
        }
        ++out.stats.docs_scored;
        if (top.insert({cur, s})) {
            while (first_essential < n && bound[first_essential] <= top.threshold()) {
                ++first_essential;
            }
        }
        cur = next;
    }
    out.result = top.finalize();
    out.stats.elapsed_ns = clock.elapsed_ns();
    return out;
}

inline SearchOutput maxscore_daat(const ImpactIndex& index, const Query& query, std::size_t k)
{
    return maxscore_daat(prepare_query(index, query), k);
}

}  // namespace impactir
