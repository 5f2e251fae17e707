#pragma once

// Collection-wide filtration of expansion queries and merging of the
// surviving queries into documents.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"

namespace impactir {

struct TermEntry {
    std::string term;
    int tf_original = 0;
    bool injected = false;
    // Position of the first occurrence in the merged token stream
    // (original tokens, then expansion query tokens).
    std::size_t first_position = 0;
    friend bool operator==(const TermEntry&, const TermEntry&) = default;
};

/// Unique terms of a document after expansion: original terms first, then
/// injected terms in query order. injected <=> tf_original == 0.
class ExpandedDocument {
  public:
    ExpandedDocument() = default;
    ExpandedDocument(std::string doc_id, std::vector<TermEntry> terms, std::size_t original_length)
        : doc_id_(std::move(doc_id)), terms_(std::move(terms)), original_length_(original_length)
    {
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            lookup_.emplace(terms_[i].term, i);
        }
    }

    [[nodiscard]] const std::string& doc_id() const { return doc_id_; }
    [[nodiscard]] const std::vector<TermEntry>& terms() const { return terms_; }
    [[nodiscard]] std::size_t original_length() const { return original_length_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }

    [[nodiscard]] const TermEntry* find(const std::string& term) const
    {
        auto it = lookup_.find(term);
        return it == lookup_.end() ? nullptr : &terms_[it->second];
    }

    [[nodiscard]] std::size_t injected_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(terms_.begin(), terms_.end(), [](const TermEntry& e) { return e.injected; }));
    }

    friend bool operator==(const ExpandedDocument& a, const ExpandedDocument& b)
    {
        return a.doc_id_ == b.doc_id_ && a.terms_ == b.terms_ && a.original_length_ == b.original_length_;
    }

  private:
    std::string doc_id_;
    std::vector<TermEntry> terms_;
    std::size_t original_length_ = 0;
    std::unordered_map<std::string, std::size_t> lookup_;
};

enum class TruncationPoint { before_merge, after_merge };

struct MergeOptions {
    std::size_t max_tokens = 0;  // 0 = no truncation
    TruncationPoint truncate_at = TruncationPoint::after_merge;
};

namespace detail {

    inline void append_term(std::vector<TermEntry>& terms, std::unordered_map<std::string, std::size_t>& where,
                            const std::string& term, bool original, std::size_t position)
    {
        auto [it, fresh] = where.emplace(term, terms.size());
        if (fresh) {
            terms.push_back({term, original ? 1 : 0, !original, position});
        } else if (original) {
            ++terms[it->second].tf_original;
        }
    }

}  // namespace detail

inline ExpandedDocument merge_expansion(const Document& doc, const std::vector<std::string>& queries,
                                        const MergeOptions& opts = {})
{
    Terms original = doc.tokens;
    if (opts.max_tokens != 0 && opts.truncate_at == TruncationPoint::before_merge &&
        original.size() > opts.max_tokens) {
        original.resize(opts.max_tokens);
    }
    Terms expansion;
    for (const auto& q : queries) {
        auto toks = tokenize(q);
        expansion.insert(expansion.end(), toks.begin(), toks.end());
    }
    if (opts.max_tokens != 0 && opts.truncate_at == TruncationPoint::after_merge) {
        if (original.size() >= opts.max_tokens) {
            original.resize(opts.max_tokens);
            expansion.clear();
        } else if (original.size() + expansion.size() > opts.max_tokens) {
            expansion.resize(opts.max_tokens - original.size());
        }
    }

    std::vector<TermEntry> terms;
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < original.size(); ++i) {
        detail::append_term(terms, where, original[i], true, i);
    }
    for (std::size_t i = 0; i < expansion.size(); ++i) {
        detail::append_term(terms, where, expansion[i], false, original.size() + i);
    }
    return ExpandedDocument(doc.doc_id, std::move(terms), original.size());
}

/// Merges further queries into an already expanded document. Terms already
/// present are left untouched.
inline ExpandedDocument merge_expansion(const ExpandedDocument& doc, const std::vector<std::string>& queries)
{
    std::vector<TermEntry> terms = doc.terms();
    std::unordered_map<std::string, std::size_t> where;
    std::size_t next_position = doc.original_length();
    for (std::size_t i = 0; i < terms.size(); ++i) {
        where.emplace(terms[i].term, i);
        next_position = std::max(next_position, terms[i].first_position + 1);
    }
    for (const auto& q : queries) {
        for (const auto& t : tokenize(q)) {
            if (!where.contains(t)) {
                where.emplace(t, terms.size());
                terms.push_back({t, 0, true, next_position});
            }
            ++next_position;
        }
    }
    return ExpandedDocument(doc.doc_id(), std::move(terms), doc.original_length());
}

inline std::vector<std::string> query_texts(const ExpansionRecord& record)
{
    std::vector<std::string> out;
    out.reserve(record.queries.size());
    for (const auto& q : record.queries) {
        out.push_back(q.text);
    }
    return out;
}

/// Expands every document with the queries of its record (if any).
inline std::vector<ExpandedDocument> expand_collection(const std::vector<Document>& docs,
                                                       const std::vector<ExpansionRecord>* records,
                                                       const MergeOptions& opts = {})
{
    std::unordered_map<std::string, std::vector<std::string>> by_doc;
    if (records != nullptr) {
        check_expansion_references(*records, docs);
        for (const auto& r : *records) {
            auto& qs = by_doc[r.doc_id];
            for (const auto& q : r.queries) {
                qs.push_back(q.text);
            }
        }
    }
    std::vector<ExpandedDocument> out;
    out.reserve(docs.size());
    static const std::vector<std::string> none;
    for (const auto& d : docs) {
        auto it = by_doc.find(d.doc_id);
        out.push_back(merge_expansion(d, it == by_doc.end() ? none : it->second, opts));
    }
    return out;
}

struct FiltrationReport {
    std::size_t total_queries = 0;
    std::size_t retained = 0;
    double threshold_score = 0.0;  // lowest retained score
    double fraction = 0.0;

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"total_queries", total_queries},
                {"retained", retained},
                {"threshold_score", threshold_score},
                {"fraction", fraction}};
    }
};

/// ceil(fraction * total), treating products within 1e-9 of an integer as
/// that integer (0.3 * 10 is 3.0000000000000004 in binary floating point).
inline std::size_t retained_count(double fraction, std::size_t total)
{
    const double x = fraction * static_cast<double>(total);
    const double nearest = std::round(x);
    const double r = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
    return std::min(total, static_cast<std::size_t>(r));
}

struct FiltrationResult {
    std::vector<ExpansionRecord> records;
    FiltrationReport report;
};

/// Keeps the top ceil(fraction * N) queries by relevance score over the
/// whole collection. Ties at the boundary go to the earlier query in input
/// order. Records keep their original query order; records left without
/// queries are still emitted.
inline FiltrationResult filter_expansions(const std::vector<ExpansionRecord>& records, double fraction)
{
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("filtration fraction must be in (0, 1]");
    }
    struct Ref {
        std::size_t record;
        std::size_t query;
        double score;
    };
    std::vector<Ref> pool;
    std::vector<std::string> unscored;
    for (std::size_t r = 0; r < records.size(); ++r) {
        bool missing = false;
        for (std::size_t q = 0; q < records[r].queries.size(); ++q) {
            const auto& s = records[r].queries[q].relevance_score;
            if (!s) {
                missing = true;
                continue;
            }
            pool.push_back({r, q, *s});
        }
        if (missing) {
            unscored.push_back(records[r].doc_id);
        }
    }
    if (!unscored.empty()) {
        std::string list;
        for (std::size_t i = 0; i < unscored.size() && i < 10; ++i) {
            list += (i ? ", " : "") + unscored[i];
        }
        if (unscored.size() > 10) {
            list += ", ...";
        }
        throw ValidationError("expansion queries without relevance score in docs: " + list);
    }

    std::stable_sort(pool.begin(), pool.end(), [](const Ref& a, const Ref& b) { return a.score > b.score; });
    const std::size_t keep = retained_count(fraction, pool.size());

    std::vector<std::vector<bool>> kept(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        kept[r].assign(records[r].queries.size(), false);
    }
    for (std::size_t i = 0; i < keep; ++i) {
        kept[pool[i].record][pool[i].query] = true;
    }

    FiltrationResult out;
    out.records.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        ExpansionRecord rec{records[r].doc_id, {}};
        for (std::size_t q = 0; q < records[r].queries.size(); ++q) {
            if (kept[r][q]) {
                rec.queries.push_back(records[r].queries[q]);
            }
        }
        out.records.push_back(std::move(rec));
    }
    out.report.total_queries = pool.size();
    out.report.retained = keep;
    out.report.threshold_score = keep == 0 ? 0.0 : pool[keep - 1].score;
    out.report.fraction = fraction;
    return out;
}

/// Stand-in relevance scorer for self-contained runs: Jaccard overlap of the
/// query's and the document's term sets. Not a learned relevance model.
inline double overlap_score(const std::string& query_text, const Document& doc)
{
    auto q = tokenize(query_text);
    std::unordered_set<std::string> qs(q.begin(), q.end());
    std::unordered_set<std::string> ds(doc.tokens.begin(), doc.tokens.end());
    std::size_t inter = 0;
    for (const auto& t : qs) {
        inter += ds.contains(t) ? 1 : 0;
    }
    const std::size_t uni = qs.size() + ds.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Fills missing relevance scores with overlap_score.
inline void score_missing_with_overlap(std::vector<ExpansionRecord>& records, const std::vector<Document>& docs)
{
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : docs) {
        by_id.emplace(d.doc_id, &d);
    }
    for (auto& r : records) {
        auto it = by_id.find(r.doc_id);
        if (it == by_id.end()) {
            throw ValidationError("expansion record for unknown doc '" + r.doc_id + "'");
        }
        for (auto& q : r.queries) {
            if (!q.relevance_score) {
                q.relevance_score = overlap_score(q.text, *it->second);
            }
        }
    }
}

}  // namespace impactir
