#pragma once

// Effectiveness metrics over TREC-style runs, response-time measurement and
// run-file I/O.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "index.hpp"
#include "search.hpp"

namespace impactir {

struct RunEntry {
    std::string query_id;
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
    std::string tag;
    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

/// query_id -> entries in rank order.
using Run = std::map<std::string, std::vector<RunEntry>>;

inline const std::vector<int> kRecallDepths{10, 100, 200, 400, 600, 800, 1000};

namespace detail {

    inline const std::vector<RunEntry>* entries_for(const Run& run, const std::string& qid)
    {
        auto it = run.find(qid);
        return it == run.end() ? nullptr : &it->second;
    }

}  // namespace detail

/// Mean over qrels queries of 1/rank of the first document with grade >=
/// `min_grade` within `cutoff`. Run queries without qrels are ignored.
inline double mrr_at(const Run& run, const Qrels& qrels, int cutoff = 10, int min_grade = 1)
{
    if (cutoff < 1) {
        throw ValidationError("cutoff must be at least 1");
    }
    if (qrels.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [qid, judged] : qrels) {
        const auto* entries = detail::entries_for(run, qid);
        if (entries == nullptr) {
            continue;
        }
        for (std::size_t i = 0; i < entries->size() && i < static_cast<std::size_t>(cutoff); ++i) {
            if (grade_of(qrels, qid, (*entries)[i].doc_id) >= min_grade) {
                sum += 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(qrels.size());
}

/// Gain 2^grade - 1, discount log2(rank + 1). Queries whose ideal DCG is 0
/// contribute 0.
inline double ndcg_at(const Run& run, const Qrels& qrels, int cutoff = 10)
{
    if (cutoff < 1) {
        throw ValidationError("cutoff must be at least 1");
    }
    if (qrels.empty()) {
        return 0.0;
    }
    auto gain = [](int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; };
    auto discount = [](std::size_t i) { return std::log2(static_cast<double>(i) + 2.0); };
    double sum = 0.0;
    for (const auto& [qid, judged] : qrels) {
        std::vector<int> grades;
        for (const auto& [d, g] : judged) {
            grades.push_back(g);
        }
        std::sort(grades.rbegin(), grades.rend());
        double ideal = 0.0;
        for (std::size_t i = 0; i < grades.size() && i < static_cast<std::size_t>(cutoff); ++i) {
            ideal += gain(grades[i]) / discount(i);
        }
        if (ideal <= 0.0) {
            continue;
        }
        const auto* entries = detail::entries_for(run, qid);
        if (entries == nullptr) {
            continue;
        }
        double dcg = 0.0;
        for (std::size_t i = 0; i < entries->size() && i < static_cast<std::size_t>(cutoff); ++i) {
            dcg += gain(grade_of(qrels, qid, (*entries)[i].doc_id)) / discount(i);
        }
        sum += dcg / ideal;
    }
    return sum / static_cast<double>(qrels.size());
}

/// Mean over queries with at least one relevant document of the fraction
/// of relevant documents found in the top `depth`.
inline double recall_at(const Run& run, const Qrels& qrels, int depth, int min_grade = 1)
{
    if (depth < 1) {
        throw ValidationError("depth must be at least 1");
    }
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& [qid, judged] : qrels) {
        std::size_t relevant = 0;
        for (const auto& [d, g] : judged) {
            relevant += g >= min_grade ? 1 : 0;
        }
        if (relevant == 0) {
            continue;
        }
        ++counted;
        const auto* entries = detail::entries_for(run, qid);
        if (entries == nullptr) {
            continue;
        }
        std::size_t found = 0;
        for (std::size_t i = 0; i < entries->size() && i < static_cast<std::size_t>(depth); ++i) {
            found += grade_of(qrels, qid, (*entries)[i].doc_id) >= min_grade ? 1 : 0;
        }
        sum += static_cast<double>(found) / static_cast<double>(relevant);
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

struct MetricsReport {
    double mrr_at_10 = 0.0;
    double ndcg_at_10 = 0.0;
    std::map<int, double> recall_at;
    double mrt_ms = 0.0;
    std::size_t num_queries = 0;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json recall = nlohmann::json::object();
        for (const auto& [d, v] : recall_at) {
            recall[std::to_string(d)] = v;
        }
        return {{"mrr_at_10", mrr_at_10},
                {"ndcg_at_10", ndcg_at_10},
                {"recall_at", std::move(recall)},
                {"mrt_ms", mrt_ms},
                {"num_queries", num_queries}};
    }

    [[nodiscard]] std::string to_table() const
    {
        std::ostringstream out;
        out << std::fixed << std::setprecision(4);
        auto row = [&](const std::string& name, double v) { out << std::left << std::setw(12) << name << std::right << std::setw(10) << v << '\n'; };
        row("MRR@10", mrr_at_10);
        row("NDCG@10", ndcg_at_10);
        for (const auto& [d, v] : recall_at) {
            row("R@" + std::to_string(d), v);
        }
        row("MRT (ms)", mrt_ms);
        out << std::left << std::setw(12) << "queries" << std::right << std::setw(10) << num_queries << '\n';
        return out.str();
    }
};

struct EvalOptions {
    int mrr_cutoff = 10;
    int ndcg_cutoff = 10;
    int min_grade = 1;
    std::vector<int> recall_depths = kRecallDepths;
};

inline MetricsReport evaluate(const Run& run, const Qrels& qrels, const EvalOptions& opts = {})
{
    MetricsReport r;
    r.mrr_at_10 = mrr_at(run, qrels, opts.mrr_cutoff, opts.min_grade);
    r.ndcg_at_10 = ndcg_at(run, qrels, opts.ndcg_cutoff);
    for (int d : opts.recall_depths) {
        r.recall_at[d] = recall_at(run, qrels, d, opts.min_grade);
    }
    r.num_queries = qrels.size();
    return r;
}

struct ResponseTime {
    double mrt_ms = 0.0;
    std::size_t timings = 0;
    std::uint64_t postings_touched = 0;  // summed over all timed runs
};

/// Mean single-threaded wall time of maxscore_daat per query. One untimed
/// warm-up pass precedes `repetitions` timed passes over the query log.
inline ResponseTime measure_mrt(const ImpactIndex& index, const std::vector<Query>& queries, std::size_t k,
                                int repetitions)
{
    if (queries.empty()) {
        throw ValidationError("response time needs a non-empty query log");
    }
    if (repetitions < 1) {
        throw ValidationError("repetitions must be at least 1");
    }
    for (const auto& q : queries) {
        (void)maxscore_daat(index, q, k);
    }
    ResponseTime rt;
    double total_ns = 0.0;
    for (int r = 0; r < repetitions; ++r) {
        for (const auto& q : queries) {
            const auto start = std::chrono::steady_clock::now();
            auto out = maxscore_daat(index, q, k);
            const auto stop = std::chrono::steady_clock::now();
            total_ns += static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
            rt.postings_touched += out.stats.postings_touched;
            ++rt.timings;
        }
    }
    rt.mrt_ms = total_ns / static_cast<double>(rt.timings) / 1e6;
    return rt;
}

/// Converts a search result to run entries. Entries with equal score are
/// listed by ascending external doc id.
inline std::vector<RunEntry> to_run_entries(const std::string& qid, const TopKResult& result,
                                            const ImpactIndex& index, const std::string& tag)
{
    std::vector<RunEntry> entries;
    entries.reserve(result.entries.size());
    for (const auto& e : result.entries) {
        entries.push_back({qid, index.doc_table.at(e.doc), 0, static_cast<double>(e.score), tag});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].rank = static_cast<int>(i + 1);
    }
    return entries;
}

inline std::string format_score(double s)
{
    if (s == std::floor(s) && std::abs(s) < 1e15) {
        return std::to_string(static_cast<long long>(s));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

/// `qid Q0 docid rank score tag`, one line per entry.
inline void write_trec_run(const Run& run, std::ostream& out)
{
    for (const auto& [qid, entries] : run) {
        for (const auto& e : entries) {
            out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << format_score(e.score) << ' '
                << e.tag << '\n';
        }
    }
}

inline Run read_trec_run(std::istream& in)
{
    Run run;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto f = detail::split_ws(line);
        if (f.size() != 6) {
            throw ParseError(line_no, "expected 6 columns: qid Q0 docid rank score tag");
        }
        RunEntry e;
        e.query_id = std::string(f[0]);
        e.doc_id = std::string(f[2]);
        e.tag = std::string(f[5]);
        try {
            std::size_t used = 0;
            e.rank = std::stoi(std::string(f[3]), &used);
            if (used != f[3].size() || e.rank < 1) {
                throw ParseError(line_no, "bad rank");
            }
            e.score = std::stod(std::string(f[4]), &used);
            if (used != f[4].size()) {
                throw ParseError(line_no, "bad score");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad rank or score");
        }
        run[e.query_id].push_back(std::move(e));
    });
    for (auto& [qid, entries] : run) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    }
    return run;
}

}  // namespace impactir
