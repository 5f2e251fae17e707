#pragma once

// Data model and line-oriented parsers: collections (JSONL), queries (TSV),
// qrels (TREC), expansion records (JSONL), training triples (TSV) and
// distillation groups (JSONL).

#include <cctype>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace impactir {

using Terms = std::vector<std::string>;

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 act as separators.
inline Terms tokenize(std::string_view text)
{
    Terms out;
    std::string cur;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

inline std::string join(const Terms& terms, std::string_view sep = " ")
{
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i != 0) {
            out += sep;
        }
        out += terms[i];
    }
    return out;
}

struct Document {
    std::string doc_id;
    std::string text;
    Terms tokens;

    static Document from_text(std::string doc_id, std::string text)
    {
        Document d{std::move(doc_id), std::move(text), {}};
        d.tokens = tokenize(d.text);
        return d;
    }
    friend bool operator==(const Document&, const Document&) = default;
};

struct Query {
    std::string query_id;
    Terms tokens;
    std::string text;

    static Query from_text(std::string query_id, std::string text)
    {
        Query q{std::move(query_id), {}, std::move(text)};
        q.tokens = tokenize(q.text);
        return q;
    }
    friend bool operator==(const Query&, const Query&) = default;
};

/// query_id -> (doc_id -> grade). Absent pairs have grade 0.
using Qrels = std::map<std::string, std::map<std::string, int>>;

inline int grade_of(const Qrels& qrels, const std::string& qid, const std::string& docid)
{
    auto q = qrels.find(qid);
    if (q == qrels.end()) {
        return 0;
    }
    auto d = q->second.find(docid);
    return d == q->second.end() ? 0 : d->second;
}

struct TrainTriple {
    Query query;
    std::string positive_doc;
    std::string negative_doc;
};

struct ScoredDoc {
    std::string doc_id;
    double teacher_score = 0.0;
    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// One training query with its positive and hard negatives, each carrying a
/// teacher relevance score. The positive is always stored first.
struct DistillationGroup {
    Query query;
    std::vector<ScoredDoc> candidates;
    std::size_t positive_index = 0;
    friend bool operator==(const DistillationGroup&, const DistillationGroup&) = default;
};

struct ExpansionQuery {
    std::string text;
    std::optional<double> relevance_score;
    friend bool operator==(const ExpansionQuery&, const ExpansionQuery&) = default;
};

struct ExpansionRecord {
    std::string doc_id;
    std::vector<ExpansionQuery> queries;
    friend bool operator==(const ExpansionRecord&, const ExpansionRecord&) = default;
};

namespace detail {

    // Calls fn(line, line_no) for every non-blank line; line_no is 1-based.
    template <typename Fn>
    void for_each_line(std::istream& in, Fn&& fn)
    {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.find_first_not_of(" \t") == std::string::npos) {
                continue;
            }
            fn(line, line_no);
        }
    }

    inline nlohmann::json parse_json_object(const std::string& line, std::size_t line_no)
    {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw ParseError(line_no, "expected a JSON object");
        }
        return j;
    }

    inline std::string string_field(const nlohmann::json& j, const char* key, std::size_t line_no)
    {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw ParseError(line_no, std::string("missing string field '") + key + "'");
        }
        return it->get<std::string>();
    }

    inline double number_value(const nlohmann::json& j, const char* what, std::size_t line_no)
    {
        if (!j.is_number()) {
            throw ParseError(line_no, std::string(what) + " must be a number");
        }
        return j.get<double>();
    }

    // Accepts {"doc_id": "...", "score": x} or ["...", x].
    inline ScoredDoc scored_doc(const nlohmann::json& j, std::size_t line_no)
    {
        if (j.is_array() && j.size() == 2 && j[0].is_string()) {
            return {j[0].get<std::string>(), number_value(j[1], "score", line_no)};
        }
        if (j.is_object()) {
            auto score = j.find("score");
            if (score == j.end()) {
                throw ParseError(line_no, "candidate without 'score'");
            }
            return {string_field(j, "doc_id", line_no), number_value(*score, "score", line_no)};
        }
        throw ParseError(line_no, "candidate must be {doc_id, score} or [doc_id, score]");
    }

    inline std::vector<std::string_view> split_ws(std::string_view s)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
            }
            std::size_t j = i;
            while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            if (j > i) {
                out.push_back(s.substr(i, j - i));
            }
            i = j;
        }
        return out;
    }

    inline std::vector<std::string> split_tabs(const std::string& s)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            auto tab = s.find('\t', start);
            out.push_back(s.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) {
                break;
            }
            start = tab + 1;
        }
        return out;
    }

}  // namespace detail

inline std::vector<Document> load_collection(std::istream& in)
{
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto j = detail::parse_json_object(line, line_no);
        auto id = detail::string_field(j, "doc_id", line_no);
        auto text = detail::string_field(j, "text", line_no);
        if (id.empty()) {
            throw ParseError(line_no, "empty doc_id");
        }
        if (!seen.insert(id).second) {
            throw DuplicateKeyError(line_no, id);
        }
        docs.push_back(Document::from_text(std::move(id), std::move(text)));
    });
    return docs;
}

inline void write_collection(const std::vector<Document>& docs, std::ostream& out)
{
    for (const auto& d : docs) {
        out << nlohmann::json{{"doc_id", d.doc_id}, {"text", d.text}}.dump() << '\n';
    }
}

/// `query_id<TAB>query_text` per line.
inline std::vector<Query> load_queries(std::istream& in)
{
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw ParseError(line_no, "expected query_id<TAB>query_text");
        }
        auto id = line.substr(0, tab);
        if (!seen.insert(id).second) {
            throw DuplicateKeyError(line_no, id);
        }
        queries.push_back(Query::from_text(std::move(id), line.substr(tab + 1)));
    });
    return queries;
}

inline void write_queries(const std::vector<Query>& queries, std::ostream& out)
{
    for (const auto& q : queries) {
        out << q.query_id << '\t' << (q.text.empty() ? join(q.tokens) : q.text) << '\n';
    }
}

/// TREC qrels: `qid iter docid grade`. A repeated (qid, docid) keeps the last grade.
inline Qrels load_qrels(std::istream& in)
{
    Qrels qrels;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto fields = detail::split_ws(line);
        if (fields.size() != 4) {
            throw ParseError(line_no, "expected 4 columns: qid iter docid grade");
        }
        std::string grade_text(fields[3]);
        std::size_t used = 0;
        int grade = 0;
        try {
            grade = std::stoi(grade_text, &used);
        } catch (const std::exception&) {
            throw ParseError(line_no, "grade '" + grade_text + "' is not an integer");
        }
        if (used != grade_text.size()) {
            throw ParseError(line_no, "grade '" + grade_text + "' is not an integer");
        }
        if (grade < 0) {
            throw ParseError(line_no, "negative grade");
        }
        qrels[std::string(fields[0])][std::string(fields[2])] = grade;
    });
    return qrels;
}

inline void write_qrels(const Qrels& qrels, std::ostream& out)
{
    for (const auto& [qid, docs] : qrels) {
        for (const auto& [docid, grade] : docs) {
            out << qid << " 0 " << docid << ' ' << grade << '\n';
        }
    }
}

/// `query_id<TAB>query_text<TAB>positive_doc<TAB>negative_doc` per line.
inline std::vector<TrainTriple> load_triples(std::istream& in)
{
    std::vector<TrainTriple> triples;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto f = detail::split_tabs(line);
        if (f.size() != 4 || f[0].empty() || f[2].empty() || f[3].empty()) {
            throw ParseError(line_no, "expected query_id, query_text, positive, negative");
        }
        if (f[2] == f[3]) {
            throw ParseError(line_no, "positive and negative document are identical");
        }
        triples.push_back({Query::from_text(f[0], f[1]), f[2], f[3]});
    });
    return triples;
}

inline void write_triples(const std::vector<TrainTriple>& triples, std::ostream& out)
{
    for (const auto& t : triples) {
        out << t.query.query_id << '\t' << t.query.text << '\t' << t.positive_doc << '\t'
            << t.negative_doc << '\n';
    }
}

inline DistillationGroup make_group(Query query, ScoredDoc positive, std::vector<ScoredDoc> negatives)
{
    if (negatives.empty()) {
        throw ValidationError("group '" + query.query_id + "' has no negatives");
    }
    DistillationGroup g{std::move(query), {}, 0};
    g.candidates.reserve(negatives.size() + 1);
    g.candidates.push_back(std::move(positive));
    for (auto& n : negatives) {
        g.candidates.push_back(std::move(n));
    }
    std::unordered_set<std::string> ids;
    for (const auto& c : g.candidates) {
        if (!ids.insert(c.doc_id).second) {
            throw ValidationError("group '" + g.query.query_id + "' repeats doc '" + c.doc_id + "'");
        }
    }
    return g;
}

inline std::vector<DistillationGroup> load_distillation_groups(std::istream& in)
{
    std::vector<DistillationGroup> groups;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto j = detail::parse_json_object(line, line_no);
        auto qid = detail::string_field(j, "query_id", line_no);
        auto qtext = detail::string_field(j, "query_text", line_no);
        auto pos = j.find("positive");
        if (pos == j.end()) {
            throw ParseError(line_no, "missing 'positive'");
        }
        auto neg = j.find("negatives");
        if (neg == j.end() || !neg->is_array()) {
            throw ParseError(line_no, "missing array 'negatives'");
        }
        std::vector<ScoredDoc> negatives;
        for (const auto& n : *neg) {
            negatives.push_back(detail::scored_doc(n, line_no));
        }
        try {
            groups.push_back(make_group(Query::from_text(qid, qtext),
                                        detail::scored_doc(*pos, line_no), std::move(negatives)));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return groups;
}

inline void write_distillation_groups(const std::vector<DistillationGroup>& groups, std::ostream& out)
{
    for (const auto& g : groups) {
        nlohmann::json negatives = nlohmann::json::array();
        for (std::size_t i = 0; i < g.candidates.size(); ++i) {
            if (i != g.positive_index) {
                negatives.push_back({{"doc_id", g.candidates[i].doc_id},
                                     {"score", g.candidates[i].teacher_score}});
            }
        }
        const auto& p = g.candidates[g.positive_index];
        nlohmann::json j{{"query_id", g.query.query_id},
                         {"query_text", g.query.text},
                         {"positive", {{"doc_id", p.doc_id}, {"score", p.teacher_score}}},
                         {"negatives", std::move(negatives)}};
        out << j.dump() << '\n';
    }
}

inline std::vector<ExpansionRecord> load_expansions(std::istream& in)
{
    std::vector<ExpansionRecord> records;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        auto j = detail::parse_json_object(line, line_no);
        ExpansionRecord rec{detail::string_field(j, "doc_id", line_no), {}};
        auto qs = j.find("queries");
        if (qs == j.end() || !qs->is_array()) {
            throw ParseError(line_no, "missing array 'queries'");
        }
        for (const auto& q : *qs) {
            if (!q.is_object()) {
                throw ParseError(line_no, "query entries must be objects");
            }
            ExpansionQuery eq{detail::string_field(q, "text", line_no), std::nullopt};
            if (auto s = q.find("score"); s != q.end() && !s->is_null()) {
                eq.relevance_score = detail::number_value(*s, "score", line_no);
            }
            rec.queries.push_back(std::move(eq));
        }
        records.push_back(std::move(rec));
    });
    return records;
}

inline void write_expansions(const std::vector<ExpansionRecord>& records, std::ostream& out)
{
    for (const auto& r : records) {
        nlohmann::json qs = nlohmann::json::array();
        for (const auto& q : r.queries) {
            nlohmann::json e{{"text", q.text}};
            if (q.relevance_score) {
                e["score"] = *q.relevance_score;
            }
            qs.push_back(std::move(e));
        }
        out << nlohmann::json{{"doc_id", r.doc_id}, {"queries", std::move(qs)}}.dump() << '\n';
    }
}

/// Checks that every record names a document of the collection.
inline void check_expansion_references(const std::vector<ExpansionRecord>& records,
                                       const std::vector<Document>& docs)
{
    std::unordered_set<std::string> ids;
    for (const auto& d : docs) {
        ids.insert(d.doc_id);
    }
    for (const auto& r : records) {
        if (!ids.contains(r.doc_id)) {
            throw ValidationError("expansion record for unknown doc '" + r.doc_id + "'");
        }
    }
}

}  // namespace impactir
