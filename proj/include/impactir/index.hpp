#pragma once

// Quantized impact index: per-term posting lists of (doc, 8-bit impact),
// built from model impacts with a single collection-wide linear scale, and
// its binary on-disk format.
//
// File layout (integers little-endian):
//   "IMPX"  u8 version=1
//   u32 num_docs   u64 w_max (IEEE-754 bits)   u32 term_count
//   term_count x { u16 len, bytes term, u32 postings, u8 max_impact,
//                  u32 payload_len, payload }
//   u32 doc_count  doc_count x { u16 len, bytes doc_id }
// Terms are stored in ascending byte order. A payload is a sequence of
// (varint doc gap, u8 impact); the first gap is the doc id itself.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "expansion.hpp"
#include "impact.hpp"
#include "varint.hpp"

namespace impactir {

inline constexpr int kImpactBits = 8;
inline constexpr std::uint32_t kMaxQuantized = (1U << kImpactBits) - 1;
inline constexpr std::uint8_t kIndexVersion = 1;
inline constexpr char kIndexMagic[4] = {'I', 'M', 'P', 'X'};

using DocId = std::uint32_t;

struct ImpactPosting {
    DocId doc = 0;
    std::uint8_t impact = 0;
    friend bool operator==(const ImpactPosting&, const ImpactPosting&) = default;
};

struct PostingList {
    std::string term;
    std::vector<ImpactPosting> postings;  // strictly ascending doc
    std::uint8_t max_impact = 0;
    friend bool operator==(const PostingList&, const PostingList&) = default;

    [[nodiscard]] std::size_t size() const { return postings.size(); }
};

struct ImpactIndex {
    std::uint32_t num_docs = 0;
    double w_max = 0.0;
    int bits = kImpactBits;
    std::map<std::string, PostingList> lexicon;
    std::vector<std::string> doc_table;

    [[nodiscard]] bool empty() const { return lexicon.empty(); }

    [[nodiscard]] const PostingList* find(const std::string& term) const
    {
        auto it = lexicon.find(term);
        return it == lexicon.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t total_postings() const
    {
        std::size_t n = 0;
        for (const auto& [t, l] : lexicon) {
            n += l.size();
        }
        return n;
    }

    friend bool operator==(const ImpactIndex& a, const ImpactIndex& b)
    {
        return a.num_docs == b.num_docs && std::bit_cast<std::uint64_t>(a.w_max) == std::bit_cast<std::uint64_t>(b.w_max) &&
               a.bits == b.bits && a.lexicon == b.lexicon && a.doc_table == b.doc_table;
    }
};

/// Raw impacts of one document, one entry per unique term in term order.
using DocImpacts = std::vector<std::pair<std::string, double>>;

inline std::vector<DocImpacts> compute_collection_impacts(const ImpactModel& model,
                                                          std::span<const ExpandedDocument> docs,
                                                          const FeatureContext& ctx)
{
    std::vector<DocImpacts> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        DocImpacts impacts;
        impacts.reserve(d.size());
        for (const auto& e : d.terms()) {
            impacts.emplace_back(e.term, term_impact(model, featurize(e, d, ctx)));
        }
        out.push_back(std::move(impacts));
    }
    return out;
}

inline std::vector<DocImpacts> compute_collection_impacts(const ImpactModel& model,
                                                          std::span<const ExpandedDocument> docs)
{
    return compute_collection_impacts(model, docs, FeatureContext::from(docs));
}

/// round(w * 255 / w_max) with halves rounded up; positive impacts never
/// quantize to 0.
inline std::uint8_t quantize_impact(double w, double w_max)
{
    if (!(w_max > 0.0) || !std::isfinite(w_max)) {
        throw RangeError("quantization scale must be positive and finite");
    }
    if (!(w >= 0.0) || w > w_max) {
        throw RangeError("impact " + std::to_string(w) + " outside [0, " + std::to_string(w_max) + "]");
    }
    if (w == 0.0) {
        return 0;
    }
    auto q = static_cast<std::uint32_t>(std::floor(w / w_max * kMaxQuantized + 0.5));
    return static_cast<std::uint8_t>(std::clamp<std::uint32_t>(q, 1, kMaxQuantized));
}

inline double dequantize_impact(std::uint8_t q, double w_max)
{
    return static_cast<double>(q) * w_max / kMaxQuantized;
}

/// Builds the index. `doc_ids[i]` names document i. The scale is the largest
/// raw impact unless `w_max_override` is given. When every impact is zero
/// the result has an empty lexicon and w_max = 0.
inline ImpactIndex build_index(std::span<const DocImpacts> impacts, std::vector<std::string> doc_ids,
                               std::optional<double> w_max_override = std::nullopt)
{
    if (doc_ids.size() != impacts.size()) {
        throw ValidationError("doc table size does not match number of impact maps");
    }
    double w_max = 0.0;
    for (const auto& doc : impacts) {
        for (const auto& [t, w] : doc) {
            if (!std::isfinite(w) || w < 0.0) {
                throw RangeError("impact for term '" + t + "' is negative or not finite");
            }
            w_max = std::max(w_max, w);
        }
    }
    if (w_max_override) {
        w_max = *w_max_override;
    }
    ImpactIndex index;
    index.num_docs = static_cast<std::uint32_t>(impacts.size());
    index.doc_table = std::move(doc_ids);
    if (!(w_max > 0.0)) {
        index.w_max = 0.0;
        return index;
    }
    index.w_max = w_max;
    for (std::size_t d = 0; d < impacts.size(); ++d) {
        for (const auto& [t, w] : impacts[d]) {
            const auto q = quantize_impact(w, w_max);
            if (q == 0) {
                continue;
            }
            auto& list = index.lexicon[t];
            if (!list.postings.empty() && list.postings.back().doc == d) {
                throw ValidationError("term '" + t + "' listed twice for one document");
            }
            list.term = t;
            list.postings.push_back({static_cast<DocId>(d), q});
            list.max_impact = std::max(list.max_impact, q);
        }
    }
    return index;
}

namespace detail {

    class ByteWriter {
      public:
        void bytes(const void* p, std::size_t n)
        {
            auto b = static_cast<const std::uint8_t*>(p);
            buf_.insert(buf_.end(), b, b + n);
        }
        void u8(std::uint8_t v) { buf_.push_back(v); }
        void u16(std::uint16_t v) { le(v, 2); }
        void u32(std::uint32_t v) { le(v, 4); }
        void u64(std::uint64_t v) { le(v, 8); }
        void str16(const std::string& s)
        {
            if (s.size() > 0xFFFF) {
                throw ValidationError("string longer than 65535 bytes cannot be stored");
            }
            u16(static_cast<std::uint16_t>(s.size()));
            bytes(s.data(), s.size());
        }
        std::vector<std::uint8_t> take() { return std::move(buf_); }

      private:
        void le(std::uint64_t v, int n)
        {
            for (int i = 0; i < n; ++i) {
                buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
            }
        }
        std::vector<std::uint8_t> buf_;
    };

    class ByteReader {
      public:
        explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

        [[nodiscard]] std::size_t offset() const { return pos_; }
        [[nodiscard]] bool at_end() const { return pos_ == in_.size(); }
        [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

        std::span<const std::uint8_t> take(std::size_t n, const char* what)
        {
            if (in_.size() - pos_ < n) {
                throw FormatError(pos_, std::string("truncated ") + what);
            }
            auto s = in_.subspan(pos_, n);
            pos_ += n;
            return s;
        }
        std::uint8_t u8(const char* what) { return take(1, what)[0]; }
        std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(le(2, what)); }
        std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
        std::uint64_t u64(const char* what) { return le(8, what); }
        std::string str16(const char* what)
        {
            const auto n = u16(what);
            auto s = take(n, what);
            return {reinterpret_cast<const char*>(s.data()), s.size()};
        }

      private:
        std::uint64_t le(int n, const char* what)
        {
            auto s = take(static_cast<std::size_t>(n), what);
            std::uint64_t v = 0;
            for (int i = 0; i < n; ++i) {
                v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
            }
            return v;
        }
        std::span<const std::uint8_t> in_;
        std::size_t pos_ = 0;
    };

}  // namespace detail

inline std::vector<std::uint8_t> encode_postings(const std::vector<ImpactPosting>& postings)
{
    std::vector<std::uint8_t> payload;
    DocId prev = 0;
    for (std::size_t i = 0; i < postings.size(); ++i) {
        varint::encode(i == 0 ? postings[i].doc : postings[i].doc - prev, payload);
        payload.push_back(postings[i].impact);
        prev = postings[i].doc;
    }
    return payload;
}

inline std::vector<std::uint8_t> serialize_index(const ImpactIndex& index)
{
    if (index.doc_table.size() != index.num_docs) {
        throw ValidationError("doc table size does not match num_docs");
    }
    detail::ByteWriter w;
    w.bytes(kIndexMagic, sizeof kIndexMagic);
    w.u8(kIndexVersion);
    w.u32(index.num_docs);
    w.u64(std::bit_cast<std::uint64_t>(index.w_max));
    w.u32(static_cast<std::uint32_t>(index.lexicon.size()));
    for (const auto& [term, list] : index.lexicon) {
        w.str16(term);
        w.u32(static_cast<std::uint32_t>(list.postings.size()));
        w.u8(list.max_impact);
        auto payload = encode_postings(list.postings);
        w.u32(static_cast<std::uint32_t>(payload.size()));
        w.bytes(payload.data(), payload.size());
    }
    w.u32(static_cast<std::uint32_t>(index.doc_table.size()));
    for (const auto& d : index.doc_table) {
        w.str16(d);
    }
    return w.take();
}

/// Parses and validates a serialized index. Every structural defect raises
/// FormatError with the byte offset where it was detected.
inline ImpactIndex deserialize_index(std::span<const std::uint8_t> bytes)
{
    detail::ByteReader r(bytes);
    auto magic = r.take(sizeof kIndexMagic, "magic");
    if (std::memcmp(magic.data(), kIndexMagic, sizeof kIndexMagic) != 0) {
        throw FormatError(0, "bad magic");
    }
    const auto version_at = r.offset();
    if (r.u8("version") != kIndexVersion) {
        throw FormatError(version_at, "unsupported version");
    }
    ImpactIndex index;
    index.num_docs = r.u32("num_docs");
    const auto w_max_at = r.offset();
    index.w_max = std::bit_cast<double>(r.u64("w_max"));
    if (!std::isfinite(index.w_max) || index.w_max < 0.0) {
        throw FormatError(w_max_at, "w_max is negative or not finite");
    }
    const auto term_count = r.u32("term count");
    if (term_count > 0 && !(index.w_max > 0.0)) {
        throw FormatError(w_max_at, "postings present but w_max is 0");
    }
    const std::string* prev_term = nullptr;
    for (std::uint32_t t = 0; t < term_count; ++t) {
        const auto term_at = r.offset();
        auto term = r.str16("term");
        if (prev_term != nullptr && !(*prev_term < term)) {
            throw FormatError(term_at, "terms not in strictly ascending order");
        }
        const auto count = r.u32("posting count");
        const auto max_at = r.offset();
        const auto max_impact = r.u8("max impact");
        const auto payload_len = r.u32("payload length");
        const auto payload_at = r.offset();
        auto payload = r.take(payload_len, "payload");
        if (count == 0) {
            throw FormatError(term_at, "empty posting list");
        }
        // every posting takes at least two payload bytes
        if (count > payload_len / 2) {
            throw FormatError(term_at, "posting count exceeds payload");
        }
        PostingList list{term, {}, max_impact};
        list.postings.reserve(count);
        std::size_t pos = 0;
        std::uint64_t doc = 0;
        std::uint8_t seen_max = 0;
        for (std::uint32_t i = 0; i < count; ++i) {
            const auto gap_at = pos;
            auto gap = varint::decode(payload, pos);
            if (!gap || varint::encoded_size(*gap) != pos - gap_at) {
                throw FormatError(payload_at + gap_at, "bad doc gap");
            }
            if (i > 0 && *gap == 0) {
                throw FormatError(payload_at + gap_at, "doc ids not strictly ascending");
            }
            doc = (i == 0 ? *gap : doc + *gap);
            if (doc >= index.num_docs) {
                throw FormatError(payload_at + gap_at, "doc id out of range");
            }
            if (pos >= payload.size()) {
                throw FormatError(payload_at + pos, "truncated impact");
            }
            const auto q = payload[pos++];
            if (q == 0) {
                throw FormatError(payload_at + pos - 1, "zero impact posting");
            }
            seen_max = std::max(seen_max, q);
            list.postings.push_back({static_cast<DocId>(doc), q});
        }
        if (pos != payload.size()) {
            throw FormatError(payload_at + pos, "trailing payload bytes");
        }
        if (seen_max != max_impact) {
            throw FormatError(max_at, "max impact does not match postings");
        }
        auto [it, fresh] = index.lexicon.emplace(term, std::move(list));
        prev_term = &it->first;
    }
    const auto docs_at = r.offset();
    const auto doc_count = r.u32("doc count");
    if (doc_count != index.num_docs) {
        throw FormatError(docs_at, "doc table size does not match num_docs");
    }
    if (doc_count > r.remaining() / 2) {
        throw FormatError(docs_at, "doc table truncated");
    }
    index.doc_table.reserve(doc_count);
    for (std::uint32_t d = 0; d < doc_count; ++d) {
        index.doc_table.push_back(r.str16("doc id"));
    }
    if (!r.at_end()) {
        throw FormatError(r.offset(), "trailing bytes");
    }
    return index;
}

inline void write_index(const ImpactIndex& index, std::ostream& out)
{
    auto bytes = serialize_index(index);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed to write index");
    }
}

inline ImpactIndex read_index(std::istream& in)
{
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_index(bytes);
}

/// One JSON object per term: {"term": ..., "postings": [[doc, q], ...]}.
inline void dump_index_jsonl(const ImpactIndex& index, std::ostream& out)
{
    for (const auto& [term, list] : index.lexicon) {
        nlohmann::json postings = nlohmann::json::array();
        for (const auto& p : list.postings) {
            postings.push_back({p.doc, p.impact});
        }
        out << nlohmann::json{{"term", term}, {"postings", std::move(postings)}}.dump() << '\n';
    }
}

}  // namespace impactir
