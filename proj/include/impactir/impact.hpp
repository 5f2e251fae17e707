#pragma once

// Term-impact model: a linear layer followed by ReLU over a small set of
// per-(term, document) features. A document's score for a query is the sum
// of the impacts of the distinct query terms it contains. Provides the four
// ranking objectives with analytic gradients and a gradient-descent trainer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "expansion.hpp"
#include "random.hpp"

namespace impactir {

inline constexpr std::size_t kFeatureDim = 6;
inline constexpr int kFeatureVersion = 1;

/// [log(1+tf), injected, log(1+|unique terms|), log(1+df), 1/(1+first position), 1]
using FeatureVector = std::array<double, kFeatureDim>;
using Weights = std::array<double, kFeatureDim>;

/// Collection statistics the features depend on.
struct FeatureContext {
    std::unordered_map<std::string, std::size_t> document_frequency;
    std::size_t num_docs = 0;

    static FeatureContext from(std::span<const ExpandedDocument> docs)
    {
        FeatureContext ctx;
        ctx.num_docs = docs.size();
        for (const auto& d : docs) {
            for (const auto& e : d.terms()) {
                ++ctx.document_frequency[e.term];
            }
        }
        return ctx;
    }

    [[nodiscard]] std::size_t df(const std::string& term) const
    {
        auto it = document_frequency.find(term);
        return it == document_frequency.end() ? 0 : it->second;
    }
};

inline FeatureVector featurize(const TermEntry& entry, const ExpandedDocument& doc, const FeatureContext& ctx)
{
    return {std::log1p(static_cast<double>(entry.tf_original)),
            entry.injected ? 1.0 : 0.0,
            std::log1p(static_cast<double>(doc.size())),
            std::log1p(static_cast<double>(ctx.df(entry.term))),
            1.0 / (1.0 + static_cast<double>(entry.first_position)),
            1.0};
}

inline double dot(const Weights& w, const FeatureVector& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
        s += w[i] * f[i];
    }
    return s;
}

struct ImpactModel {
    Weights weights{};

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"feature_version", kFeatureVersion}, {"weights", weights}};
    }

    static ImpactModel from_json(const nlohmann::json& j)
    {
        if (!j.is_object() || j.value("feature_version", -1) != kFeatureVersion) {
            throw ValidationError("model JSON must have feature_version " + std::to_string(kFeatureVersion));
        }
        auto it = j.find("weights");
        if (it == j.end() || !it->is_array() || it->size() != kFeatureDim) {
            throw ValidationError("model JSON must have " + std::to_string(kFeatureDim) + " weights");
        }
        ImpactModel m;
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            if (!(*it)[i].is_number()) {
                throw ValidationError("model weights must be numbers");
            }
            m.weights[i] = (*it)[i].get<double>();
            if (!std::isfinite(m.weights[i])) {
                throw ValidationError("model weights must be finite");
            }
        }
        return m;
    }

    friend bool operator==(const ImpactModel&, const ImpactModel&) = default;
};

/// relu(w . f). The subgradient at 0 is 0.
inline double term_impact(const ImpactModel& model, const FeatureVector& features)
{
    return std::max(0.0, dot(model.weights, features));
}

/// Features of the distinct query terms that occur in a document.
using MatchedTerms = std::vector<FeatureVector>;

inline Terms distinct_terms(const Terms& tokens)
{
    Terms out;
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens) {
        if (seen.insert(t).second) {
            out.push_back(t);
        }
    }
    return out;
}

inline MatchedTerms match_terms(const Query& query, const ExpandedDocument& doc, const FeatureContext& ctx)
{
    MatchedTerms out;
    for (const auto& t : distinct_terms(query.tokens)) {
        if (const auto* e = doc.find(t)) {
            out.push_back(featurize(*e, doc, ctx));
        }
    }
    return out;
}

inline double score_matched(const ImpactModel& model, const MatchedTerms& matched)
{
    double s = 0.0;
    for (const auto& f : matched) {
        s += term_impact(model, f);
    }
    return s;
}

/// d score / d weights: sum of the features of terms with positive pre-activation.
inline Weights score_gradient(const ImpactModel& model, const MatchedTerms& matched)
{
    Weights g{};
    for (const auto& f : matched) {
        if (dot(model.weights, f) > 0.0) {
            for (std::size_t i = 0; i < kFeatureDim; ++i) {
                g[i] += f[i];
            }
        }
    }
    return g;
}

inline double score(const ImpactModel& model, const Query& query, const ExpandedDocument& doc,
                    const FeatureContext& ctx)
{
    return score_matched(model, match_terms(query, doc, ctx));
}

/// Losses are accumulated in extended precision so that finite differences
/// resolve gradient components that are zero by cancellation.
using Real = long double;

struct LossResult {
    Real loss = 0.0;
    Weights gradient{};
};

/// Candidate documents of one query; the target is candidate 0.
using CandidateSet = std::vector<MatchedTerms>;

namespace detail {

    inline std::vector<Real> log_softmax(std::span<const Real> x, Real inv_temperature = 1.0)
    {
        Real m = -std::numeric_limits<Real>::infinity();
        for (Real v : x) {
            m = std::max(m, v * inv_temperature);
        }
        Real z = 0.0;
        for (Real v : x) {
            z += std::exp(v * inv_temperature - m);
        }
        const Real lse = m + std::log(z);
        std::vector<Real> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = x[i] * inv_temperature - lse;
        }
        return out;
    }

    inline std::vector<Real> scores_of(const ImpactModel& model, const CandidateSet& c)
    {
        std::vector<Real> s(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            Real total = 0.0;
            for (const auto& f : c[i]) {
                Real pre = 0.0;
                for (std::size_t d = 0; d < kFeatureDim; ++d) {
                    pre += static_cast<Real>(model.weights[d]) * f[d];
                }
                total += std::max<Real>(0.0, pre);
            }
            s[i] = total;
        }
        return s;
    }

    // gradient += sum_j dl_ds[j] * d s_j / d w
    inline void chain(const ImpactModel& model, const CandidateSet& c, std::span<const Real> dl_ds, Weights& gradient)
    {
        std::array<Real, kFeatureDim> acc{};
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (dl_ds[j] == 0.0) {
                continue;
            }
            auto ds = score_gradient(model, c[j]);
            for (std::size_t i = 0; i < kFeatureDim; ++i) {
                acc[i] += dl_ds[j] * ds[i];
            }
        }
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            gradient[i] += static_cast<double>(acc[i]);
        }
    }

}  // namespace detail

/// -log softmax(scores)[0].
inline LossResult softmax_cross_entropy(const ImpactModel& model, const CandidateSet& candidates)
{
    auto s = detail::scores_of(model, candidates);
    auto logp = detail::log_softmax(s);
    LossResult r;
    r.loss = -logp[0];
    std::vector<Real> dl_ds(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        dl_ds[j] = std::exp(logp[j]) - (j == 0 ? 1.0 : 0.0);
    }
    detail::chain(model, candidates, dl_ds, r.gradient);
    return r;
}

/// KL(teacher || student) between temperature-scaled softmax distributions.
inline LossResult kl_divergence(const ImpactModel& model, const CandidateSet& candidates,
                                std::span<const double> teacher, double temperature)
{
    if (teacher.size() != candidates.size()) {
        throw ValidationError("teacher score count does not match candidate count");
    }
    if (!(temperature > 0.0)) {
        throw ValidationError("temperature must be positive");
    }
    auto s = detail::scores_of(model, candidates);
    const std::vector<Real> t(teacher.begin(), teacher.end());
    const Real inv_tau = 1.0L / temperature;
    auto logp = detail::log_softmax(t, inv_tau);
    auto logq = detail::log_softmax(s, inv_tau);
    LossResult r;
    std::vector<Real> dl_ds(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        const Real p = std::exp(logp[j]);
        if (p > 0.0) {
            r.loss += p * (logp[j] - logq[j]);
        }
        dl_ds[j] = (std::exp(logq[j]) - p) / temperature;
    }
    detail::chain(model, candidates, dl_ds, r.gradient);
    return r;
}

/// Mean over negatives j of ((s+ - s_j) - (t+ - t_j))^2.
inline LossResult margin_mse(const ImpactModel& model, const CandidateSet& candidates,
                             std::span<const double> teacher, std::size_t positive = 0)
{
    if (teacher.size() != candidates.size() || candidates.size() < 2 || positive >= candidates.size()) {
        throw ValidationError("margin-MSE needs one positive, >= 1 negatives and matching teacher scores");
    }
    auto s = detail::scores_of(model, candidates);
    const Real m = static_cast<Real>(candidates.size() - 1);
    LossResult r;
    std::vector<Real> dl_ds(s.size(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == positive) {
            continue;
        }
        const Real residual = (s[positive] - s[j]) - (static_cast<Real>(teacher[positive]) - teacher[j]);
        r.loss += residual * residual / m;
        dl_ds[positive] += 2.0 * residual / m;
        dl_ds[j] -= 2.0 * residual / m;
    }
    detail::chain(model, candidates, dl_ds, r.gradient);
    return r;
}

/// Expanded documents by id plus the collection statistics used for features.
class TrainingCorpus {
  public:
    explicit TrainingCorpus(std::vector<ExpandedDocument> docs)
        : docs_(std::move(docs)), context_(FeatureContext::from(docs_))
    {
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            by_id_.emplace(docs_[i].doc_id(), i);
        }
    }

    [[nodiscard]] const FeatureContext& context() const { return context_; }
    [[nodiscard]] const std::vector<ExpandedDocument>& documents() const { return docs_; }

    [[nodiscard]] const ExpandedDocument& doc(const std::string& doc_id) const
    {
        auto it = by_id_.find(doc_id);
        if (it == by_id_.end()) {
            throw ValidationError("unknown training document '" + doc_id + "'");
        }
        return docs_[it->second];
    }

    [[nodiscard]] MatchedTerms matched(const Query& q, const std::string& doc_id) const
    {
        return match_terms(q, doc(doc_id), context_);
    }

    [[nodiscard]] CandidateSet candidates(const TrainTriple& t) const
    {
        return {matched(t.query, t.positive_doc), matched(t.query, t.negative_doc)};
    }

    /// Query i sees [d_i+, d_i-] followed by d_j+ for every j != i.
    [[nodiscard]] CandidateSet in_batch_candidates(std::span<const TrainTriple> batch, std::size_t i) const
    {
        CandidateSet c{matched(batch[i].query, batch[i].positive_doc),
                       matched(batch[i].query, batch[i].negative_doc)};
        for (std::size_t j = 0; j < batch.size(); ++j) {
            if (j != i) {
                c.push_back(matched(batch[i].query, batch[j].positive_doc));
            }
        }
        return c;
    }

    /// Candidates of a group with the positive moved to the front.
    [[nodiscard]] CandidateSet candidates(const DistillationGroup& g) const
    {
        CandidateSet c;
        c.push_back(matched(g.query, g.candidates[g.positive_index].doc_id));
        for (std::size_t j = 0; j < g.candidates.size(); ++j) {
            if (j != g.positive_index) {
                c.push_back(matched(g.query, g.candidates[j].doc_id));
            }
        }
        return c;
    }

    [[nodiscard]] static std::vector<double> teacher_scores(const DistillationGroup& g)
    {
        std::vector<double> t{g.candidates[g.positive_index].teacher_score};
        for (std::size_t j = 0; j < g.candidates.size(); ++j) {
            if (j != g.positive_index) {
                t.push_back(g.candidates[j].teacher_score);
            }
        }
        return t;
    }

  private:
    std::vector<ExpandedDocument> docs_;
    FeatureContext context_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

inline LossResult loss_pairwise_ce(const ImpactModel& model, const TrainTriple& triple, const TrainingCorpus& corpus)
{
    return softmax_cross_entropy(model, corpus.candidates(triple));
}

inline LossResult in_batch_loss(const ImpactModel& model, std::span<const CandidateSet> per_query)
{
    if (per_query.empty()) {
        throw ValidationError("in-batch loss needs at least one query");
    }
    LossResult total = softmax_cross_entropy(model, per_query.front());
    const Real b = static_cast<Real>(per_query.size());
    for (const auto& c : per_query.subspan(1)) {
        auto r = softmax_cross_entropy(model, c);
        total.loss += r.loss;
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            total.gradient[i] += r.gradient[i];
        }
    }
    total.loss /= b;
    for (auto& g : total.gradient) {
        g /= b;
    }
    return total;
}

inline LossResult loss_in_batch(const ImpactModel& model, std::span<const TrainTriple> batch,
                                const TrainingCorpus& corpus)
{
    if (batch.empty()) {
        throw ValidationError("in-batch loss needs at least one triple");
    }
    std::vector<CandidateSet> per_query;
    per_query.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        per_query.push_back(corpus.in_batch_candidates(batch, i));
    }
    return in_batch_loss(model, per_query);
}

inline LossResult loss_kl_distill(const ImpactModel& model, const DistillationGroup& group,
                                  const TrainingCorpus& corpus, double temperature = 1.0)
{
    auto t = TrainingCorpus::teacher_scores(group);
    return kl_divergence(model, corpus.candidates(group), t, temperature);
}

inline LossResult loss_margin_mse(const ImpactModel& model, const DistillationGroup& group,
                                  const TrainingCorpus& corpus)
{
    auto t = TrainingCorpus::teacher_scores(group);
    return margin_mse(model, corpus.candidates(group), t, 0);
}

enum class LossKind { pairwise_ce, in_batch, kl_distill, margin_mse };

inline std::string_view to_string(LossKind k)
{
    switch (k) {
    case LossKind::pairwise_ce: return "pairwise_ce";
    case LossKind::in_batch: return "in_batch";
    case LossKind::kl_distill: return "kl_distill";
    case LossKind::margin_mse: return "margin_mse";
    }
    return "?";
}

inline LossKind parse_loss_kind(std::string_view s)
{
    for (auto k : {LossKind::pairwise_ce, LossKind::in_batch, LossKind::kl_distill, LossKind::margin_mse}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ValidationError("unknown loss kind '" + std::string(s) + "'");
}

inline bool uses_triples(LossKind k)
{
    return k == LossKind::pairwise_ce || k == LossKind::in_batch;
}

struct TrainingConfig {
    LossKind loss = LossKind::kl_distill;
    double learning_rate = 0.05;
    std::size_t batch_size = 8;
    double temperature = 1.0;
    int epochs = 10;
    std::uint64_t seed = 0;
    // Starting value of the constant-feature weight; all other weights start
    // at 0. With every weight at 0 all pre-activations are 0, the ReLU
    // subgradient is 0 and gradient descent never moves.
    double init_bias = 0.1;

    void validate() const
    {
        if (!(learning_rate > 0.0) || batch_size < 1 || !(temperature > 0.0) || epochs < 0 ||
            !std::isfinite(init_bias)) {
            throw ValidationError("training config requires learning_rate > 0, batch_size >= 1, temperature > 0, epochs >= 0, finite init_bias");
        }
    }
};

struct TrainingData {
    std::vector<TrainTriple> triples;
    std::vector<DistillationGroup> groups;
};

struct TrainingResult {
    ImpactModel model;
    std::vector<double> epoch_mean_loss;
    std::size_t steps = 0;
};

namespace detail {

    inline void add_scaled(Weights& acc, const Weights& g, double scale)
    {
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            acc[i] += scale * g[i];
        }
    }

}  // namespace detail

/// Loss of one mini-batch. `items` index into the triples or groups of `data`.
inline LossResult batch_loss(const TrainingConfig& cfg, const ImpactModel& model, const TrainingData& data,
                             const TrainingCorpus& corpus, std::span<const std::size_t> items)
{
    if (cfg.loss == LossKind::in_batch) {
        std::vector<TrainTriple> batch;
        batch.reserve(items.size());
        for (auto i : items) {
            batch.push_back(data.triples[i]);
        }
        return loss_in_batch(model, batch, corpus);
    }
    LossResult total;
    const double scale = 1.0 / static_cast<double>(items.size());
    for (auto i : items) {
        LossResult r;
        switch (cfg.loss) {
        case LossKind::pairwise_ce: r = loss_pairwise_ce(model, data.triples[i], corpus); break;
        case LossKind::kl_distill: r = loss_kl_distill(model, data.groups[i], corpus, cfg.temperature); break;
        case LossKind::margin_mse: r = loss_margin_mse(model, data.groups[i], corpus); break;
        case LossKind::in_batch: break;
        }
        total.loss += scale * r.loss;
        detail::add_scaled(total.gradient, r.gradient, scale);
    }
    return total;
}

inline std::size_t training_size(const TrainingConfig& cfg, const TrainingData& data)
{
    return uses_triples(cfg.loss) ? data.triples.size() : data.groups.size();
}

/// Mean per-batch loss over the whole data set with batches in input order.
inline double mean_loss(const TrainingConfig& cfg, const ImpactModel& model, const TrainingData& data,
                        const TrainingCorpus& corpus)
{
    const std::size_t n = training_size(cfg, data);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t len = std::min(cfg.batch_size, n - start);
        sum += batch_loss(cfg, model, data, corpus, std::span(order).subspan(start, len)).loss;
        ++batches;
    }
    return batches == 0 ? 0.0 : sum / static_cast<double>(batches);
}

/// Mini-batch gradient descent with a fixed learning rate. Each epoch
/// shuffles the data with an RNG seeded from cfg.seed. The recorded epoch
/// loss is the mean of the batch losses seen before each update.
inline TrainingResult train(const TrainingConfig& cfg, const TrainingData& data, const TrainingCorpus& corpus)
{
    cfg.validate();
    const std::size_t n = training_size(cfg, data);
    if (n == 0) {
        throw ValidationError(std::string("no training data for loss ") + std::string(to_string(cfg.loss)));
    }
    TrainingResult result;
    result.model.weights[kFeatureDim - 1] = cfg.init_bias;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span(order), rng);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            auto r = batch_loss(cfg, result.model, data, corpus, std::span(order).subspan(start, len));
            detail::add_scaled(result.model.weights, r.gradient, -cfg.learning_rate);
            sum += r.loss;
            ++batches;
            ++result.steps;
        }
        result.epoch_mean_loss.push_back(sum / static_cast<double>(batches));
    }
    return result;
}

inline void write_loss_trace(const std::vector<double>& trace, std::ostream& out)
{
    out << "epoch,mean_loss\n";
    auto old = out.precision(17);
    for (std::size_t e = 0; e < trace.size(); ++e) {
        out << (e + 1) << ',' << trace[e] << '\n';
    }
    out.precision(old);
}

/// Largest relative error between the analytic gradient of `loss` at
/// `model` and central finite differences with step `eps`. Relative error
/// uses max(|analytic|, |numeric|) floored at 1e-8 as denominator.
inline double grad_check(const std::function<LossResult(const ImpactModel&)>& loss, const ImpactModel& model,
                         double eps)
{
    if (!(eps > 0.0)) {
        throw ValidationError("finite-difference step must be positive");
    }
    const auto analytic = loss(model).gradient;
    double worst = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
        ImpactModel plus = model;
        ImpactModel minus = model;
        plus.weights[i] += eps;
        minus.weights[i] -= eps;
        const double numeric = static_cast<double>((loss(plus).loss - loss(minus).loss) / (2.0L * eps));
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

/// True when some matched term has a pre-activation within `margin` of the
/// ReLU kink, where finite differences are not meaningful.
inline bool near_relu_kink(const ImpactModel& model, const CandidateSet& candidates, double margin)
{
    for (const auto& c : candidates) {
        for (const auto& f : c) {
            if (std::abs(dot(model.weights, f)) <= margin) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace impactir
