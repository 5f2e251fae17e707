#pragma once

// Pipeline stages behind the command-line tool. Every stage reads its inputs
// from the paths in a PipelineConfig, writes its outputs, and returns a
// process exit code: 0 success, 2 I/O failure, 3 invalid input, 4 empty
// result.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "expansion.hpp"
#include "impact.hpp"
#include "index.hpp"
#include "search.hpp"
#include "textgen.hpp"
#include "toy.hpp"

namespace impactir {

namespace exit_code {
    inline constexpr int ok = 0;
    inline constexpr int io = 2;
    inline constexpr int validation = 3;
    inline constexpr int empty = 4;
}  // namespace exit_code

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Stderr logger; verbosity from IMPACTIR_LOG (quiet, info, debug).
class Logger {
  public:
    explicit Logger(LogLevel level = from_env(), std::ostream& sink = std::cerr) : level_(level), sink_(&sink) {}

    static LogLevel from_env()
    {
        const char* v = std::getenv("IMPACTIR_LOG");
        if (v == nullptr) {
            return LogLevel::info;
        }
        std::string s(v);
        if (s == "quiet" || s == "0") {
            return LogLevel::quiet;
        }
        if (s == "debug" || s == "2") {
            return LogLevel::debug;
        }
        return LogLevel::info;
    }

    void info(const std::string& msg) const { emit(LogLevel::info, "info", msg); }
    void debug(const std::string& msg) const { emit(LogLevel::debug, "debug", msg); }
    void warn(const std::string& msg) const { emit(LogLevel::quiet, "warning", msg); }
    void error(const std::string& msg) const { emit(LogLevel::quiet, "error", msg); }

  private:
    void emit(LogLevel at, const char* tag, const std::string& msg) const
    {
        if (static_cast<int>(level_) >= static_cast<int>(at)) {
            *sink_ << "[impactir] " << tag << ": " << msg << '\n';
        }
    }
    LogLevel level_;
    std::ostream* sink_;
};

enum class Decoding { sample, beam };

struct PipelineConfig {
    struct Paths {
        std::string collection;
        std::string queries;
        std::string qrels;
        std::string expansions;           // written by expand
        std::string filtered_expansions;  // written by filter
        std::string groups;
        std::string triples;
        std::string model;
        std::string trace;
        std::string index;
        std::string run;
        std::string report;
        std::string stats;
    } paths;

    SamplerConfig sampler{};
    int ngram_order = 2;
    double ngram_alpha = 0.1;
    Decoding decoding = Decoding::sample;
    int beam_width = 0;  // required when decoding = beam

    double fraction = 0.3;
    bool stand_in_scorer = false;

    TrainingConfig train{};

    bool use_expansion = true;
    MergeOptions merge{};

    std::size_t retrieval_k = 1000;
    bool oracle = false;
    std::string run_tag = "impactir";

    EvalOptions eval{};
    bool bench = false;
    int repetitions = 3;

    void validate() const
    {
        sampler.validate();
        train.validate();
        if (!(fraction > 0.0 && fraction <= 1.0)) {
            throw ValidationError("fraction must be in (0, 1]");
        }
        if (retrieval_k < 1) {
            throw ValidationError("retrieval k must be at least 1");
        }
        if (ngram_order < 1 || !(ngram_alpha > 0.0)) {
            throw ValidationError("n-gram order must be >= 1 and alpha > 0");
        }
        if (decoding == Decoding::beam && beam_width < sampler.num_queries) {
            throw ValidationError("beam decoding needs beam_width >= num_queries");
        }
        if (repetitions < 1) {
            throw ValidationError("repetitions must be at least 1");
        }
    }

    /// Overlays the keys present in `j` on the current values. Relative
    /// paths are resolved against `base_dir`.
    void merge_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {})
    {
        try {
            merge_json_unchecked(j, base_dir);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("bad config: ") + e.what());
        }
    }

    static PipelineConfig load(const std::filesystem::path& file)
    {
        std::ifstream in(file);
        if (!in) {
            throw IoError("cannot open config '" + file.string() + "'");
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("config '" + file.string() + "' is not valid JSON: " + e.what());
        }
        PipelineConfig cfg;
        cfg.merge_json(j, file.parent_path());
        return cfg;
    }

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"paths",
                 {{"collection", paths.collection},
                  {"queries", paths.queries},
                  {"qrels", paths.qrels},
                  {"expansions", paths.expansions},
                  {"filtered_expansions", paths.filtered_expansions},
                  {"groups", paths.groups},
                  {"triples", paths.triples},
                  {"model", paths.model},
                  {"trace", paths.trace},
                  {"index", paths.index},
                  {"run", paths.run},
                  {"report", paths.report},
                  {"stats", paths.stats}}},
                {"sampler",
                 {{"k", sampler.k},
                  {"p", sampler.p},
                  {"num_queries", sampler.num_queries},
                  {"max_len", sampler.max_len},
                  {"seed", sampler.seed},
                  {"order", ngram_order},
                  {"alpha", ngram_alpha},
                  {"decoding", decoding == Decoding::beam ? "beam" : "sample"},
                  {"beam_width", beam_width}}},
                {"filter", {{"fraction", fraction}, {"stand_in_scorer", stand_in_scorer}}},
                {"train",
                 {{"loss", std::string(to_string(train.loss))},
                  {"learning_rate", train.learning_rate},
                  {"batch_size", train.batch_size},
                  {"temperature", train.temperature},
                  {"epochs", train.epochs},
                  {"seed", train.seed},
                  {"init_bias", train.init_bias}}},
                {"index",
                 {{"expansion", use_expansion},
                  {"max_tokens", merge.max_tokens},
                  {"truncate", merge.truncate_at == TruncationPoint::before_merge ? "before_merge" : "after_merge"}}},
                {"search", {{"k", retrieval_k}, {"oracle", oracle}, {"tag", run_tag}}},
                {"eval",
                 {{"mrr_cutoff", eval.mrr_cutoff},
                  {"ndcg_cutoff", eval.ndcg_cutoff},
                  {"min_grade", eval.min_grade},
                  {"recall_depths", eval.recall_depths},
                  {"bench", bench},
                  {"repetitions", repetitions}}}};
    }

  private:
    void merge_json_unchecked(const nlohmann::json& j, const std::filesystem::path& base_dir)
    {
        auto path_field = [&](const nlohmann::json& obj, const char* key, std::string& dst) {
            if (auto it = obj.find(key); it != obj.end()) {
                auto p = std::filesystem::path(it->get<std::string>());
                dst = (p.empty() || p.is_absolute() || base_dir.empty()) ? p.string() : (base_dir / p).string();
            }
        };
        auto field = [](const nlohmann::json& obj, const char* key, auto& dst) {
            if (auto it = obj.find(key); it != obj.end()) {
                dst = it->get<std::remove_reference_t<decltype(dst)>>();
            }
        };
        if (auto p = j.find("paths"); p != j.end()) {
            path_field(*p, "collection", paths.collection);
            path_field(*p, "queries", paths.queries);
            path_field(*p, "qrels", paths.qrels);
            path_field(*p, "expansions", paths.expansions);
            path_field(*p, "filtered_expansions", paths.filtered_expansions);
            path_field(*p, "groups", paths.groups);
            path_field(*p, "triples", paths.triples);
            path_field(*p, "model", paths.model);
            path_field(*p, "trace", paths.trace);
            path_field(*p, "index", paths.index);
            path_field(*p, "run", paths.run);
            path_field(*p, "report", paths.report);
            path_field(*p, "stats", paths.stats);
        }
        if (auto s = j.find("sampler"); s != j.end()) {
            field(*s, "k", sampler.k);
            field(*s, "p", sampler.p);
            field(*s, "num_queries", sampler.num_queries);
            field(*s, "max_len", sampler.max_len);
            field(*s, "seed", sampler.seed);
            field(*s, "order", ngram_order);
            field(*s, "alpha", ngram_alpha);
            field(*s, "beam_width", beam_width);
            if (auto d = s->find("decoding"); d != s->end()) {
                decoding = parse_decoding(d->get<std::string>());
            }
        }
        if (auto f = j.find("filter"); f != j.end()) {
            field(*f, "fraction", fraction);
            field(*f, "stand_in_scorer", stand_in_scorer);
        }
        if (auto t = j.find("train"); t != j.end()) {
            if (auto l = t->find("loss"); l != t->end()) {
                train.loss = parse_loss_kind(l->get<std::string>());
            }
            field(*t, "learning_rate", train.learning_rate);
            field(*t, "batch_size", train.batch_size);
            field(*t, "temperature", train.temperature);
            field(*t, "epochs", train.epochs);
            field(*t, "seed", train.seed);
            field(*t, "init_bias", train.init_bias);
        }
        if (auto x = j.find("index"); x != j.end()) {
            field(*x, "expansion", use_expansion);
            field(*x, "max_tokens", merge.max_tokens);
            if (auto tr = x->find("truncate"); tr != x->end()) {
                merge.truncate_at = parse_truncation(tr->get<std::string>());
            }
        }
        if (auto s = j.find("search"); s != j.end()) {
            field(*s, "k", retrieval_k);
            field(*s, "oracle", oracle);
            field(*s, "tag", run_tag);
        }
        if (auto e = j.find("eval"); e != j.end()) {
            field(*e, "mrr_cutoff", eval.mrr_cutoff);
            field(*e, "ndcg_cutoff", eval.ndcg_cutoff);
            field(*e, "min_grade", eval.min_grade);
            field(*e, "recall_depths", eval.recall_depths);
            field(*e, "bench", bench);
            field(*e, "repetitions", repetitions);
        }
    }

  public:
    static Decoding parse_decoding(const std::string& s)
    {
        if (s == "sample") {
            return Decoding::sample;
        }
        if (s == "beam") {
            return Decoding::beam;
        }
        throw ValidationError("decoding must be 'sample' or 'beam'");
    }

    static TruncationPoint parse_truncation(const std::string& s)
    {
        if (s == "before_merge") {
            return TruncationPoint::before_merge;
        }
        if (s == "after_merge") {
            return TruncationPoint::after_merge;
        }
        throw ValidationError("truncate must be 'before_merge' or 'after_merge'");
    }
};

namespace io {

    inline void require_path(const std::string& path, const char* what)
    {
        if (path.empty()) {
            throw ValidationError(std::string("no ") + what + " path configured");
        }
        if (!std::filesystem::exists(path)) {
            throw IoError(std::string(what) + " '" + path + "' does not exist");
        }
    }

    inline std::ifstream open_in(const std::string& path, const char* what, bool binary = false)
    {
        require_path(path, what);
        std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
        if (!in) {
            throw IoError(std::string("cannot open ") + what + " '" + path + "'");
        }
        return in;
    }

    /// Writes through a callback; the file is replaced only on success.
    inline void write_file(const std::string& path, const char* what, const std::function<void(std::ostream&)>& fn,
                           bool binary = false)
    {
        if (path.empty()) {
            throw ValidationError(std::string("no ") + what + " output path configured");
        }
        const auto parent = std::filesystem::path(path).parent_path();
        std::error_code ec;
        if (!parent.empty()) {
            std::filesystem::create_directories(parent, ec);
        }
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
            if (!out) {
                throw IoError(std::string("cannot write ") + what + " '" + path + "'");
            }
            fn(out);
            out.flush();
            if (!out) {
                throw IoError(std::string("failed writing ") + what + " '" + path + "'");
            }
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            throw IoError(std::string("cannot move ") + what + " into place at '" + path + "': " + ec.message());
        }
    }

    template <typename T, typename Loader>
    T load(const std::string& path, const char* what, Loader&& loader)
    {
        auto in = open_in(path, what);
        try {
            return loader(in);
        } catch (const ParseError& e) {
            throw ValidationError(std::string(what) + " '" + path + "': " + e.what());
        }
    }

}  // namespace io

/// Runs a stage, mapping exceptions to exit codes.
inline int run_stage(const Logger& log, const std::function<int()>& stage)
{
    try {
        return stage();
    } catch (const IoError& e) {
        log.error(e.what());
        return exit_code::io;
    } catch (const std::filesystem::filesystem_error& e) {
        log.error(e.what());
        return exit_code::io;
    } catch (const Error& e) {
        log.error(e.what());
        return exit_code::validation;
    } catch (const std::exception& e) {
        log.error(e.what());
        return exit_code::validation;
    }
}

namespace detail {

    // Expansion file used by train and index: the filtered one when
    // configured, else the raw one, else none.
    inline std::optional<std::vector<ExpansionRecord>> load_index_expansions(const PipelineConfig& cfg, const Logger& log)
    {
        if (!cfg.use_expansion) {
            log.info("expansion disabled; using original terms only");
            return std::nullopt;
        }
        const std::string& path =
            !cfg.paths.filtered_expansions.empty() ? cfg.paths.filtered_expansions : cfg.paths.expansions;
        if (path.empty()) {
            log.info("no expansion file configured; using original terms only");
            return std::nullopt;
        }
        return io::load<std::vector<ExpansionRecord>>(path, "expansions", [](std::istream& in) { return load_expansions(in); });
    }

    inline std::vector<Document> load_docs(const PipelineConfig& cfg)
    {
        return io::load<std::vector<Document>>(cfg.paths.collection, "collection",
                                               [](std::istream& in) { return load_collection(in); });
    }

    inline std::vector<ExpandedDocument> expanded_docs(const PipelineConfig& cfg, const Logger& log)
    {
        auto docs = load_docs(cfg);
        auto records = load_index_expansions(cfg, log);
        return expand_collection(docs, records ? &*records : nullptr, cfg.merge);
    }

}  // namespace detail

/// Generates expansion queries for every document with the n-gram model.
inline int cmd_expand(const PipelineConfig& cfg, const Logger& log)
{
    return run_stage(log, [&] {
        auto docs = detail::load_docs(cfg);
        cfg.validate();
        auto model = build_ngram_model(docs, cfg.ngram_order, cfg.ngram_alpha);
        log.info("n-gram model: order " + std::to_string(model.order) + ", vocabulary " +
                 std::to_string(model.vocabulary.size()));
        std::vector<ExpansionRecord> records;
        records.reserve(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) {
            ExpansionRecord rec{docs[i].doc_id, {}};
            if (cfg.decoding == Decoding::beam) {
                for (auto& q : beam_search_queries(model, docs[i], cfg.beam_width, cfg.sampler.max_len,
                                                   cfg.sampler.num_queries)) {
                    rec.queries.push_back({std::move(q), std::nullopt});
                }
            } else {
                Rng rng(derive_seed(cfg.sampler.seed, i));
                for (int n = 0; n < cfg.sampler.num_queries; ++n) {
                    rec.queries.push_back({sample_query(model, docs[i], cfg.sampler, rng), std::nullopt});
                }
            }
            records.push_back(std::move(rec));
        }
        io::write_file(cfg.paths.expansions, "expansions", [&](std::ostream& out) { write_expansions(records, out); });
        log.info("wrote " + std::to_string(records.size()) + " expansion records to " + cfg.paths.expansions);
        return exit_code::ok;
    });
}

/// Keeps the globally top-scoring fraction of expansion queries and prints
/// the FiltrationReport as JSON on `out`.
inline int cmd_filter(const PipelineConfig& cfg, const Logger& log, std::ostream& out)
{
    return run_stage(log, [&] {
        auto records = io::load<std::vector<ExpansionRecord>>(cfg.paths.expansions, "expansions",
                                                              [](std::istream& in) { return load_expansions(in); });
        cfg.validate();
        if (cfg.stand_in_scorer) {
            auto docs = detail::load_docs(cfg);
            log.info("scoring unscored queries with the term-overlap stand-in scorer");
            score_missing_with_overlap(records, docs);
        }
        auto result = filter_expansions(records, cfg.fraction);
        io::write_file(cfg.paths.filtered_expansions, "filtered expansions",
                       [&](std::ostream& o) { write_expansions(result.records, o); });
        out << result.report.to_json().dump() << '\n';
        return exit_code::ok;
    });
}

inline int cmd_train(const PipelineConfig& cfg, const Logger& log)
{
    return run_stage(log, [&] {
        cfg.validate();
        TrainingData data;
        if (uses_triples(cfg.train.loss)) {
            if (cfg.paths.triples.empty()) {
                throw ValidationError(std::string("loss ") + std::string(to_string(cfg.train.loss)) + " needs a triples file");
            }
            data.triples = io::load<std::vector<TrainTriple>>(cfg.paths.triples, "triples",
                                                              [](std::istream& in) { return load_triples(in); });
        } else {
            if (cfg.paths.groups.empty()) {
                throw ValidationError(std::string("loss ") + std::string(to_string(cfg.train.loss)) +
                                      " needs a distillation groups file");
            }
            data.groups = io::load<std::vector<DistillationGroup>>(
                cfg.paths.groups, "groups", [](std::istream& in) { return load_distillation_groups(in); });
        }
        TrainingCorpus corpus(detail::expanded_docs(cfg, log));
        auto result = train(cfg.train, data, corpus);
        io::write_file(cfg.paths.model, "model", [&](std::ostream& o) { o << result.model.to_json().dump() << '\n'; });
        if (!cfg.paths.trace.empty()) {
            io::write_file(cfg.paths.trace, "loss trace", [&](std::ostream& o) { write_loss_trace(result.epoch_mean_loss, o); });
        }
        std::string trace;
        if (!result.epoch_mean_loss.empty()) {
            trace = ", loss " + std::to_string(result.epoch_mean_loss.front()) + " -> " +
                    std::to_string(result.epoch_mean_loss.back());
        }
        log.info("trained " + std::string(to_string(cfg.train.loss)) + " for " + std::to_string(result.steps) +
                 " steps" + trace);
        return exit_code::ok;
    });
}

inline ImpactModel load_model(const std::string& path)
{
    auto in = io::open_in(path, "model");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("model '" + path + "' is not valid JSON: " + e.what());
    }
    return ImpactModel::from_json(j);
}

inline ImpactIndex load_index(const std::string& path)
{
    auto in = io::open_in(path, "index", true);
    return read_index(in);
}

/// Builds the quantized index and prints {num_docs, num_terms, w_max} on `out`.
inline int cmd_index(const PipelineConfig& cfg, const Logger& log, std::ostream& out)
{
    return run_stage(log, [&] {
        auto model = load_model(cfg.paths.model);
        auto docs = detail::expanded_docs(cfg, log);
        auto impacts = compute_collection_impacts(model, docs);
        std::vector<std::string> ids;
        ids.reserve(docs.size());
        for (const auto& d : docs) {
            ids.push_back(d.doc_id());
        }
        auto index = build_index(impacts, std::move(ids));
        io::write_file(cfg.paths.index, "index", [&](std::ostream& o) { write_index(index, o); }, true);
        out << nlohmann::json{{"num_docs", index.num_docs},
                              {"num_terms", index.lexicon.size()},
                              {"num_postings", index.total_postings()},
                              {"w_max", index.w_max}}
                   .dump()
            << '\n';
        if (index.empty()) {
            log.warn("index has no postings: every impact quantized to zero");
            return exit_code::empty;
        }
        return exit_code::ok;
    });
}

inline Run search_all(const ImpactIndex& index, const std::vector<Query>& queries, std::size_t k, bool oracle,
                      const std::string& tag, std::vector<SearchStats>* stats = nullptr)
{
    Run run;
    for (const auto& q : queries) {
        auto out = oracle ? exhaustive_daat(index, q, k) : maxscore_daat(index, q, k);
        run[q.query_id] = to_run_entries(q.query_id, out.result, index, tag);
        if (stats != nullptr) {
            stats->push_back(out.stats);
        }
    }
    return run;
}

inline int cmd_search(const PipelineConfig& cfg, const Logger& log)
{
    return run_stage(log, [&] {
        auto index = load_index(cfg.paths.index);
        auto queries = io::load<std::vector<Query>>(cfg.paths.queries, "queries",
                                                    [](std::istream& in) { return load_queries(in); });
        cfg.validate();
        std::vector<SearchStats> stats;
        auto run = search_all(index, queries, cfg.retrieval_k, cfg.oracle, cfg.run_tag, &stats);
        io::write_file(cfg.paths.run, "run", [&](std::ostream& o) { write_trec_run(run, o); });
        if (!cfg.paths.stats.empty()) {
            io::write_file(cfg.paths.stats, "stats", [&](std::ostream& o) {
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    auto j = stats[i].to_json();
                    j["query_id"] = queries[i].query_id;
                    o << j.dump() << '\n';
                }
            });
        }
        log.info(std::string("searched ") + std::to_string(queries.size()) + " queries with " +
                 (cfg.oracle ? "exhaustive DAAT" : "MaxScore") + ", k=" + std::to_string(cfg.retrieval_k));
        return exit_code::ok;
    });
}

/// Prints the MetricsReport on `out` as a table (or JSON when `json`).
inline int cmd_eval(const PipelineConfig& cfg, const Logger& log, std::ostream& out, bool json = false)
{
    return run_stage(log, [&] {
        if (cfg.paths.qrels.empty()) {
            throw ValidationError("eval needs a qrels file");
        }
        auto qrels = io::load<Qrels>(cfg.paths.qrels, "qrels", [](std::istream& in) { return load_qrels(in); });
        auto run = io::load<Run>(cfg.paths.run, "run", [](std::istream& in) { return read_trec_run(in); });
        cfg.validate();
        auto report = evaluate(run, qrels, cfg.eval);
        if (cfg.bench) {
            auto index = load_index(cfg.paths.index);
            auto queries = io::load<std::vector<Query>>(cfg.paths.queries, "queries",
                                                        [](std::istream& in) { return load_queries(in); });
            report.mrt_ms = measure_mrt(index, queries, cfg.retrieval_k, cfg.repetitions).mrt_ms;
        }
        if (!cfg.paths.report.empty()) {
            io::write_file(cfg.paths.report, "report", [&](std::ostream& o) { o << report.to_json().dump(2) << '\n'; });
        }
        if (json) {
            out << report.to_json().dump() << '\n';
        } else {
            out << report.to_table();
        }
        return exit_code::ok;
    });
}

/// Writes the toy collection, query logs, qrels, training files and a
/// config.json wiring them together into `dir`.
inline int cmd_gen_toy(const std::string& dir, const toy::ToyConfig& toy_cfg, const Logger& log)
{
    return run_stage(log, [&] {
        auto toy = toy::make_toy_corpus(toy_cfg);
        const std::filesystem::path base(dir);
        auto file = [&](const char* name) { return (base / name).string(); };
        io::write_file(file("collection.jsonl"), "collection", [&](std::ostream& o) { write_collection(toy.docs, o); });
        io::write_file(file("queries.tsv"), "queries", [&](std::ostream& o) { write_queries(toy.test_queries, o); });
        io::write_file(file("qrels.txt"), "qrels", [&](std::ostream& o) { write_qrels(toy.test_qrels, o); });
        io::write_file(file("train_queries.tsv"), "train queries",
                       [&](std::ostream& o) { write_queries(toy.train_queries, o); });
        io::write_file(file("train_qrels.txt"), "train qrels", [&](std::ostream& o) { write_qrels(toy.train_qrels, o); });
        io::write_file(file("groups.jsonl"), "groups", [&](std::ostream& o) { write_distillation_groups(toy.groups, o); });
        io::write_file(file("triples.tsv"), "triples", [&](std::ostream& o) { write_triples(toy.triples, o); });

        PipelineConfig cfg;
        cfg.paths.collection = "collection.jsonl";
        cfg.paths.queries = "queries.tsv";
        cfg.paths.qrels = "qrels.txt";
        cfg.paths.expansions = "expansions.jsonl";
        cfg.paths.filtered_expansions = "expansions.filtered.jsonl";
        cfg.paths.groups = "groups.jsonl";
        cfg.paths.triples = "triples.tsv";
        cfg.paths.model = "model.json";
        cfg.paths.trace = "loss_trace.csv";
        cfg.paths.index = "index.impx";
        cfg.paths.run = "run.trec";
        cfg.paths.report = "report.json";
        cfg.sampler.num_queries = 5;
        cfg.sampler.max_len = 8;
        cfg.sampler.seed = toy_cfg.seed;
        cfg.stand_in_scorer = true;
        cfg.train.seed = toy_cfg.seed;
        cfg.train.epochs = 20;
        io::write_file(file("config.json"), "config", [&](std::ostream& o) { o << cfg.to_json().dump(2) << '\n'; });
        log.info("wrote toy corpus with " + std::to_string(toy.docs.size()) + " documents to " + dir);
        return exit_code::ok;
    });
}

}  // namespace impactir
