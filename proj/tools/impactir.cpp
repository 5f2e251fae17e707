// impactir: command-line front end for the learned-sparse-retrieval pipeline.
//
//   impactir gen-toy --out DIR
//   impactir expand  --config DIR/config.json
//   impactir filter  --config ...
//   impactir train   --config ...
//   impactir index   --config ...
//   impactir search  --config ...
//   impactir eval    --config ...
//
// Flags override values from the config file.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "impactir/pipeline.hpp"

namespace {

using impactir::PipelineConfig;

struct Overrides {
    std::string config;
    std::optional<std::string> collection, queries, qrels, expansions, filtered, groups, triples, model, trace, index,
        run, report, stats;
    std::optional<int> k, num_queries, max_len, order, beam_width, epochs, repetitions;
    std::optional<double> p, alpha, fraction, learning_rate, temperature, init_bias;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> batch_size, retrieval_k, max_tokens;
    std::optional<std::string> decoding, loss, tag, truncate;
    std::optional<int> min_grade;
    bool stand_in = false;
    bool no_expansion = false;
    bool oracle = false;
    bool bench = false;
    bool json = false;
};

void add_common(CLI::App* app, Overrides& o)
{
    app->add_option("-c,--config", o.config, "pipeline config JSON");
    app->add_option("--collection", o.collection, "collection JSONL");
}

PipelineConfig resolve(const Overrides& o)
{
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
    auto set = [](auto& dst, const auto& opt) {
        if (opt) {
            dst = *opt;
        }
    };
    set(cfg.paths.collection, o.collection);
    set(cfg.paths.queries, o.queries);
    set(cfg.paths.qrels, o.qrels);
    set(cfg.paths.expansions, o.expansions);
    set(cfg.paths.filtered_expansions, o.filtered);
    set(cfg.paths.groups, o.groups);
    set(cfg.paths.triples, o.triples);
    set(cfg.paths.model, o.model);
    set(cfg.paths.trace, o.trace);
    set(cfg.paths.index, o.index);
    set(cfg.paths.run, o.run);
    set(cfg.paths.report, o.report);
    set(cfg.paths.stats, o.stats);
    set(cfg.sampler.k, o.k);
    set(cfg.sampler.p, o.p);
    set(cfg.sampler.num_queries, o.num_queries);
    set(cfg.sampler.max_len, o.max_len);
    set(cfg.sampler.seed, o.seed);
    set(cfg.train.seed, o.seed);
    set(cfg.ngram_order, o.order);
    set(cfg.ngram_alpha, o.alpha);
    set(cfg.beam_width, o.beam_width);
    if (o.decoding) {
        cfg.decoding = PipelineConfig::parse_decoding(*o.decoding);
    }
    set(cfg.fraction, o.fraction);
    if (o.stand_in) {
        cfg.stand_in_scorer = true;
    }
    if (o.loss) {
        cfg.train.loss = impactir::parse_loss_kind(*o.loss);
    }
    set(cfg.train.learning_rate, o.learning_rate);
    set(cfg.train.batch_size, o.batch_size);
    set(cfg.train.temperature, o.temperature);
    set(cfg.train.epochs, o.epochs);
    set(cfg.train.init_bias, o.init_bias);
    if (o.no_expansion) {
        cfg.use_expansion = false;
    }
    set(cfg.merge.max_tokens, o.max_tokens);
    if (o.truncate) {
        cfg.merge.truncate_at = PipelineConfig::parse_truncation(*o.truncate);
    }
    set(cfg.retrieval_k, o.retrieval_k);
    if (o.oracle) {
        cfg.oracle = true;
    }
    set(cfg.run_tag, o.tag);
    set(cfg.eval.min_grade, o.min_grade);
    if (o.bench) {
        cfg.bench = true;
    }
    set(cfg.repetitions, o.repetitions);
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"impactir: impact-score sparse retrieval pipeline"};
    app.require_subcommand(1);
    Overrides o;
    impactir::toy::ToyConfig toy;
    std::string toy_out = "toy";

    auto* gen = app.add_subcommand("gen-toy", "write the synthetic toy corpus and a config.json");
    gen->add_option("-o,--out", toy_out, "output directory")->capture_default_str();
    gen->add_option("--docs", toy.num_docs, "number of documents")->capture_default_str();
    gen->add_option("--vocabulary", toy.vocabulary, "common vocabulary size")->capture_default_str();
    gen->add_option("--train-queries", toy.train_queries)->capture_default_str();
    gen->add_option("--test-queries", toy.test_queries)->capture_default_str();
    gen->add_option("--negatives", toy.negatives, "hard negatives per training query")->capture_default_str();
    gen->add_option("--seed", toy.seed)->capture_default_str();

    auto* expand = app.add_subcommand("expand", "generate expansion queries with the n-gram model");
    add_common(expand, o);
    expand->add_option("--expansions", o.expansions, "output expansions JSONL");
    expand->add_option("-k,--top-k", o.k, "top-k cutoff");
    expand->add_option("-p,--top-p", o.p, "nucleus mass");
    expand->add_option("-n,--num-queries", o.num_queries, "queries per document");
    expand->add_option("--max-len", o.max_len, "maximum query length");
    expand->add_option("--order", o.order, "n-gram order");
    expand->add_option("--alpha", o.alpha, "Laplace smoothing");
    expand->add_option("--decoding", o.decoding, "sample or beam")->check(CLI::IsMember({"sample", "beam"}));
    expand->add_option("--beam-width", o.beam_width);
    expand->add_option("--seed", o.seed);

    auto* filter = app.add_subcommand("filter", "keep the top fraction of expansion queries by relevance score");
    add_common(filter, o);
    filter->add_option("--expansions", o.expansions, "input expansions JSONL");
    filter->add_option("--out", o.filtered, "output filtered expansions JSONL");
    filter->add_option("--fraction", o.fraction, "retained fraction of all queries");
    filter->add_flag("--stand-in-scorer", o.stand_in, "score unscored queries by term overlap");

    auto* train = app.add_subcommand("train", "train the impact model");
    add_common(train, o);
    train->add_option("--expansions", o.filtered, "expansions merged into training documents");
    train->add_option("--groups", o.groups, "distillation groups JSONL");
    train->add_option("--triples", o.triples, "training triples TSV");
    train->add_option("--model", o.model, "output model JSON");
    train->add_option("--trace", o.trace, "output loss trace CSV");
    train->add_option("--loss", o.loss)->check(CLI::IsMember({"pairwise_ce", "in_batch", "kl_distill", "margin_mse"}));
    train->add_option("--lr", o.learning_rate);
    train->add_option("--batch-size", o.batch_size);
    train->add_option("--temperature", o.temperature);
    train->add_option("--epochs", o.epochs);
    train->add_option("--init-bias", o.init_bias);
    train->add_option("--seed", o.seed);
    train->add_flag("--no-expansion", o.no_expansion, "train on original terms only");
    train->add_option("--max-tokens", o.max_tokens, "truncate documents (0 = off)");
    train->add_option("--truncate", o.truncate)->check(CLI::IsMember({"before_merge", "after_merge"}));

    auto* index = app.add_subcommand("index", "compute impacts and build the quantized index");
    add_common(index, o);
    index->add_option("--expansions", o.filtered, "expansions merged into documents");
    index->add_option("--model", o.model, "model JSON");
    index->add_option("--index", o.index, "output index file");
    index->add_flag("--no-expansion", o.no_expansion, "index original terms only");
    index->add_option("--max-tokens", o.max_tokens, "truncate documents (0 = off)");
    index->add_option("--truncate", o.truncate)->check(CLI::IsMember({"before_merge", "after_merge"}));

    auto* search = app.add_subcommand("search", "retrieve top-k documents and write a TREC run");
    search->add_option("-c,--config", o.config, "pipeline config JSON");
    search->add_option("--index", o.index, "index file");
    search->add_option("--queries", o.queries, "queries TSV");
    search->add_option("--run", o.run, "output run file");
    search->add_option("--stats", o.stats, "per-query stats JSONL");
    search->add_option("-k", o.retrieval_k, "documents per query");
    search->add_option("--tag", o.tag, "run tag");
    search->add_flag("--oracle", o.oracle, "use exhaustive DAAT instead of MaxScore");

    auto* eval = app.add_subcommand("eval", "compute MRR@10, NDCG@10, recall and optionally MRT");
    eval->add_option("-c,--config", o.config, "pipeline config JSON");
    eval->add_option("--run", o.run, "run file");
    eval->add_option("--qrels", o.qrels, "qrels file");
    eval->add_option("--report", o.report, "output report JSON");
    eval->add_option("--min-grade", o.min_grade, "binarization threshold for MRR and recall");
    eval->add_flag("--bench", o.bench, "measure mean response time");
    eval->add_option("--index", o.index, "index file (for --bench)");
    eval->add_option("--queries", o.queries, "queries TSV (for --bench)");
    eval->add_option("-k", o.retrieval_k, "documents per query (for --bench)");
    eval->add_option("--repetitions", o.repetitions, "timed passes (for --bench)");
    eval->add_flag("--json", o.json, "print the report as JSON");

    CLI11_PARSE(app, argc, argv);

    impactir::Logger log;
    if (gen->parsed()) {
        return impactir::cmd_gen_toy(toy_out, toy, log);
    }
    std::optional<PipelineConfig> cfg;
    const int rc = impactir::run_stage(log, [&] {
        cfg = resolve(o);
        return impactir::exit_code::ok;
    });
    if (rc != impactir::exit_code::ok) {
        return rc;
    }
    if (expand->parsed()) {
        return impactir::cmd_expand(*cfg, log);
    }
    if (filter->parsed()) {
        return impactir::cmd_filter(*cfg, log, std::cout);
    }
    if (train->parsed()) {
        return impactir::cmd_train(*cfg, log);
    }
    if (index->parsed()) {
        return impactir::cmd_index(*cfg, log, std::cout);
    }
    if (search->parsed()) {
        return impactir::cmd_search(*cfg, log);
    }
    if (eval->parsed()) {
        return impactir::cmd_eval(*cfg, log, std::cout, o.json);
    }
    return impactir::exit_code::validation;
}
