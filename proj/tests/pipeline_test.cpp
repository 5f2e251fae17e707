#include "impactir/pipeline.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace impactir;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("impactir_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(const std::string& args)
{
    const std::string cmd = std::string("IMPACTIR_LOG=quiet ") + IMPACTIR_CLI + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(PipelineConfig, JsonRoundTripAndRelativePaths)
{
    auto dir = scratch("config");
    PipelineConfig cfg;
    cfg.paths.collection = "c.jsonl";
    cfg.sampler.k = 7;
    cfg.train.loss = LossKind::margin_mse;
    cfg.merge.truncate_at = TruncationPoint::before_merge;
    {
        std::ofstream out(dir / "config.json");
        out << cfg.to_json().dump();
    }
    auto back = PipelineConfig::load(dir / "config.json");
    EXPECT_EQ(fs::path(back.paths.collection), dir / "c.jsonl");
    EXPECT_EQ(back.sampler.k, 7);
    EXPECT_EQ(back.train.loss, LossKind::margin_mse);
    EXPECT_EQ(back.merge.truncate_at, TruncationPoint::before_merge);
}

TEST(PipelineConfig, InvalidValuesRejected)
{
    auto dir = scratch("bad_config");
    {
        std::ofstream out(dir / "config.json");
        out << R"({"sampler":{"p":1.5}})";
    }
    EXPECT_THROW(PipelineConfig::load(dir / "config.json").validate(), ValidationError);
    EXPECT_THROW(PipelineConfig::load(dir / "missing.json"), IoError);
    EXPECT_THROW(PipelineConfig::parse_decoding("greedy"), ValidationError);
}

TEST(Cli, MissingInputIsIoError)
{
    auto dir = scratch("missing");
    EXPECT_EQ(cli("expand --collection " + (dir / "nope.jsonl").string() + " --expansions " + (dir / "x").string()),
              exit_code::io);
}

TEST(Cli, DuplicateDocIdIsValidationError)
{
    auto dir = scratch("dup");
    {
        std::ofstream out(dir / "c.jsonl");
        out << R"({"doc_id":"d","text":"a"})" << '\n' << R"({"doc_id":"d","text":"b"})" << '\n';
    }
    EXPECT_EQ(cli("expand --collection " + (dir / "c.jsonl").string() + " --expansions " + (dir / "x").string()),
              exit_code::validation);
}

TEST(Cli, ZeroModelGivesEmptyIndex)
{
    auto dir = scratch("empty_index");
    ASSERT_EQ(cli("gen-toy --docs 30 --train-queries 10 --test-queries 5 --negatives 3 --out " + dir.string()), 0);
    {
        std::ofstream out(dir / "zero.json");
        out << ImpactModel{}.to_json().dump();
    }
    const auto cfg = (dir / "config.json").string();
    EXPECT_EQ(cli("index -c " + cfg + " --no-expansion --model " + (dir / "zero.json").string()), exit_code::empty);
}

TEST(Cli, FullPipelineOnSmallToy)
{
    auto dir = scratch("full");
    ASSERT_EQ(cli("gen-toy --docs 60 --train-queries 20 --test-queries 10 --negatives 5 --out " + dir.string()), 0);
    const auto cfg = " -c " + (dir / "config.json").string();
    ASSERT_EQ(cli("expand" + cfg), 0);
    ASSERT_EQ(cli("filter" + cfg), 0);
    ASSERT_EQ(cli("train" + cfg), 0);
    ASSERT_EQ(cli("index" + cfg), 0);
    ASSERT_EQ(cli("search" + cfg), 0);
    ASSERT_EQ(cli("eval" + cfg + " --bench"), 0);

    std::istringstream run_text(slurp(dir / "run.trec"));
    auto run = read_trec_run(run_text);
    EXPECT_EQ(run.size(), 10U);
    auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    for (const char* key : {"mrr_at_10", "ndcg_at_10"}) {
        EXPECT_GE(report[key].get<double>(), 0.0);
        EXPECT_LE(report[key].get<double>(), 1.0);
    }
    EXPECT_GT(report["mrt_ms"].get<double>(), 0.0);

    // oracle search writes the same run
    ASSERT_EQ(cli("search" + cfg + " --oracle --run " + (dir / "oracle.trec").string()), 0);
    EXPECT_EQ(slurp(dir / "oracle.trec"), slurp(dir / "run.trec"));

    // the trace has one row per epoch
    std::istringstream trace(slurp(dir / "loss_trace.csv"));
    std::string line;
    std::getline(trace, line);
    EXPECT_EQ(line, "epoch,mean_loss");
    int rows = 0;
    while (std::getline(trace, line)) {
        ++rows;
    }
    EXPECT_GT(rows, 0);
}
