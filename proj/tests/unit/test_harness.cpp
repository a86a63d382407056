#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "highway_rl/csv.hpp"
#include "highway_rl/errors.hpp"
#include "highway_rl/harness/commands.hpp"
#include "highway_rl/harness/experiment.hpp"
#include "highway_rl/harness/manifest.hpp"
#include "support/tempdir.hpp"

namespace hx = highway_rl::harness;
namespace fs = std::filesystem;
using highway_rl::ConfigError;
using highway_rl::FormatError;
using highway_rl::testing::TempDir;

namespace {

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

/// Tiny but complete settings so commands finish in well under a second.
std::vector<std::string> tiny() {
  return {"protocol.episodes=3",          "protocol.eval_interval=3",  "protocol.eval_episodes=2",
          "agent.hidden=[8]",             "agent.batch_size=4",         "scenario.traffic.episode_budget=20",
          "predictor.hidden=8",           "predictor.epochs=1",         "predictor.collect_episodes=3",
          "sweep.counts=[6,12]",          "sweep.trials=2"};
}

hx::CommandOptions tiny_opts(const fs::path& out) {
  hx::CommandOptions o;
  o.overrides = tiny();
  o.out = out;
  o.seed = 1;
  return o;
}

int run(const std::string& cmd, const hx::CommandOptions& o, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = hx::run_command(cmd, o, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST(Override, NestedNumberBoolArrayAndString) {
  nlohmann::json doc = nlohmann::json::object();
  hx::apply_override(doc, "agent.gamma=0.9");
  hx::apply_override(doc, "agent.heuristic_penalty=false");
  hx::apply_override(doc, "sweep.counts=[1,2]");
  hx::apply_override(doc, "output_dir=runs/x");
  EXPECT_EQ(doc["agent"]["gamma"], 0.9);
  EXPECT_EQ(doc["agent"]["heuristic_penalty"], false);
  EXPECT_EQ(doc["sweep"]["counts"], nlohmann::json::array({1, 2}));
  EXPECT_EQ(doc["output_dir"], "runs/x");
  EXPECT_THROW(hx::apply_override(doc, "novalue"), ConfigError);
  EXPECT_THROW(hx::apply_override(doc, "=3"), ConfigError);
  EXPECT_THROW(hx::apply_override(doc, "agent..gamma=1"), ConfigError);
  EXPECT_THROW(hx::apply_override(doc, "output_dir.x=1"), ConfigError);
}

TEST(Experiment, JsonRoundTrip) {
  auto c = hx::default_experiment({"seeds=[3,4]", "sweep.trials=7", "scenario.reward.r_collision=-100"});
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  const auto back = hx::experiment_from_json(hx::to_json(c));
  EXPECT_EQ(back.scenario, c.scenario);
  EXPECT_EQ(back.sweep, c.sweep);
  EXPECT_EQ(back.agent, c.agent);
  EXPECT_EQ(back.seeds, c.seeds);
}

TEST(Experiment, StrictFieldsNameThePath) {
  try {
    hx::default_experiment({"agent.gamma=\"high\""});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("agent.gamma"), std::string::npos) << e.what();
  }
  EXPECT_THROW(hx::default_experiment({"colour=1"}), ConfigError);
  EXPECT_THROW(hx::default_experiment({"seeds=[]"}), ConfigError);
  EXPECT_THROW(hx::default_experiment({"sweep.trials=-1"}), ConfigError);
}

TEST(Experiment, LoadFileAndErrors) {
  TempDir dir;
  EXPECT_THROW(hx::load_experiment(dir.path() / "none.json"), ConfigError);
  write_text(dir.path() / "bad.json", "{ nope");
  EXPECT_THROW(hx::load_experiment(dir.path() / "bad.json"), ConfigError);
  write_text(dir.path() / "ok.json", R"({"protocol": {"episodes": 9}})");
  const auto c = hx::load_experiment(dir.path() / "ok.json", {"protocol.eval_interval=3"});
  EXPECT_EQ(c.protocol.episodes, 9);
  EXPECT_EQ(c.protocol.eval_interval, 3);
}

TEST(Experiment, ShippedConfigsParse) {
  for (const char* name : {"desk.json"}) {
    const auto c = hx::load_experiment(fs::path(HIGHWAY_RL_SOURCE_DIR) / "configs" / name);
    EXPECT_NO_THROW(c.validate()) << name;
  }
}

TEST(Manifest, BlobHashMatchesGit) {
  TempDir dir;
  write_text(dir.path() / "empty", "");
  write_text(dir.path() / "hello", "hello\n");
  EXPECT_EQ(hx::git_blob_sha1(dir.path() / "empty"), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(hx::git_blob_sha1(dir.path() / "hello"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_THROW(hx::git_blob_sha1(dir.path() / "missing"), FormatError);
}

TEST(Manifest, RoundTripAndTamperDetection) {
  TempDir dir;
  write_text(dir.path() / "a.csv", "x\n1\n");
  hx::RunManifest m;
  m.command = "evaluate";
  m.seed = 12;
  m.config = {{"k", 1}};
  m.started = hx::utc_timestamp();
  m.finished = m.started;
  m.outputs.push_back(hx::describe_file(dir.path() / "a.csv", dir.path()));
  hx::write_manifest(dir.path(), m);
  const auto back = hx::read_manifest(dir.path() / hx::kManifestName);
  EXPECT_EQ(back.command, "evaluate");
  EXPECT_EQ(back.seed, 12u);
  ASSERT_EQ(back.outputs.size(), 1u);
  EXPECT_EQ(back.outputs[0].path, "a.csv");
  EXPECT_EQ(back.outputs[0].bytes, 4u);
  EXPECT_EQ(back.started.size(), 20u);
  EXPECT_EQ(back.started.back(), 'Z');

  EXPECT_NO_THROW(hx::verify_artifact(dir.path() / "a.csv"));
  write_text(dir.path() / "a.csv", "x\n2\n");
  EXPECT_THROW(hx::verify_artifact(dir.path() / "a.csv"), FormatError);
  EXPECT_THROW(hx::verify_artifact(dir.path() / "gone.csv"), FormatError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) EXPECT_EQ(std::stod(highway_rl::format_double(v)), v);
  EXPECT_EQ(highway_rl::format_double(std::nan("")), "nan");
}

TEST(Csv, WriteReadAndRaggedRows) {
  TempDir dir;
  {
    highway_rl::CsvWriter w(dir.path() / "t.csv");
    w.header({"a", "b"});
    w.field(1).field(0.5).end_row();
    w.field(true).empty_field().end_row();
  }
  const auto t = highway_rl::read_csv(dir.path() / "t.csv");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(0, "b"), 0.5);
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_THROW(t.column("c"), FormatError);
  write_text(dir.path() / "r.csv", "a,b\n1\n");
  EXPECT_THROW(highway_rl::read_csv(dir.path() / "r.csv"), FormatError);
}

TEST(Commands, UnknownCommandAndBadConfigExitWithTwo) {
  TempDir dir;
  std::string err;
  EXPECT_EQ(run("fly", tiny_opts(dir.path()), &err), hx::kExitConfig);
  EXPECT_NE(err.find("fly"), std::string::npos);
  auto o = tiny_opts(dir.path() / "x");
  o.overrides.push_back("agent.gamma=7");
  EXPECT_EQ(run("train-baseline", o, &err), hx::kExitConfig);
  EXPECT_NE(err.find("gamma"), std::string::npos) << err;
  o = tiny_opts(dir.path() / "y");
  o.config = dir.path() / "missing.json";
  EXPECT_EQ(run("train-baseline", o), hx::kExitConfig);
}

TEST(Commands, CorruptCheckpointExitsWithThree) {
  TempDir dir;
  write_text(dir.path() / "q.json", "garbage");
  auto o = tiny_opts(dir.path() / "eval");
  o.checkpoint = dir.path() / "q.json";
  EXPECT_EQ(run("evaluate", o), hx::kExitArtifact);
  o.checkpoint = dir.path() / "absent.json";
  EXPECT_EQ(run("evaluate", o), hx::kExitArtifact);
}

TEST(Commands, StageChainProducesArtifactsWithManifests) {
  TempDir dir;
  const fs::path base = dir.path();
  ASSERT_EQ(run("train-baseline", tiny_opts(base / "baseline")), hx::kExitOk);
  for (const char* f : {"q.json", "metrics.csv", "eval.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(base / "baseline" / f)) << f;
  EXPECT_EQ(highway_rl::read_csv(base / "baseline" / "metrics.csv").rows.size(), 3u);

  auto collect = tiny_opts(base / "collect");
  collect.checkpoint = base / "baseline" / "q.json";
  ASSERT_EQ(run("collect", collect), hx::kExitOk);

  auto md = tiny_opts(base / "mdrnn");
  md.log = base / "collect" / "driving_log.csv";
  ASSERT_EQ(run("train-mdrnn", md), hx::kExitOk);
  EXPECT_EQ(highway_rl::read_csv(base / "mdrnn" / "nll.csv").rows.size(), 2u);

  auto safe = tiny_opts(base / "safe");
  safe.predictor = base / "mdrnn" / "mdrnn.json";
  ASSERT_EQ(run("train-safe", safe), hx::kExitOk);

  auto eval = tiny_opts(base / "safe" / "sweep");
  eval.checkpoint = base / "safe" / "q.json";
  ASSERT_EQ(run("evaluate", eval), hx::kExitOk);
  const auto sweep = highway_rl::read_csv(base / "safe" / "sweep" / "sweep.csv");
  ASSERT_EQ(sweep.rows.size(), 2u);
  EXPECT_EQ(sweep.number(1, "vehicles"), 12.0);
  EXPECT_EQ(sweep.number(1, "trials"), 2.0);

  auto cmp = tiny_opts(base / "cmp");
  cmp.runs = {base / "baseline", base / "safe"};
  EXPECT_EQ(run("compare", cmp), hx::kExitOk);
  EXPECT_TRUE(fs::exists(base / "cmp" / "compare_curves.csv"));
  cmp.runs = {base / "baseline"};
  EXPECT_EQ(run("compare", cmp), hx::kExitConfig);

  // A predictor whose horizon disagrees with the config is refused.
  auto wrong_k = tiny_opts(base / "safe_k");
  wrong_k.predictor = base / "mdrnn" / "mdrnn.json";
  wrong_k.overrides.push_back("predictor.k=9");
  EXPECT_NE(run("train-safe", wrong_k), hx::kExitOk);

  // Tampering with a checkpoint after the fact is detected.
  std::ofstream(base / "safe" / "q.json", std::ios::app) << " ";
  EXPECT_EQ(run("evaluate", eval), hx::kExitArtifact);
}

TEST(Commands, SeedTemplateFansOut) {
  TempDir dir;
  auto o = tiny_opts(dir.path() / "run_{seed}");
  o.seed.reset();
  o.seeds = {4, 5};
  ASSERT_EQ(run("train-baseline", o), hx::kExitOk);
  const fs::path a = dir.path() / "run_4", b = dir.path() / "run_5";
  EXPECT_TRUE(fs::exists(a / "q.json"));
  EXPECT_TRUE(fs::exists(b / "q.json"));
  EXPECT_NE(hx::git_blob_sha1(a / "metrics.csv"), hx::git_blob_sha1(b / "metrics.csv"));
}

TEST(Commands, SeveralSeedsGetSubdirectories) {
  TempDir dir;
  auto o = tiny_opts(dir.path() / "runs");
  o.seed.reset();
  o.seeds = {1, 2};
  ASSERT_EQ(run("train-baseline", o), hx::kExitOk);
  EXPECT_TRUE(fs::exists(dir.path() / "runs" / "seed_1" / "q.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "runs" / "seed_2" / "q.json"));
}

TEST(Commands, SameSeedSameBytes) {
  TempDir dir;
  ASSERT_EQ(run("train-baseline", tiny_opts(dir.path() / "a")), hx::kExitOk);
  ASSERT_EQ(run("train-baseline", tiny_opts(dir.path() / "b")), hx::kExitOk);
  for (const char* f : {"q.json", "metrics.csv", "eval.csv"})
    EXPECT_EQ(hx::git_blob_sha1(dir.path() / "a" / f), hx::git_blob_sha1(dir.path() / "b" / f)) << f;
}
