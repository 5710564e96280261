#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "emopanel/pipeline.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig config_in(const fs::path& dir) {
  PipelineConfig c;
  c.seed = 7;
  c.out_dir = dir.string();
  return c;
}

}  // namespace

TEST_CASE("full pipeline is reproducible and rerunnable") {
  emopanel::testing::TempDir a("run_a"), b("run_b");
  auto ca = config_in(a.path()), cb = config_in(b.path());
  auto ra = run_stage("all", ca);
  run_stage("all", cb);
  CHECK(ra.size() == stage_names().size());

  for (const char* f : {"data/messages.jsonl", "normalized.jsonl", "labels.jsonl", "model.ckpt", "emotions.csv",
                        "attribution.csv", "global_importance.csv", "eventstudy.csv", "panel.csv",
                        "regression_table.csv", "effects.csv", "portfolio_returns.csv", "portfolio_alpha.csv",
                        "toymodel_sweep.csv"}) {
    INFO(f);
    CHECK(fs::exists(a.path() / f));
  }
  for (const char* f : {"panel.csv", "regression_table.csv", "emotions.csv", "labels.jsonl", "model.ckpt"}) {
    INFO(f);
    CHECK(slurp(a.path() / f) == slurp(b.path() / f));
  }
  for (const auto& stage : stage_names()) {
    INFO(stage);
    CHECK(slurp(a.path() / "manifests" / (stage + ".json")) == slurp(b.path() / "manifests" / (stage + ".json")));
  }

  auto before = slurp(a.path() / "manifests" / "aggregate.json");
  auto panel = slurp(a.path() / "panel.csv");
  run_stage("aggregate", ca);
  CHECK(slurp(a.path() / "manifests" / "aggregate.json") == before);
  CHECK(slurp(a.path() / "panel.csv") == panel);

  auto table = read_csv((a.path() / "regression_table.csv").string());
  CHECK(table.rows.size() > 10);
  auto panel_rows = aggregate::read_panel_csv((a.path() / "panel.csv").string());
  CHECK(panel_rows.size() > 100);
  for (const auto& r : panel_rows) CHECK(r.n_users >= 2);
}

TEST_CASE("a different seed changes the synthetic corpus") {
  emopanel::testing::TempDir a("seed_a"), b("seed_b");
  auto ca = config_in(a.path()), cb = config_in(b.path());
  cb.seed = 8;
  run_stage("synth", ca);
  run_stage("synth", cb);
  CHECK(slurp(a.path() / "data/messages.jsonl") != slurp(b.path() / "data/messages.jsonl"));
}
