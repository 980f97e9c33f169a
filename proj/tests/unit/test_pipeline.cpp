#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "salfuse/bench.hpp"
#include "salfuse/pipeline.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace salfuse;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "salfuse_test_pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes n blob scenes with deep maps that are a noisy copy of the truth.
DatasetManifest write_corpus(const fs::path& dir, int n, bool with_deep, bool uniform = false) {
  DatasetManifest m{"synthetic", {}};
  for (int i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(i);
    auto scene = synth::blob_scene(48, 64, 100 + i);
    if (uniform) scene.image = synth::constant_rgb(48, 64, {0.4, 0.4, 0.6});
    save_rgb(scene.image, dir / (id + ".png"));
    save_map(scene.gt, dir / (id + "_gt.png"));
    ManifestEntry e{id, dir / (id + ".png"), dir / (id + "_gt.png"), std::nullopt};
    if (with_deep) {
      save_map(synth::half_informative(scene.gt, true, i, Provenance::deep), dir / (id + "_deep.png"));
      e.deep = dir / (id + "_deep.png");
    }
    m.entries.push_back(e);
  }
  save_manifest(m, dir / "manifest.json");
  return load_manifest(dir / "manifest.json");
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig c = PipelineConfig::from(KeyValueConfig::parse(
      "rbd.n_seg = 60\nmssf.scales = 20, 40\nwork_size = 32"));
  c.out_dir = out;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SALFUSE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, UniformImagesGiveZeroMapsAndMaeEqualsGtMean) {
  const fs::path dir = scratch_dir("uniform");
  const DatasetManifest m = write_corpus(dir, 3, false, true);
  const PipelineResult r = run_pipeline(m, small_config(dir / "out"));
  ASSERT_EQ(r.reports.count("rbd"), 1u);
  const EvalReport& rep = r.reports.at("rbd");
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const SaliencyMap out = load_map(dir / "out" / "rbd" / (m.entries[i].id + ".png"), Provenance::rbd);
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
    const SaliencyMap gt = load_ground_truth(m.entries[i].gt);
    double mean = 0.0;
    for (double v : gt.values()) mean += v;
    EXPECT_NEAR(rep.per_image[i].mae, mean / static_cast<double>(gt.size()), 1e-12);
  }
}

TEST(Pipeline, StageOrdering) {
  const fs::path dir = scratch_dir("stages");
  fs::create_directories(dir / "b");
  const DatasetManifest m = write_corpus(dir / "b", 2, true);

  PipelineConfig rbd_only = small_config(dir / "out1");
  DatasetManifest stripped = m;
  for (auto& e : stripped.entries) e.deep.reset();
  auto r1 = run_pipeline(stripped, rbd_only);
  EXPECT_EQ(r1.reports.count("rbd"), 1u);
  EXPECT_EQ(r1.reports.count("ds"), 0u);
  EXPECT_EQ(r1.reports.count("dsm"), 0u);
  EXPECT_FALSE(fs::exists(dir / "out1" / "dsm"));

  auto r2 = run_pipeline(m, small_config(dir / "out2"));
  EXPECT_EQ(r2.reports.count("deep"), 1u);
  EXPECT_EQ(r2.reports.count("ds"), 0u);
  EXPECT_EQ(r2.reports.count("dsm"), 0u);

  save_model(xavier_init({}, 3), dir / "model.sfn");
  PipelineConfig full = small_config(dir / "out3");
  full.model = dir / "model.sfn";
  auto r3 = run_pipeline(m, full);
  EXPECT_EQ(r3.reports.count("ds"), 1u);
  EXPECT_EQ(r3.reports.count("dsm"), 1u);
  EXPECT_TRUE(fs::exists(dir / "out3" / "report_dsm.json"));
  EXPECT_TRUE(fs::exists(dir / "out3" / "pr_ds.csv"));
  EXPECT_TRUE(fs::exists(dir / "out3" / "summary.json"));
}

TEST(Pipeline, FailedEntriesAreCountedNotFatal) {
  const fs::path dir = scratch_dir("failures");
  DatasetManifest m = write_corpus(dir, 3, false);
  std::ofstream(dir / "broken.png") << "not an image";
  m.entries.push_back({"broken", dir / "broken.png", m.entries[0].gt, std::nullopt});
  const PipelineResult r = run_pipeline(m, small_config(dir / "out"));
  EXPECT_EQ(r.entries, 4);
  EXPECT_EQ(r.failed, 1);
  EXPECT_TRUE(r.quality_gate_failed(0.10));
  EXPECT_FALSE(r.quality_gate_failed(0.25));
  EXPECT_EQ(r.reports.at("rbd").images_evaluated, 3);
  EXPECT_EQ(r.reports.at("rbd").images_skipped, 1);
}

TEST(Pipeline, TrainingSetIsBinaryAtWorkSize) {
  const fs::path dir = scratch_dir("trainset");
  const DatasetManifest m = write_corpus(dir, 2, true);
  const auto set = build_training_set(m, {.n_seg = 40}, 24);
  ASSERT_EQ(set.size(), 2u);
  for (const auto& s : set) {
    EXPECT_EQ(s.gt.height(), 24);
    EXPECT_EQ(s.rbd.width(), 24);
    for (double v : s.gt.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const DatasetManifest m = write_corpus(dir, 3, true);
  const std::string man = (dir / "manifest.json").string();
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("bogus"), 1);
  EXPECT_EQ(run_cli("rbd --image"), 1);
  EXPECT_EQ(run_cli("rbd --image " + (dir / "missing.png").string() + " --out " + out + ".png"), 2);
  EXPECT_EQ(run_cli("rbd --n-seg 0 --image " + m.entries[0].image.string() + " --out " + out + ".png"), 1);

  EXPECT_EQ(run_cli("slic -n 30 --image " + m.entries[0].image.string() + " --out " +
                    (dir / "labels.png").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "labels.json"));
  int h = 0, w = 0;
  EXPECT_EQ(load_labels16(dir / "labels.png", h, w).size(), static_cast<std::size_t>(48 * 64));

  std::ofstream(dir / "cfg.toml") << "[rbd]\nn_seg = 60\n[mssf]\nscales = [20, 40]\n";
  const std::string cfg = " --config " + (dir / "cfg.toml").string();
  EXPECT_EQ(run_cli("fuse-train --manifest " + man + " --out-dir " + out + " --max-iter 20 --lr 0.01 --work-size 32" + cfg), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "model.sfn"));
  EXPECT_TRUE(fs::exists(dir / "out" / "loss.csv"));
  EXPECT_EQ(run_cli("run --manifest " + man + " --out-dir " + out + "/run --model " + out + "/model.sfn --jobs 2" + cfg), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "run" / "report_dsm.json"));
  EXPECT_EQ(run_cli("fuse-infer --model " + out + "/model.sfn --deep " + m.entries[0].deep->string() +
                    " --rbd " + out + "/run/rbd/s0.png --out " + out + "/fused.png --work-size 32"),
            0);
  EXPECT_EQ(run_cli("mssf --image " + m.entries[0].image.string() + " --map " + out +
                    "/fused.png --out " + out + "/refined.png --scales 20,40"),
            0);
  EXPECT_EQ(run_cli("eval --manifest " + man + " --pred-dir " + out + "/run/rbd --out-dir " + out + "/eval"), 0);
  EXPECT_EQ(run_cli("eval --manifest " + man + " --pred-dir " + out + "/nothing --out-dir " + out + "/eval"), 2);
  EXPECT_EQ(run_cli("plot --csv " + out + "/run/pr_rbd.csv " + out + "/run/pr_dsm.csv --out " + out + "/pr.svg"), 0);
  EXPECT_NE(slurp(dir / "out" / "pr.svg").find("<polyline"), std::string::npos);
  EXPECT_EQ(run_cli("fuse-infer --model " + man + " --deep x --rbd y --out z"), 2);

  // One broken entry out of four trips the >10% quality gate.
  std::ofstream(dir / "broken.png") << "not an image";
  std::ofstream(dir / "gate.json") << R"({"entries": [
    {"image": "s0.png", "gt": "s0_gt.png"}, {"image": "s1.png", "gt": "s1_gt.png"},
    {"image": "s2.png", "gt": "s2_gt.png"}, {"image": "broken.png", "gt": "s0_gt.png"}]})";
  EXPECT_EQ(run_cli("run --manifest " + (dir / "gate.json").string() + " --out-dir " + out + "/gate" + cfg), 3);
}
