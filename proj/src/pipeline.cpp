#include "salfuse/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>

#include <omp.h>

#include "salfuse/error.hpp"

namespace salfuse {

namespace fs = std::filesystem;

PipelineConfig PipelineConfig::from(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.rbd.n_seg = kv.get_int("rbd.n_seg", c.rbd.n_seg);
  c.rbd.sigma_clr = kv.get_double("rbd.sigma_clr", c.rbd.sigma_clr);
  c.rbd.sigma_bnd = kv.get_double("rbd.sigma_bnd", c.rbd.sigma_bnd);
  c.rbd.sigma_spa = kv.get_double("rbd.sigma_spa", c.rbd.sigma_spa);
  c.rbd.mu = kv.get_double("rbd.mu", c.rbd.mu);
  c.slic.compactness = kv.get_double("slic.compactness", c.slic.compactness);
  c.slic.iters = kv.get_int("slic.iters", c.slic.iters);
  c.rbd.slic = c.slic;
  c.mssf.scales = kv.get_int_list("mssf.scales", c.mssf.scales);
  c.mssf.weights = kv.get_double_list(
      "mssf.weights", std::vector<double>(c.mssf.scales.size(), 1.0));
  c.work_size = kv.get_int("work_size", c.work_size);
  if (auto m = kv.get("model")) c.model = fs::path(*m);
  c.jobs = kv.get_int("jobs", c.jobs);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<int>(c.seed)));
  c.max_skip_fraction = kv.get_double("max_skip_fraction", c.max_skip_fraction);
  if (c.work_size < 1) throw Error(Errc::invalid_argument, "work_size must be >= 1");
  c.mssf.validate();
  return c;
}

namespace {

Image as_srgb(const Image& img) {
  if (img.colorspace() == ColorSpace::srgb) return img;
  Image out(img.height(), img.width(), 3, ColorSpace::srgb);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int ch = 0; ch < 3; ++ch) out.data()[3 * p + ch] = img.data()[p];
  }
  return out;
}

SaliencyMap binarize(SaliencyMap m) {
  for (double& v : m.values()) v = v >= 0.5 ? 1.0 : 0.0;
  return m;
}

const char* const kStages[] = {"rbd", "deep", "ds", "dsm"};

}  // namespace

PipelineResult run_pipeline(const DatasetManifest& manifest, const PipelineConfig& cfg) {
  cfg.mssf.validate();
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
  std::optional<FusionParams> model;
  if (cfg.model) model = load_model(*cfg.model);

  for (const char* stage : kStages) fs::create_directories(cfg.out_dir / stage);

  const int n = static_cast<int>(manifest.entries.size());
  std::vector<std::string> errors(n);

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      const Image img = as_srgb(load_image(e.image));
      const SaliencyMap s_rbd = rbd_map(img, cfg.rbd);
      save_map(s_rbd, cfg.out_dir / "rbd" / (e.id + ".png"));
      if (!e.deep) continue;

      SaliencyMap s_deep = load_map(*e.deep, Provenance::deep);
      save_map(s_deep, cfg.out_dir / "deep" / (e.id + ".png"));
      if (!model) continue;

      const int ws = cfg.work_size;
      const SaliencyMap fused = fuse_forward(*model, resize_map(s_deep, ws, ws),
                                             resize_map(s_rbd, ws, ws));
      SaliencyMap s_ds = resize_map(fused, img.height(), img.width());
      save_map(s_ds, cfg.out_dir / "ds" / (e.id + ".png"));
      const SaliencyMap s_dsm = mssf_refine(s_ds, img, cfg.mssf, cfg.slic);
      save_map(s_dsm, cfg.out_dir / "dsm" / (e.id + ".png"));
    } catch (const std::exception& ex) {
      errors[i] = e.id + ": " + ex.what();
    }
  }

  PipelineResult result;
  result.entries = n;
  for (const auto& err : errors) {
    if (err.empty()) continue;
    ++result.failed;
    result.failures.push_back(err);
  }

  nlohmann::json summary;
  summary["dataset"] = manifest.name;
  summary["entries"] = n;
  summary["failed"] = result.failed;
  summary["failures"] = result.failures;
  summary["model"] = cfg.model ? cfg.model->generic_string() : "";
  summary["work_size"] = cfg.work_size;
  summary["seed"] = cfg.seed;
  summary["mssf_scales"] = cfg.mssf.scales;
  summary["mssf_weights"] = cfg.mssf.weights;
  summary["rbd"] = {{"n_seg", cfg.rbd.n_seg},         {"sigma_clr", cfg.rbd.sigma_clr},
                    {"sigma_bnd", cfg.rbd.sigma_bnd}, {"sigma_spa", cfg.rbd.sigma_spa},
                    {"mu", cfg.rbd.mu}};
  summary["evaluation_resolution"] = "predictions resized to ground-truth size";
  summary["stages"] = nlohmann::json::object();

  for (const char* stage : kStages) {
    const fs::path dir = cfg.out_dir / stage;
    if (fs::is_empty(dir)) {
      fs::remove(dir);
      continue;
    }
    EvalReport rep = evaluate_dataset(manifest, dir, stage);
    write_report_json(rep, cfg.out_dir / ("report_" + std::string(stage) + ".json"));
    write_pr_csv(rep, cfg.out_dir / ("pr_" + std::string(stage) + ".csv"));
    summary["stages"][stage] = {{"mean_mae", rep.mean_mae},
                                {"images_evaluated", rep.images_evaluated}};
    result.reports.emplace(stage, std::move(rep));
  }

  std::ofstream out(cfg.out_dir / "summary.json");
  out << summary.dump(2) << '\n';
  if (!out) throw Error(Errc::io_write_failure, "cannot write summary.json");
  return result;
}

std::vector<TrainSample> build_training_set(const DatasetManifest& manifest,
                                            const RbdParams& rbd, int work_size) {
  std::vector<const ManifestEntry*> usable;
  for (const auto& e : manifest.entries) {
    if (e.deep) usable.push_back(&e);
  }
  if (usable.empty()) {
    throw Error(Errc::empty_dataset, "no manifest entry carries a deep map");
  }
  const int n = static_cast<int>(usable.size());
  std::vector<TrainSample> samples(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      const ManifestEntry& e = *usable[i];
      const Image img = as_srgb(load_image(e.image));
      const SaliencyMap s_rbd = rbd_map(img, rbd);
      const SaliencyMap s_deep = load_map(*e.deep, Provenance::deep);
      const SaliencyMap gt = load_ground_truth(e.gt);
      samples[i] = {resize_map(s_deep, work_size, work_size),
                    resize_map(s_rbd, work_size, work_size),
                    binarize(resize_map(gt, work_size, work_size))};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return samples;
}

}  // namespace salfuse
