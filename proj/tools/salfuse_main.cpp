// salfuse: command-line front end for segmentation, saliency, fusion and
// benchmark evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 quality gate
// (more than the allowed fraction of entries failed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "salfuse/bench.hpp"
#include "salfuse/config.hpp"
#include "salfuse/error.hpp"
#include "salfuse/fusion.hpp"
#include "salfuse/image.hpp"
#include "salfuse/mssf.hpp"
#include "salfuse/pipeline.hpp"
#include "salfuse/rbd.hpp"
#include "salfuse/superpixel.hpp"

namespace fs = std::filesystem;
using namespace salfuse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitQuality = 3;

struct Common {
  std::optional<std::string> config;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value settings file");
  cmd->add_option("--jobs", c.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", c.seed, "random seed");
}

KeyValueConfig load_config(const Common& c) {
  KeyValueConfig kv = c.config ? KeyValueConfig::load(*c.config) : KeyValueConfig{};
  if (c.jobs > 0) kv.set("jobs", std::to_string(c.jobs));
  if (c.seed) kv.set("seed", std::to_string(*c.seed));
  return kv;
}

void apply_jobs(const KeyValueConfig& kv) {
  const int jobs = kv.get_int("jobs", 0);
  if (jobs > 0) omp_set_num_threads(jobs);
}

RbdParams rbd_params(const KeyValueConfig& kv) { return PipelineConfig::from(kv).rbd; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(Errc::io_write_failure, "cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salfuse: boundary-connectivity saliency, fusion and MSSF refinement"};
  app.require_subcommand(1);

  // slic
  Common slic_c;
  std::string slic_image, slic_out;
  std::optional<std::string> slic_json;
  SlicParams slic_p;
  auto* slic_cmd = app.add_subcommand("slic", "SLIC superpixels: 16-bit label PNG + JSON stats");
  slic_cmd->add_option("--image", slic_image, "input PNG/JPEG")->required();
  slic_cmd->add_option("--out", slic_out, "output label PNG (16-bit)")->required();
  slic_cmd->add_option("--json", slic_json, "statistics sidecar (default: <out>.json)");
  slic_cmd->add_option("-n,--n-target", slic_p.n_target, "target superpixel count")->capture_default_str();
  slic_cmd->add_option("--compactness", slic_p.compactness)->capture_default_str();
  slic_cmd->add_option("--iters", slic_p.iters)->capture_default_str();
  add_common(slic_cmd, slic_c);

  // rbd
  Common rbd_c;
  std::string rbd_image, rbd_out;
  std::optional<int> rbd_nseg;
  std::optional<double> rbd_sclr, rbd_sbnd, rbd_sspa, rbd_mu;
  auto* rbd_cmd = app.add_subcommand("rbd", "boundary-connectivity saliency map");
  rbd_cmd->add_option("--image", rbd_image)->required();
  rbd_cmd->add_option("--out", rbd_out, "output saliency PNG")->required();
  rbd_cmd->add_option("--n-seg", rbd_nseg, "superpixels (default 200)");
  rbd_cmd->add_option("--sigma-clr", rbd_sclr, "geodesic similarity width, Lab units (10)");
  rbd_cmd->add_option("--sigma-bnd", rbd_sbnd, "boundary connectivity width (1)");
  rbd_cmd->add_option("--sigma-spa", rbd_sspa, "contrast spatial width, diagonal units (0.25)");
  rbd_cmd->add_option("--mu", rbd_mu, "smoothness floor (0.1)");
  add_common(rbd_cmd, rbd_c);

  // fuse-train
  Common train_c;
  std::string train_manifest, train_out = "model";
  std::optional<double> train_lr, train_momentum, train_power;
  std::optional<int> train_iters, train_batch, train_hidden, train_ws;
  auto* train_cmd = app.add_subcommand("fuse-train", "train the two-layer fusion network");
  train_cmd->add_option("--manifest", train_manifest, "dataset manifest (entries need deep maps)")->required();
  train_cmd->add_option("--out-dir", train_out, "writes model.sfn and loss.csv")->capture_default_str();
  train_cmd->add_option("--lr", train_lr, "base learning rate (1e-4)");
  train_cmd->add_option("--momentum", train_momentum, "(0.9)");
  train_cmd->add_option("--power", train_power, "poly decay power (0.9)");
  train_cmd->add_option("--max-iter", train_iters, "(1000)");
  train_cmd->add_option("--batch", train_batch, "(1)");
  train_cmd->add_option("--hidden", train_hidden, "hidden channels (8)");
  train_cmd->add_option("--work-size", train_ws, "square training resolution (224)");
  add_common(train_cmd, train_c);

  // fuse-infer
  Common infer_c;
  std::string infer_model, infer_deep, infer_rbd, infer_out;
  std::optional<int> infer_ws;
  auto* infer_cmd = app.add_subcommand("fuse-infer", "fuse a deep map and an RBD map");
  infer_cmd->add_option("--model", infer_model)->required();
  infer_cmd->add_option("--deep", infer_deep)->required();
  infer_cmd->add_option("--rbd", infer_rbd)->required();
  infer_cmd->add_option("--out", infer_out)->required();
  infer_cmd->add_option("--work-size", infer_ws, "square inference resolution (224)");
  add_common(infer_cmd, infer_c);

  // mssf
  Common mssf_c;
  std::string mssf_image, mssf_map, mssf_out;
  std::optional<std::string> mssf_scales, mssf_weights;
  auto* mssf_cmd = app.add_subcommand("mssf", "multi-scale superpixel median refinement");
  mssf_cmd->add_option("--image", mssf_image)->required();
  mssf_cmd->add_option("--map", mssf_map, "saliency map to refine")->required();
  mssf_cmd->add_option("--out", mssf_out)->required();
  mssf_cmd->add_option("--scales", mssf_scales, "comma list (100,200,300,400)");
  mssf_cmd->add_option("--weights", mssf_weights, "comma list (all 1)");
  add_common(mssf_cmd, mssf_c);

  // eval
  Common eval_c;
  std::string eval_manifest, eval_pred, eval_out = ".", eval_method = "prediction";
  auto* eval_cmd = app.add_subcommand("eval", "MAE and PR curve for a prediction directory");
  eval_cmd->add_option("--manifest", eval_manifest)->required();
  eval_cmd->add_option("--pred-dir", eval_pred, "holds <id>.png per entry")->required();
  eval_cmd->add_option("--out-dir", eval_out, "writes report.json and pr.csv")->capture_default_str();
  eval_cmd->add_option("--method", eval_method)->capture_default_str();
  add_common(eval_cmd, eval_c);

  // run
  Common run_c;
  std::string run_manifest, run_out = "out";
  std::optional<std::string> run_model;
  auto* run_cmd = app.add_subcommand("run", "RBD -> fusion -> MSSF over a manifest, with reports");
  run_cmd->add_option("--manifest", run_manifest)->required();
  run_cmd->add_option("--out-dir", run_out)->capture_default_str();
  run_cmd->add_option("--model", run_model, "SFN1 model; enables the ds/dsm stages");
  add_common(run_cmd, run_c);

  // plot
  std::vector<std::string> plot_csv;
  std::string plot_out = "pr.svg", plot_title = "Precision-Recall";
  auto* plot_cmd = app.add_subcommand("plot", "PR curves (CSV from eval/run) to SVG");
  plot_cmd->add_option("--csv", plot_csv, "one or more pr CSV files")->required();
  plot_cmd->add_option("--out", plot_out)->capture_default_str();
  plot_cmd->add_option("--title", plot_title)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*slic_cmd) {
      apply_jobs(load_config(slic_c));
      const Image img = load_image(slic_image);
      Image srgb = img;
      if (img.colorspace() == ColorSpace::gray) {
        srgb = Image(img.height(), img.width(), 3, ColorSpace::srgb);
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
          for (int ch = 0; ch < 3; ++ch) srgb.data()[3 * p + ch] = img.data()[p];
        }
      }
      const Segmentation seg = slic(rgb_to_lab(srgb), slic_p);
      save_labels16(seg.labels, seg.height, seg.width, slic_out);
      nlohmann::json j;
      j["height"] = seg.height;
      j["width"] = seg.width;
      j["num_superpixels"] = seg.num_superpixels;
      j["n_target"] = slic_p.n_target;
      j["compactness"] = slic_p.compactness;
      j["iters"] = slic_p.iters;
      j["superpixels"] = nlohmann::json::array();
      for (int k = 0; k < seg.num_superpixels; ++k) {
        j["superpixels"].push_back({{"id", k},
                                    {"mean_lab", seg.mean_lab[k]},
                                    {"centroid", seg.centroid[k]},
                                    {"area_px", seg.area_px[k]},
                                    {"touches_boundary", static_cast<bool>(seg.touches_boundary[k])}});
      }
      const fs::path json_path = slic_json ? fs::path(*slic_json)
                                           : fs::path(slic_out).replace_extension(".json");
      write_text(json_path, j.dump(2) + "\n");
      std::cout << "superpixels: " << seg.num_superpixels << '\n';
    } else if (*rbd_cmd) {
      const KeyValueConfig kv = load_config(rbd_c);
      apply_jobs(kv);
      RbdParams p = rbd_params(kv);
      if (rbd_nseg) p.n_seg = *rbd_nseg;
      if (rbd_sclr) p.sigma_clr = *rbd_sclr;
      if (rbd_sbnd) p.sigma_bnd = *rbd_sbnd;
      if (rbd_sspa) p.sigma_spa = *rbd_sspa;
      if (rbd_mu) p.mu = *rbd_mu;
      save_map(rbd_map(load_image(rbd_image), p), rbd_out);
    } else if (*train_cmd) {
      const KeyValueConfig kv = load_config(train_c);
      apply_jobs(kv);
      TrainConfig tc;
      tc.base_lr = train_lr.value_or(kv.get_double("train.base_lr", tc.base_lr));
      tc.momentum = train_momentum.value_or(kv.get_double("train.momentum", tc.momentum));
      tc.power = train_power.value_or(kv.get_double("train.power", tc.power));
      tc.max_iter = train_iters.value_or(kv.get_int("train.max_iter", tc.max_iter));
      tc.batch = train_batch.value_or(kv.get_int("train.batch", tc.batch));
      tc.arch.hidden = static_cast<std::uint32_t>(
          train_hidden.value_or(kv.get_int("train.hidden", static_cast<int>(tc.arch.hidden))));
      tc.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
      const int ws = train_ws.value_or(kv.get_int("work_size", 224));

      const DatasetManifest manifest = load_manifest(train_manifest);
      const auto samples = build_training_set(manifest, rbd_params(kv), ws);
      const TrainResult res = train(samples, tc);
      fs::create_directories(train_out);
      save_model(res.params, fs::path(train_out) / "model.sfn");
      std::ofstream csv(fs::path(train_out) / "loss.csv");
      csv << "iter,lr,loss\n";
      for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i,
                      poly_lr(tc, static_cast<int>(i)), res.loss_trace[i]);
        csv << buf;
      }
      std::cout << "trained on " << samples.size() << " samples, final loss "
                << res.loss_trace.back() << '\n';
    } else if (*infer_cmd) {
      const KeyValueConfig kv = load_config(infer_c);
      apply_jobs(kv);
      const int ws = infer_ws.value_or(kv.get_int("work_size", 224));
      const FusionParams model = load_model(infer_model);
      const SaliencyMap deep = load_map(infer_deep, Provenance::deep);
      const SaliencyMap rbd = load_map(infer_rbd, Provenance::rbd);
      const SaliencyMap fused =
          fuse_forward(model, resize_map(deep, ws, ws), resize_map(rbd, ws, ws));
      save_map(resize_map(fused, deep.height(), deep.width()), infer_out);
    } else if (*mssf_cmd) {
      KeyValueConfig kv = load_config(mssf_c);
      if (mssf_scales) {
        kv.set("mssf.scales", *mssf_scales);
        if (!mssf_weights && !kv.has("mssf.weights")) {
          kv.set("mssf.weights", std::string());
        }
      }
      if (mssf_weights) kv.set("mssf.weights", *mssf_weights);
      if (kv.get("mssf.weights") == std::optional<std::string>("")) {
        const auto n = kv.get_int_list("mssf.scales", {}).size();
        std::string ones;
        for (std::size_t i = 0; i < n; ++i) ones += i ? ",1" : "1";
        kv.set("mssf.weights", ones);
      }
      const PipelineConfig pc = PipelineConfig::from(kv);
      apply_jobs(kv);
      const Image img = load_image(mssf_image);
      if (img.colorspace() != ColorSpace::srgb) {
        throw Error(Errc::wrong_colorspace, "mssf needs a color image");
      }
      SaliencyMap s = load_map(mssf_map, Provenance::fused);
      if (s.height() != img.height() || s.width() != img.width()) {
        s = resize_map(s, img.height(), img.width());
      }
      save_map(mssf_refine(s, img, pc.mssf, pc.slic), mssf_out);
    } else if (*eval_cmd) {
      apply_jobs(load_config(eval_c));
      const DatasetManifest manifest = load_manifest(eval_manifest);
      const EvalReport rep = evaluate_dataset(manifest, eval_pred, eval_method);
      fs::create_directories(eval_out);
      write_report_json(rep, fs::path(eval_out) / "report.json");
      write_pr_csv(rep, fs::path(eval_out) / "pr.csv");
      std::printf("%s %s: mean MAE %.4f over %d images (%d skipped)\n", rep.dataset.c_str(),
                  rep.method.c_str(), rep.mean_mae, rep.images_evaluated, rep.images_skipped);
    } else if (*run_cmd) {
      KeyValueConfig kv = load_config(run_c);
      if (run_model) kv.set("model", *run_model);
      PipelineConfig pc = PipelineConfig::from(kv);
      pc.out_dir = run_out;
      const DatasetManifest manifest = load_manifest(run_manifest);
      const PipelineResult res = run_pipeline(manifest, pc);
      for (const auto& f : res.failures) std::cerr << "skipped " << f << '\n';
      for (const auto& [stage, rep] : res.reports) {
        std::printf("%-4s mean MAE %.4f (%d images)\n", stage.c_str(), rep.mean_mae,
                    rep.images_evaluated);
      }
      if (res.quality_gate_failed(pc.max_skip_fraction)) {
        std::cerr << "quality gate: " << res.failed << " of " << res.entries
                  << " entries failed\n";
        return kExitQuality;
      }
    } else if (*plot_cmd) {
      std::vector<PrSeries> series;
      for (const auto& p : plot_csv) series.push_back(read_pr_csv(p));
      write_text(plot_out, render_pr_svg(series, plot_title));
    }
  } catch (const Error& e) {
    std::cerr << "salfuse: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == Errc::invalid_argument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "salfuse: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
