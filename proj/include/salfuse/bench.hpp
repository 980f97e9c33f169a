#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "salfuse/saliency_map.hpp"

namespace salfuse {

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> deep;
};

/// JSON manifest: {"name": ..., "entries": [{"id", "image", "gt", "deep"}]}.
/// Relative paths resolve against the manifest's directory; a missing id
/// defaults to the image file stem.
struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;
};

DatasetManifest load_manifest(const std::filesystem::path& path,
                              bool check_paths = true);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

/// Ground truth from a PNG: thresholded at byte value 128.
SaliencyMap load_ground_truth(const std::filesystem::path& path);

double mae(const SaliencyMap& s, const SaliencyMap& gt);

struct PrPoint {
  int threshold = 0;
  double precision = 0.0;
  double recall = 0.0;
};

using PrCurve = std::array<PrPoint, 256>;

/// Binarizes s at every t in [0, 255]: a pixel is detected when
/// round(s * 255) >= t. Precision is 1 when nothing is detected. Returns
/// nullopt when gt has no salient pixel.
std::optional<PrCurve> pr_points(const SaliencyMap& s, const SaliencyMap& gt);

struct ImageScore {
  std::string id;
  double mae = 0.0;
  bool has_pr = false;
};

struct EvalReport {
  std::string dataset;
  std::string method;
  std::vector<ImageScore> per_image;
  double mean_mae = 0.0;
  PrCurve pr_curve{};
  int images_evaluated = 0;
  int images_skipped = 0;     // missing or unreadable prediction / gt
  int pr_skipped_empty_gt = 0;
  std::string resolution = "gt";  // predictions resized to GT size
};

/// Scores an already-loaded set of (id, prediction, gt) triples. Images
/// whose gt is empty contribute MAE but not PR. The curve is the
/// per-threshold mean over images in manifest order.
EvalReport evaluate_maps(const std::string& dataset, const std::string& method,
                         std::span<const std::string> ids,
                         std::span<const SaliencyMap> predictions,
                         std::span<const SaliencyMap> gts, int skipped);

/// Loads `<pred_dir>/<id>.png` for every entry and evaluates it. Missing
/// predictions are counted as skipped; throws Errc::all_skipped when
/// nothing could be scored.
EvalReport evaluate_dataset(const DatasetManifest& manifest,
                            const std::filesystem::path& pred_dir,
                            const std::string& method = "prediction");

nlohmann::json to_json(const EvalReport& report);
void write_report_json(const EvalReport& report,
                       const std::filesystem::path& path);
void write_pr_csv(const EvalReport& report, const std::filesystem::path& path);

struct PrSeries {
  std::string label;
  std::vector<double> precision;
  std::vector<double> recall;
};

PrSeries read_pr_csv(const std::filesystem::path& path);

/// Precision-over-recall line chart as a standalone SVG document.
std::string render_pr_svg(std::span<const PrSeries> series,
                          const std::string& title);

}  // namespace salfuse
