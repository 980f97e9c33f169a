#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salfuse/bench.hpp"
#include "salfuse/config.hpp"
#include "salfuse/fusion.hpp"
#include "salfuse/mssf.hpp"
#include "salfuse/rbd.hpp"

namespace salfuse {

struct PipelineConfig {
  RbdParams rbd{};
  ScaleSet mssf{};
  SlicParams slic{};  // MSSF segmentation defaults
  int work_size = 224;
  std::optional<std::filesystem::path> model;
  std::filesystem::path out_dir = "out";
  int jobs = 0;  // 0: OpenMP default
  std::uint64_t seed = 1;
  double max_skip_fraction = 0.10;

  /// Applies `rbd.*`, `slic.*`, `mssf.*`, `work_size`, `model`, `jobs`
  /// and `seed` keys on top of the defaults.
  static PipelineConfig from(const KeyValueConfig& kv);
};

struct PipelineResult {
  /// Stage name ("rbd", "deep", "ds", "dsm") -> report. "ds"/"dsm" exist
  /// only when a model was supplied and entries carry deep maps.
  std::map<std::string, EvalReport> reports;
  int entries = 0;
  int failed = 0;
  std::vector<std::string> failures;

  bool quality_gate_failed(double max_skip_fraction) const {
    return entries > 0 &&
           static_cast<double>(failed) > max_skip_fraction * entries;
  }
};

/// Per entry: RBD at native resolution -> optional fusion with the
/// supplied deep map at work_size -> MSSF at native resolution. Maps are
/// written to `<out_dir>/<stage>/<id>.png`, then every stage directory is
/// scored with evaluate_dataset and reports land in `<out_dir>`.
PipelineResult run_pipeline(const DatasetManifest& manifest,
                            const PipelineConfig& config);

/// Builds fusion training triples (deep, rbd, gt) at work_size.
std::vector<TrainSample> build_training_set(const DatasetManifest& manifest,
                                            const RbdParams& rbd,
                                            int work_size);

}  // namespace salfuse
