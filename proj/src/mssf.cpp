#include "salfuse/mssf.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "salfuse/error.hpp"

namespace salfuse {

void ScaleSet::validate() const {
  if (scales.empty()) throw Error(Errc::invalid_argument, "MSSF needs at least one scale");
  if (weights.size() != scales.size()) {
    throw Error(Errc::invalid_argument, "MSSF weights and scales differ in length");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 1 || (i > 0 && scales[i] <= scales[i - 1])) {
      throw Error(Errc::invalid_argument,
                  "MSSF scales must be positive and strictly increasing");
    }
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(Errc::invalid_argument, "MSSF weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error(Errc::invalid_argument, "MSSF weights sum to zero");
}

SaliencyMap superpixel_median_map(const SaliencyMap& s, const Segmentation& seg) {
  if (s.height() != seg.height || s.width() != seg.width) {
    throw Error(Errc::shape_mismatch,
                "saliency map " + std::to_string(s.height()) + "x" +
                    std::to_string(s.width()) + " vs segmentation " +
                    std::to_string(seg.height) + "x" + std::to_string(seg.width));
  }
  std::vector<std::vector<double>> members(seg.num_superpixels);
  for (std::size_t p = 0; p < s.size(); ++p) members[seg.labels[p]].push_back(s[p]);

  std::vector<double> median(seg.num_superpixels, 0.0);
  for (int k = 0; k < seg.num_superpixels; ++k) {
    auto& v = members[k];
    if (v.empty()) continue;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
      median[k] = upper;
    } else {
      const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
      median[k] = (lower + upper) / 2.0;
    }
  }

  SaliencyMap out(s.height(), s.width(), s.provenance());
  for (std::size_t p = 0; p < s.size(); ++p) out[p] = median[seg.labels[p]];
  return out;
}

SaliencyMap mssf_combine(const SaliencyMap& s, const std::vector<Segmentation>& segs,
                         const std::vector<double>& weights) {
  if (segs.size() != weights.size() || segs.empty()) {
    throw Error(Errc::invalid_argument, "one weight per segmentation required");
  }
  std::vector<SaliencyMap> per_scale(segs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < segs.size(); ++i) {
    per_scale[i] = superpixel_median_map(s, segs[i]);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  SaliencyMap out(s.height(), s.width(), Provenance::mssf);
  for (std::size_t p = 0; p < s.size(); ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) acc += weights[i] * per_scale[i][p];
    out[p] = std::clamp(acc / total, 0.0, 1.0);
  }
  return out;
}

SaliencyMap mssf_refine(const SaliencyMap& s, const Image& srgb, const ScaleSet& scales,
                        const SlicParams& slic_defaults) {
  scales.validate();
  if (s.height() != srgb.height() || s.width() != srgb.width()) {
    throw Error(Errc::shape_mismatch, "resize the map to the image size before MSSF");
  }
  if (srgb.colorspace() != ColorSpace::srgb) {
    throw Error(Errc::wrong_colorspace, "MSSF segments an SRGB image");
  }
  const Image lab = rgb_to_lab(srgb);
  std::vector<Segmentation> segs(scales.scales.size());
  std::vector<std::exception_ptr> errors(segs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < segs.size(); ++i) {
    try {
      SlicParams p = slic_defaults;
      p.n_target = scales.scales[i];
      segs[i] = slic(lab, p);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return mssf_combine(s, segs, scales.weights);
}

}  // namespace salfuse
