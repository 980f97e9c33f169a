#include "salfuse/saliency_map.hpp"

#include <algorithm>
#include <cmath>

#include "salfuse/error.hpp"

namespace salfuse {

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::rbd: return "rbd";
    case Provenance::deep: return "deep";
    case Provenance::fused: return "fused";
    case Provenance::mssf: return "mssf";
    case Provenance::ground_truth: return "gt";
  }
  return "unknown";
}

SaliencyMap::SaliencyMap(int height, int width, Provenance provenance,
                         double fill)
    : SaliencyMap(height, width, provenance,
                  std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                          std::max(width, 0),
                                      fill)) {}

SaliencyMap::SaliencyMap(int height, int width, Provenance provenance,
                         std::vector<double> values)
    : height_(height), width_(width), provenance_(provenance),
      values_(std::move(values)) {
  if (height <= 0 || width <= 0) {
    throw Error(Errc::invalid_argument, "saliency map dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw Error(Errc::invalid_argument, "saliency map data length != H * W");
  }
}

bool SaliencyMap::in_unit_range() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

Image to_image(const SaliencyMap& map) {
  return Image(map.height(), map.width(), 1, ColorSpace::gray,
               {map.values().begin(), map.values().end()});
}

SaliencyMap to_map(const Image& gray, Provenance provenance) {
  if (gray.channels() != 1) {
    throw Error(Errc::invalid_argument, "saliency maps are single-channel");
  }
  return SaliencyMap(gray.height(), gray.width(), provenance,
                     {gray.data().begin(), gray.data().end()});
}

SaliencyMap load_map(const std::filesystem::path& path, Provenance provenance) {
  Image img = load_image(path);
  if (img.channels() == 3) {
    // Maps saved by other tools are sometimes RGB with equal channels.
    Image gray(img.height(), img.width(), 1, ColorSpace::gray);
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        gray.at(r, c) = (img.at(r, c, 0) + img.at(r, c, 1) + img.at(r, c, 2)) / 3.0;
      }
    }
    img = std::move(gray);
  }
  return to_map(img, provenance);
}

void save_map(const SaliencyMap& map, const std::filesystem::path& path) {
  save_gray(to_image(map), path);
}

SaliencyMap resize_map(const SaliencyMap& map, int out_h, int out_w) {
  return to_map(resize_bilinear(to_image(map), out_h, out_w), map.provenance());
}

std::vector<double> minmax_normalize(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (!(range >= kDegenerateRange)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::clamp((v[i] - *lo) / range, 0.0, 1.0);
  }
  return out;
}

}  // namespace salfuse
