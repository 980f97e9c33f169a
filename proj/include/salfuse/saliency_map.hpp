#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "salfuse/image.hpp"

namespace salfuse {

enum class Provenance { rbd, deep, fused, mssf, ground_truth };

const char* to_string(Provenance p) noexcept;

/// H x W saliency scores in [0,1], tagged with the stage that produced them.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(int height, int width, Provenance provenance, double fill = 0.0);
  SaliencyMap(int height, int width, Provenance provenance,
              std::vector<double> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  Provenance provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) noexcept { provenance_ = p; }

  double& at(int r, int c) noexcept {
    return values_[static_cast<std::size_t>(r) * width_ + c];
  }
  double at(int r, int c) const noexcept {
    return values_[static_cast<std::size_t>(r) * width_ + c];
  }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// True when every value is finite and inside [0,1].
  bool in_unit_range() const noexcept;

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  Provenance provenance_ = Provenance::rbd;
  std::vector<double> values_;
};

/// Single-channel view conversions. to_image yields a GRAY image.
Image to_image(const SaliencyMap& map);
SaliencyMap to_map(const Image& gray, Provenance provenance);

SaliencyMap load_map(const std::filesystem::path& path, Provenance provenance);
void save_map(const SaliencyMap& map, const std::filesystem::path& path);

SaliencyMap resize_map(const SaliencyMap& map, int out_h, int out_w);

/// Min-max normalization to [0,1]. A range below kDegenerateRange is
/// treated as zero and yields an all-zeros result.
inline constexpr double kDegenerateRange = 1e-9;
std::vector<double> minmax_normalize(std::span<const double> v);

}  // namespace salfuse
