#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace salfuse {

enum class ColorSpace { srgb, lab, gray };

/// Row-major H x W x C raster of 64-bit samples.
///
/// SRGB and GRAY samples live in [0,1]; LAB samples use L in [0,100] and
/// a,b in roughly [-128,127]. The constructor only checks the size
/// invariant; range checks belong to the operations that care.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, ColorSpace cs);
  Image(int height, int width, int channels, ColorSpace cs,
        std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  ColorSpace colorspace() const noexcept { return colorspace_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * width_;
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int r, int c, int ch = 0) noexcept {
    return data_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch];
  }
  double at(int r, int c, int ch = 0) const noexcept {
    return data_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  ColorSpace colorspace_ = ColorSpace::gray;
  std::vector<double> data_;
};

/// Reads a PNG or JPEG file. Color files come back as 3-channel SRGB,
/// single-channel files as GRAY; alpha is dropped. 8- and 16-bit depths are
/// scaled to [0,1].
Image load_image(const std::filesystem::path& path);

/// Quantizes a [0,1] single-channel raster to 8 bits with round-half-up
/// (byte = floor(s * 255 + 0.5)) and writes it as PNG.
void save_gray(const Image& img, const std::filesystem::path& path);

/// 8-bit RGB PNG writer for SRGB images (same quantization as save_gray).
void save_rgb(const Image& img, const std::filesystem::path& path);

/// Writes a label raster as a 16-bit grayscale PNG. Labels must fit u16.
void save_labels16(std::span<const int> labels, int height, int width,
                   const std::filesystem::path& path);
std::vector<int> load_labels16(const std::filesystem::path& path, int& height,
                               int& width);

/// round-half-up quantization shared by the writers and the PR thresholds.
inline int quantize_u8(double s) noexcept {
  const double v = s * 255.0 + 0.5;
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<int>(v);
}

/// sRGB (D65) -> CIE XYZ -> CIELAB.
Image rgb_to_lab(const Image& img);

/// Bilinear resampling on a corner-aligned grid: output pixel i samples the
/// input at i * (in - 1) / (out - 1), so the four corners are preserved.
/// Resizing to the same shape returns an exact copy.
Image resize_bilinear(const Image& img, int out_h, int out_w);

}  // namespace salfuse
