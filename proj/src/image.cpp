#include "salfuse/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "salfuse/error.hpp"

namespace salfuse {

namespace fs = std::filesystem;

Image::Image(int height, int width, int channels, ColorSpace cs)
    : Image(height, width, channels, cs,
            std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                std::max(width, 0) * std::max(channels, 0))) {}

Image::Image(int height, int width, int channels, ColorSpace cs,
             std::vector<double> data)
    : height_(height), width_(width), channels_(channels), colorspace_(cs),
      data_(std::move(data)) {
  if (height <= 0 || width <= 0) {
    throw Error(Errc::invalid_argument, "image dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw Error(Errc::invalid_argument, "image must have 1 or 3 channels");
  }
  if ((cs == ColorSpace::gray) != (channels == 1)) {
    throw Error(Errc::invalid_argument,
                "GRAY images have one channel, SRGB/LAB have three");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error(Errc::invalid_argument, "image data length != H * W * C");
  }
}

namespace {

enum class Codec { png, jpeg, unknown };

Codec sniff(const std::vector<unsigned char>& bytes) {
  static constexpr std::array<unsigned char, 8> png_magic{
      0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= png_magic.size() &&
      std::equal(png_magic.begin(), png_magic.end(), bytes.begin())) {
    return Codec::png;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
      bytes[2] == 0xFF) {
    return Codec::jpeg;
  }
  return Codec::unknown;
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::file_not_found, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_png(const cv::Mat& mat, const fs::path& path) {
  std::vector<unsigned char> buf;
  bool ok = false;
  try {
    ok = cv::imencode(".png", mat, buf);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) {
    throw Error(Errc::io_write_failure, "PNG encoding failed for " + path.string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw Error(Errc::io_write_failure, "cannot write " + path.string());
  }
}

void check_unit_range(const Image& img, const fs::path& path) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(Errc::invalid_argument,
                  "sample outside [0,1] while writing " + path.string());
    }
  }
}

}  // namespace

Image load_image(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(Errc::file_not_found, "no such file: " + path.string());
  }
  const auto bytes = read_bytes(path);
  if (sniff(bytes) == Codec::unknown) {
    throw Error(Errc::unsupported_format,
                "not a PNG or JPEG file: " + path.string());
  }
  cv::Mat mat;
  try {
    mat = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    mat.release();
  }
  if (mat.empty()) {
    throw Error(Errc::corrupt_data, "cannot decode " + path.string());
  }

  double scale = 0.0;
  switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default:
      throw Error(Errc::unsupported_format,
                  "unsupported sample depth in " + path.string());
  }

  const int h = mat.rows;
  const int w = mat.cols;
  const int src_ch = mat.channels();
  const bool gray = src_ch == 1 || src_ch == 2;  // 2 = gray + alpha
  Image img(h, w, gray ? 1 : 3, gray ? ColorSpace::gray : ColorSpace::srgb);

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      auto sample = [&](int ch) -> double {
        if (mat.depth() == CV_8U) {
          return mat.ptr<unsigned char>(r)[c * src_ch + ch] * scale;
        }
        return mat.ptr<unsigned short>(r)[c * src_ch + ch] * scale;
      };
      if (gray) {
        img.at(r, c) = sample(0);
      } else {
        // OpenCV stores BGR(A).
        img.at(r, c, 0) = sample(2);
        img.at(r, c, 1) = sample(1);
        img.at(r, c, 2) = sample(0);
      }
    }
  }
  return img;
}

void save_gray(const Image& img, const fs::path& path) {
  if (img.channels() != 1) {
    throw Error(Errc::invalid_argument, "save_gray needs a one-channel image");
  }
  check_unit_range(img, path);
  cv::Mat mat(img.height(), img.width(), CV_8UC1);
  for (int r = 0; r < img.height(); ++r) {
    auto* row = mat.ptr<unsigned char>(r);
    for (int c = 0; c < img.width(); ++c) {
      row[c] = static_cast<unsigned char>(quantize_u8(img.at(r, c)));
    }
  }
  write_png(mat, path);
}

void save_rgb(const Image& img, const fs::path& path) {
  if (img.colorspace() != ColorSpace::srgb) {
    throw Error(Errc::wrong_colorspace, "save_rgb needs an SRGB image");
  }
  check_unit_range(img, path);
  cv::Mat mat(img.height(), img.width(), CV_8UC3);
  for (int r = 0; r < img.height(); ++r) {
    auto* row = mat.ptr<unsigned char>(r);
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        row[c * 3 + (2 - ch)] =
            static_cast<unsigned char>(quantize_u8(img.at(r, c, ch)));
      }
    }
  }
  write_png(mat, path);
}

void save_labels16(std::span<const int> labels, int height, int width,
                   const fs::path& path) {
  if (labels.size() != static_cast<std::size_t>(height) * width) {
    throw Error(Errc::shape_mismatch, "label raster size mismatch");
  }
  cv::Mat mat(height, width, CV_16UC1);
  for (int r = 0; r < height; ++r) {
    auto* row = mat.ptr<unsigned short>(r);
    for (int c = 0; c < width; ++c) {
      const int v = labels[static_cast<std::size_t>(r) * width + c];
      if (v < 0 || v > 65535) {
        throw Error(Errc::invalid_argument, "label does not fit in 16 bits");
      }
      row[c] = static_cast<unsigned short>(v);
    }
  }
  write_png(mat, path);
}

std::vector<int> load_labels16(const fs::path& path, int& height, int& width) {
  if (!fs::exists(path)) {
    throw Error(Errc::file_not_found, "no such file: " + path.string());
  }
  const cv::Mat mat = cv::imdecode(read_bytes(path), cv::IMREAD_UNCHANGED);
  if (mat.empty() || mat.type() != CV_16UC1) {
    throw Error(Errc::corrupt_data, "not a 16-bit label PNG: " + path.string());
  }
  height = mat.rows;
  width = mat.cols;
  std::vector<int> labels(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    const auto* row = mat.ptr<unsigned short>(r);
    for (int c = 0; c < width; ++c) {
      labels[static_cast<std::size_t>(r) * width + c] = row[c];
    }
  }
  return labels;
}

namespace {

// sRGB primaries, D65. The reference white is taken as the image of
// RGB (1,1,1) so that white lands on L = 100, a = b = 0 exactly.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

constexpr double row_sum(int i) {
  return kRgbToXyz[i][0] + kRgbToXyz[i][1] + kRgbToXyz[i][2];
}

constexpr double kWhite[3] = {row_sum(0), row_sum(1), row_sum(2)};

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t)
                                   : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Image rgb_to_lab(const Image& img) {
  if (img.colorspace() != ColorSpace::srgb || img.channels() != 3) {
    throw Error(Errc::wrong_colorspace, "rgb_to_lab expects a 3-channel SRGB image");
  }
  Image out(img.height(), img.width(), 3, ColorSpace::lab);
  auto src = img.data();
  auto dst = out.data();
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    const double rgb[3] = {srgb_to_linear(src[3 * p]),
                           srgb_to_linear(src[3 * p + 1]),
                           srgb_to_linear(src[3 * p + 2])};
    double f[3];
    for (int i = 0; i < 3; ++i) {
      const double v = kRgbToXyz[i][0] * rgb[0] + kRgbToXyz[i][1] * rgb[1] +
                       kRgbToXyz[i][2] * rgb[2];
      f[i] = lab_f(v / kWhite[i]);
    }
    dst[3 * p] = 116.0 * f[1] - 16.0;
    dst[3 * p + 1] = 500.0 * (f[0] - f[1]);
    dst[3 * p + 2] = 200.0 * (f[1] - f[2]);
  }
  return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw Error(Errc::invalid_argument, "zero-size resize output");
  }
  if (out_h == img.height() && out_w == img.width()) return img;

  const int in_h = img.height();
  const int in_w = img.width();
  const int ch = img.channels();
  Image out(out_h, out_w, ch, img.colorspace());

  auto source_coord = [](int i, int in, int out) {
    if (out == 1 || in == 1) return 0.0;
    return static_cast<double>(i) * (in - 1) / (out - 1);
  };

  for (int r = 0; r < out_h; ++r) {
    const double y = source_coord(r, in_h, out_h);
    const int y0 = std::min(static_cast<int>(y), in_h - 1);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double fy = y - y0;
    for (int c = 0; c < out_w; ++c) {
      const double x = source_coord(c, in_w, out_w);
      const int x0 = std::min(static_cast<int>(x), in_w - 1);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double fx = x - x0;
      for (int k = 0; k < ch; ++k) {
        // std::lerp is exact at the endpoints, monotone, and returns a
        // when a == b, which keeps constants constant and outputs in range.
        const double top = std::lerp(img.at(y0, x0, k), img.at(y0, x1, k), fx);
        const double bot = std::lerp(img.at(y1, x0, k), img.at(y1, x1, k), fx);
        out.at(r, c, k) = std::lerp(top, bot, fy);
      }
    }
  }
  return out;
}

}  // namespace salfuse
