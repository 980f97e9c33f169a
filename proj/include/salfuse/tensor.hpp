#pragma once

#include <cstddef>
#include <vector>

namespace salfuse {

/// Dense H x W x C activation tensor (row-major, channel fastest).
struct Tensor3 {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_),
        data(static_cast<std::size_t>(h_) * w_ * c_, fill) {}

  double& at(int y, int x, int ch) noexcept {
    return data[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch) const noexcept {
    return data[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }

  const double* pixel(int y, int x) const noexcept {
    return &data[(static_cast<std::size_t>(y) * w + x) * c];
  }
  double* pixel(int y, int x) noexcept {
    return &data[(static_cast<std::size_t>(y) * w + x) * c];
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

/// Convolution weights laid out as (kh, kw, cin, cout), cout fastest, plus
/// one bias per output channel.
struct ConvKernel {
  int kh = 0;
  int kw = 0;
  int cin = 0;
  int cout = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  ConvKernel() = default;
  ConvKernel(int kh_, int kw_, int cin_, int cout_)
      : kh(kh_), kw(kw_), cin(cin_), cout(cout_),
        weights(static_cast<std::size_t>(kh_) * kw_ * cin_ * cout_, 0.0),
        bias(static_cast<std::size_t>(cout_), 0.0) {}

  std::size_t index(int i, int j, int ci, int co) const noexcept {
    return ((static_cast<std::size_t>(i) * kw + j) * cin + ci) * cout + co;
  }
  double& at(int i, int j, int ci, int co) noexcept {
    return weights[index(i, j, ci, co)];
  }
  double at(int i, int j, int ci, int co) const noexcept {
    return weights[index(i, j, ci, co)];
  }

  friend bool operator==(const ConvKernel&, const ConvKernel&) = default;
};

struct ConvGrads {
  Tensor3 input;
  ConvKernel kernel;  // weights/bias hold dL/dW and dL/db
};

}  // namespace salfuse
