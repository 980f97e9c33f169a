#pragma once

// Data-parallel inner loops. Every kernel exists twice: a straightforward
// serial reference and an OpenMP version. Both visit each output element
// with the same arithmetic in the same order, so their results are
// bit-identical; tests/unit/test_kernels.cpp holds them to that.

#include <span>
#include <vector>

#include "salfuse/superpixel.hpp"
#include "salfuse/tensor.hpp"

namespace salfuse::kernels {

struct SlicCenter {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
  double row = 0.0;
  double col = 0.0;
};

/// One SLIC assignment sweep. A pixel's candidates are the centers whose
/// 2S x 2S window covers it plus its current center (labels[p] >= 0). The
/// winner minimizes d_lab^2 + (d_xy / S)^2 * m^2, ties going to the smaller
/// id. Pixels with no candidate keep label -1. dist2 receives the winning
/// squared distance.
struct SlicAssignArgs {
  std::span<const double> lab;  // H*W*3
  int height = 0;
  int width = 0;
  std::span<const SlicCenter> centers;
  double interval = 1.0;
  double compactness = 10.0;
};

inline double slic_distance2(const double* px, int r, int c,
                             const SlicCenter& k, double spatial_scale2) {
  const double dl = px[0] - k.l;
  const double da = px[1] - k.a;
  const double db = px[2] - k.b;
  const double dr = r - k.row;
  const double dc = c - k.col;
  return dl * dl + da * da + db * db + (dr * dr + dc * dc) * spatial_scale2;
}

// All-pairs shortest paths over the superpixel graph (Dijkstra per source).
// Entry (p, q) and (q, p) both hold the distance computed from min(p, q),
// so the matrix is exactly symmetric. Unreachable pairs are +inf.

// Background-weighted contrast:
//   ctr(p) = sum_{q != p} d_lab(p,q) * exp(-d_spa(p,q)^2 / (2 sigma^2)) * w_bg(q)
// with d_spa the centroid distance divided by the image diagonal.

namespace serial {
void slic_assign(const SlicAssignArgs& args, std::span<int> labels,
                 std::span<double> dist2);
Tensor3 conv2d_forward(const Tensor3& input, const ConvKernel& kernel);
ConvGrads conv2d_backward(const Tensor3& upstream, const Tensor3& input,
                          const ConvKernel& kernel);
std::vector<double> all_pairs_geodesic(const SuperpixelGraph& graph);
std::vector<double> background_contrast(const Segmentation& seg,
                                        std::span<const double> w_bg,
                                        double sigma_spa);
}  // namespace serial

namespace omp {
void slic_assign(const SlicAssignArgs& args, std::span<int> labels,
                 std::span<double> dist2);
Tensor3 conv2d_forward(const Tensor3& input, const ConvKernel& kernel);
ConvGrads conv2d_backward(const Tensor3& upstream, const Tensor3& input,
                          const ConvKernel& kernel);
std::vector<double> all_pairs_geodesic(const SuperpixelGraph& graph);
std::vector<double> background_contrast(const Segmentation& seg,
                                        std::span<const double> w_bg,
                                        double sigma_spa);
}  // namespace omp

}  // namespace salfuse::kernels
