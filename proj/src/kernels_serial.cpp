// Serial reference kernels. Keep the arithmetic in lockstep with
// kernels_omp.cpp; tests compare the two bit for bit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "kernels_detail.hpp"

namespace salfuse::kernels {


namespace serial {

void slic_assign(const SlicAssignArgs& args, std::span<int> labels,
                 std::span<double> dist2) {
  const int h = args.height, w = args.width;
  const double s2 =
      args.compactness * args.compactness / (args.interval * args.interval);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < n; ++p) {
    dist2[p] = labels[p] >= 0
                   ? slic_distance2(&args.lab[3 * p], static_cast<int>(p / w),
                                    static_cast<int>(p % w),
                                    args.centers[labels[p]], s2)
                   : std::numeric_limits<double>::infinity();
  }
  for (std::size_t k = 0; k < args.centers.size(); ++k) {
    const auto win = detail::slic_window(args.centers[k], args.interval, h, w);
    const int id = static_cast<int>(k);
    for (int r = win.r0; r <= win.r1; ++r) {
      for (int c = win.c0; c <= win.c1; ++c) {
        const std::size_t p = static_cast<std::size_t>(r) * w + c;
        const double d = slic_distance2(&args.lab[3 * p], r, c, args.centers[k], s2);
        if (d < dist2[p] || (d == dist2[p] && id < labels[p])) {
          dist2[p] = d;
          labels[p] = id;
        }
      }
    }
  }
}

Tensor3 conv2d_forward(const Tensor3& in, const ConvKernel& k) {
  Tensor3 out(in.h, in.w, k.cout);
  const int ph = k.kh / 2, pw = k.kw / 2;
  std::vector<double> acc(k.cout);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      std::copy(k.bias.begin(), k.bias.end(), acc.begin());
      for (int i = 0; i < k.kh; ++i) {
        const int yy = y + i - ph;
        if (yy < 0 || yy >= in.h) continue;
        for (int j = 0; j < k.kw; ++j) {
          const int xx = x + j - pw;
          if (xx < 0 || xx >= in.w) continue;
          for (int ci = 0; ci < k.cin; ++ci) {
            const double v = in.at(yy, xx, ci);
            const double* wrow = &k.weights[k.index(i, j, ci, 0)];
            for (int co = 0; co < k.cout; ++co) acc[co] += v * wrow[co];
          }
        }
      }
      std::copy(acc.begin(), acc.end(), out.pixel(y, x));
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor3& up, const Tensor3& in,
                          const ConvKernel& k) {
  ConvGrads g{Tensor3(in.h, in.w, in.c), ConvKernel(k.kh, k.kw, k.cin, k.cout)};
  const int ph = k.kh / 2, pw = k.kw / 2;

  std::vector<double> acc(k.cin);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int i = 0; i < k.kh; ++i) {
        const int yy = y - i + ph;
        if (yy < 0 || yy >= in.h) continue;
        for (int j = 0; j < k.kw; ++j) {
          const int xx = x - j + pw;
          if (xx < 0 || xx >= in.w) continue;
          for (int ci = 0; ci < k.cin; ++ci) {
            const double* wrow = &k.weights[k.index(i, j, ci, 0)];
            const double* urow = up.pixel(yy, xx);
            double s = 0.0;
            for (int co = 0; co < k.cout; ++co) s += urow[co] * wrow[co];
            acc[ci] += s;
          }
        }
      }
      std::copy(acc.begin(), acc.end(), g.input.pixel(y, x));
    }
  }

  for (int i = 0; i < k.kh; ++i) {
    for (int j = 0; j < k.kw; ++j) {
      double* gw = &g.kernel.weights[k.index(i, j, 0, 0)];
      for (int y = 0; y < in.h; ++y) {
        const int yy = y + i - ph;
        if (yy < 0 || yy >= in.h) continue;
        for (int x = 0; x < in.w; ++x) {
          const int xx = x + j - pw;
          if (xx < 0 || xx >= in.w) continue;
          const double* urow = up.pixel(y, x);
          for (int ci = 0; ci < k.cin; ++ci) {
            const double v = in.at(yy, xx, ci);
            for (int co = 0; co < k.cout; ++co) gw[ci * k.cout + co] += v * urow[co];
          }
        }
      }
    }
  }

  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      for (int co = 0; co < k.cout; ++co) g.kernel.bias[co] += up.at(y, x, co);
    }
  }
  return g;
}

std::vector<double> all_pairs_geodesic(const SuperpixelGraph& graph) {
  const int n = graph.num_nodes;
  std::vector<double> d(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < n; ++s) {
    detail::geodesic_row(graph, s, &d[static_cast<std::size_t>(s) * n]);
  }
  detail::symmetrize(d, n);
  return d;
}

std::vector<double> background_contrast(const Segmentation& seg,
                                        std::span<const double> w_bg,
                                        double sigma_spa) {
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma_spa * sigma_spa);
  const double inv_diag =
      1.0 / std::sqrt(static_cast<double>(seg.height) * seg.height +
                      static_cast<double>(seg.width) * seg.width);
  std::vector<double> ctr(seg.num_superpixels);
  for (int p = 0; p < seg.num_superpixels; ++p) {
    ctr[p] = detail::contrast_at(seg, w_bg, inv_two_sigma2, inv_diag, p);
  }
  return ctr;
}

}  // namespace serial
}  // namespace salfuse::kernels
