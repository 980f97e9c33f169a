// OpenMP kernels. Parallel loops are arranged so that each output element
// is owned by one iteration and accumulated in the same order as the
// serial reference.

#include "kernels_detail.hpp"

namespace salfuse::kernels::omp {

void slic_assign(const SlicAssignArgs& args, std::span<int> labels,
                 std::span<double> dist2) {
  const int h = args.height, w = args.width;
  const double s2 =
      args.compactness * args.compactness / (args.interval * args.interval);
  const int k = static_cast<int>(args.centers.size());
  std::vector<detail::Window> windows(k);
  for (int j = 0; j < k; ++j) {
    windows[j] = detail::slic_window(args.centers[j], args.interval, h, w);
  }

#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    const std::size_t row = static_cast<std::size_t>(r) * w;
    for (int c = 0; c < w; ++c) {
      const std::size_t p = row + c;
      dist2[p] = labels[p] >= 0
                     ? slic_distance2(&args.lab[3 * p], r, c,
                                      args.centers[labels[p]], s2)
                     : std::numeric_limits<double>::infinity();
    }
    for (int j = 0; j < k; ++j) {
      const auto& win = windows[j];
      if (r < win.r0 || r > win.r1) continue;
      for (int c = win.c0; c <= win.c1; ++c) {
        const std::size_t p = row + c;
        const double d = slic_distance2(&args.lab[3 * p], r, c, args.centers[j], s2);
        if (d < dist2[p] || (d == dist2[p] && j < labels[p])) {
          dist2[p] = d;
          labels[p] = j;
        }
      }
    }
  }
}

Tensor3 conv2d_forward(const Tensor3& in, const ConvKernel& k) {
  Tensor3 out(in.h, in.w, k.cout);
  const int ph = k.kh / 2, pw = k.kw / 2;
#pragma omp parallel
  {
    std::vector<double> acc(k.cout);
#pragma omp for schedule(static)
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
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor3& up, const Tensor3& in,
                          const ConvKernel& k) {
  ConvGrads g{Tensor3(in.h, in.w, in.c), ConvKernel(k.kh, k.kw, k.cin, k.cout)};
  const int ph = k.kh / 2, pw = k.kw / 2;

#pragma omp parallel
  {
    std::vector<double> acc(k.cin);
#pragma omp for schedule(static)
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
  }

  // Each kernel tap owns its (cin x cout) block of the weight gradient.
#pragma omp parallel for collapse(2) schedule(static)
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
#pragma omp parallel for schedule(dynamic, 4)
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
#pragma omp parallel for schedule(static)
  for (int p = 0; p < seg.num_superpixels; ++p) {
    ctr[p] = detail::contrast_at(seg, w_bg, inv_two_sigma2, inv_diag, p);
  }
  return ctr;
}

}  // namespace salfuse::kernels::omp
