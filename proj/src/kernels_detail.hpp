#pragma once

// Helpers shared verbatim by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "salfuse/kernels.hpp"

namespace salfuse::kernels {

namespace detail {

struct Window {
  int r0, r1, c0, c1;
};

inline Window slic_window(const SlicCenter& k, double interval, int h, int w) {
  return {std::max(0, static_cast<int>(std::ceil(k.row - interval))),
          std::min(h - 1, static_cast<int>(std::floor(k.row + interval))),
          std::max(0, static_cast<int>(std::ceil(k.col - interval))),
          std::min(w - 1, static_cast<int>(std::floor(k.col + interval)))};
}

inline void geodesic_row(const SuperpixelGraph& graph, int source, double* row) {
  const int n = graph.num_nodes;
  std::fill(row, row + n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(n, false);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  row[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    for (int ei : graph.adjacency[u]) {
      const Edge& e = graph.edges[ei];
      const int v = e.a == u ? e.b : e.a;
      const double nd = d + e.weight;
      if (nd < row[v]) {
        row[v] = nd;
        heap.push({nd, v});
      }
    }
  }
}

inline void symmetrize(std::vector<double>& d, int n) {
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      d[static_cast<std::size_t>(q) * n + p] = d[static_cast<std::size_t>(p) * n + q];
    }
  }
}

inline double contrast_at(const Segmentation& seg, std::span<const double> w_bg,
                   double inv_two_sigma2, double inv_diag, int p) {
  const auto& mp = seg.mean_lab[p];
  const auto& cp = seg.centroid[p];
  double acc = 0.0;
  for (int q = 0; q < seg.num_superpixels; ++q) {
    if (q == p) continue;
    const auto& mq = seg.mean_lab[q];
    const auto& cq = seg.centroid[q];
    const double d0 = mp[0] - mq[0], d1 = mp[1] - mq[1], d2 = mp[2] - mq[2];
    const double d_lab = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
    const double dr = (cp[0] - cq[0]) * inv_diag;
    const double dc = (cp[1] - cq[1]) * inv_diag;
    const double w_spa = std::exp(-(dr * dr + dc * dc) * inv_two_sigma2);
    acc += d_lab * w_spa * w_bg[q];
  }
  return acc;
}

}  // namespace detail

}  // namespace salfuse::kernels
