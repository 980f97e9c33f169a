#include "salfuse/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "salfuse/error.hpp"
#include "salfuse/kernels.hpp"

namespace salfuse {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, -1, 0, 1};

// Squared color gradient used to nudge seeds off edges:
// |I(r,c+1) - I(r,c-1)|^2 + |I(r+1,c) - I(r-1,c)|^2 with clamped borders.
std::vector<double> gradient_map(const Image& lab) {
  const int h = lab.height();
  const int w = lab.width();
  std::vector<double> g(lab.pixel_count());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int cl = std::max(c - 1, 0), cr = std::min(c + 1, w - 1);
      const int ru = std::max(r - 1, 0), rd = std::min(r + 1, h - 1);
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double dx = lab.at(r, cr, k) - lab.at(r, cl, k);
        const double dy = lab.at(rd, c, k) - lab.at(ru, c, k);
        acc += dx * dx + dy * dy;
      }
      g[static_cast<std::size_t>(r) * w + c] = acc;
    }
  }
  return g;
}

std::vector<kernels::SlicCenter> place_seeds(const Image& lab, int n_target) {
  const int h = lab.height();
  const int w = lab.width();
  const int ny = std::clamp(
      static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_target) * h / w))),
      1, h);
  const int nx = std::clamp(
      static_cast<int>(std::lround(static_cast<double>(n_target) / ny)), 1, w);
  const auto grad = gradient_map(lab);
  auto g = [&](int r, int c) { return grad[static_cast<std::size_t>(r) * w + c]; };

  std::vector<kernels::SlicCenter> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      // Seeds sit on pixel-center-aligned grid positions, which may be
      // fractional; they only snap to a pixel when a neighbour has a
      // strictly lower gradient.
      double row = (i + 0.5) * h / ny - 0.5;
      double col = (j + 0.5) * w / nx - 0.5;
      const int rr = std::clamp(static_cast<int>(std::lround(row)), 0, h - 1);
      const int cc = std::clamp(static_cast<int>(std::lround(col)), 0, w - 1);
      double best = g(rr, cc);
      int br = -1, bc = -1;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = rr + dr, c = cc + dc;
          if (r < 0 || r >= h || c < 0 || c >= w) continue;
          if (g(r, c) < best) {
            best = g(r, c);
            br = r;
            bc = c;
          }
        }
      }
      if (br >= 0) {
        row = br;
        col = bc;
      }
      const int pr = std::clamp(static_cast<int>(std::lround(row)), 0, h - 1);
      const int pc = std::clamp(static_cast<int>(std::lround(col)), 0, w - 1);
      centers.push_back({lab.at(pr, pc, 0), lab.at(pr, pc, 1), lab.at(pr, pc, 2),
                         row, col});
    }
  }
  return centers;
}

double total_energy(const Image& lab, std::span<const int> labels,
                    std::span<const kernels::SlicCenter> centers,
                    double spatial_scale2) {
  const int w = lab.width();
  const auto data = lab.data();
  double e = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int r = static_cast<int>(p / w);
    const int c = static_cast<int>(p % w);
    e += kernels::slic_distance2(&data[3 * p], r, c, centers[labels[p]],
                                 spatial_scale2);
  }
  return e;
}

}  // namespace

double slic_grid_interval(int height, int width, int n_target) {
  return std::sqrt(static_cast<double>(height) * width / n_target);
}

Segmentation slic(const Image& lab, const SlicParams& params, SlicTrace* trace) {
  if (lab.colorspace() != ColorSpace::lab) {
    throw Error(Errc::wrong_colorspace, "slic expects a LAB image");
  }
  if (params.n_target < 1 || params.iters < 1 || !(params.compactness > 0.0)) {
    throw Error(Errc::invalid_argument,
                "slic needs n_target >= 1, iters >= 1, compactness > 0");
  }
  const int h = lab.height();
  const int w = lab.width();
  const std::size_t n = lab.pixel_count();
  if (static_cast<std::size_t>(params.n_target) > n) {
    throw Error(Errc::invalid_argument, "n_target exceeds pixel count");
  }

  const double interval = slic_grid_interval(h, w, params.n_target);
  const double spatial_scale2 =
      params.compactness * params.compactness / (interval * interval);
  auto centers = place_seeds(lab, params.n_target);
  const int k = static_cast<int>(centers.size());

  std::vector<int> labels(n, -1);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::vector<double> energy;
  const auto data = lab.data();

  for (int it = 0; it < params.iters; ++it) {
    kernels::SlicAssignArgs args{data, h, w, centers, interval, params.compactness};
    kernels::omp::slic_assign(args, labels, dist2);

    // Pixels outside every window (only possible before the first update
    // on strongly anisotropic grids) fall back to an exhaustive search.
    for (std::size_t p = 0; p < n; ++p) {
      if (labels[p] >= 0) continue;
      const int r = static_cast<int>(p / w);
      const int c = static_cast<int>(p % w);
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = kernels::slic_distance2(&data[3 * p], r, c, centers[j],
                                                 spatial_scale2);
        if (d < best) {
          best = d;
          labels[p] = j;
        }
      }
      dist2[p] = best;
    }

    std::vector<std::array<double, 5>> sums(k, {0, 0, 0, 0, 0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      auto& s = sums[labels[p]];
      s[0] += data[3 * p];
      s[1] += data[3 * p + 1];
      s[2] += data[3 * p + 2];
      s[3] += static_cast<double>(p / w);
      s[4] += static_cast<double>(p % w);
      ++counts[labels[p]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // empty clusters stay put
      const double inv = 1.0 / static_cast<double>(counts[j]);
      centers[j] = {sums[j][0] * inv, sums[j][1] * inv, sums[j][2] * inv,
                    sums[j][3] * inv, sums[j][4] * inv};
    }
    energy.push_back(total_energy(lab, labels, centers, spatial_scale2));
  }

  if (trace != nullptr) {
    trace->seeds = k;
    trace->grid_interval = interval;
    trace->energy = energy;
    trace->raw_labels = labels;
  }

  const auto min_size = static_cast<std::size_t>(interval * interval / 4.0);
  const int count = enforce_connectivity(labels, h, w, min_size);
  return make_segmentation(std::move(labels), h, w, count, lab);
}

int enforce_connectivity(std::vector<int>& labels, int height, int width,
                         std::size_t min_size) {
  const std::size_t n = labels.size();
  std::vector<int> comp(n, -1);
  std::vector<std::size_t> size;
  std::vector<std::size_t> stack;

  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const int id = static_cast<int>(size.size());
    const int lbl = labels[start];
    std::size_t count = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const int r = static_cast<int>(p / width);
      const int c = static_cast<int>(p % width);
      for (int d = 0; d < 4; ++d) {
        const int rr = r + kDr[d], cc = c + kDc[d];
        if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
        const std::size_t q = static_cast<std::size_t>(rr) * width + cc;
        if (comp[q] < 0 && labels[q] == lbl) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
    size.push_back(count);
  }

  const int ncomp = static_cast<int>(size.size());
  std::vector<std::map<int, std::size_t>> border(ncomp);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * width + c;
      if (c + 1 < width && comp[p] != comp[p + 1]) {
        ++border[comp[p]][comp[p + 1]];
        ++border[comp[p + 1]][comp[p]];
      }
      if (r + 1 < height && comp[p] != comp[p + width]) {
        ++border[comp[p]][comp[p + width]];
        ++border[comp[p + width]][comp[p]];
      }
    }
  }

  std::vector<int> parent(ncomp);
  for (int i = 0; i < ncomp; ++i) parent[i] = i;
  std::set<std::pair<std::size_t, int>> small;
  for (int i = 0; i < ncomp; ++i) {
    if (size[i] < min_size) small.insert({size[i], i});
  }

  int alive = ncomp;
  while (!small.empty() && alive > 1) {
    const int a = small.begin()->second;
    small.erase(small.begin());
    int target = -1;
    std::size_t longest = 0;
    for (const auto& [nb, len] : border[a]) {  // ascending id: ties keep the smaller
      if (len > longest) {
        longest = len;
        target = nb;
      }
    }
    if (target < 0) continue;  // isolated (cannot happen on a connected raster)

    for (const auto& [nb, len] : border[a]) {
      border[nb].erase(a);
      if (nb == target) continue;
      border[target][nb] += len;
      border[nb][target] += len;
    }
    border[a].clear();
    parent[a] = target;

    if (size[target] < min_size) small.erase({size[target], target});
    size[target] += size[a];
    if (size[target] < min_size) small.insert({size[target], target});
    --alive;
  }

  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  std::vector<int> dense(ncomp, -1);
  int next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const int root = find(comp[p]);
    if (dense[root] < 0) dense[root] = next++;
    labels[p] = dense[root];
  }
  return next;
}

void compute_segment_stats(Segmentation& seg, const Image& lab) {
  const int k = seg.num_superpixels;
  seg.mean_lab.assign(k, {0.0, 0.0, 0.0});
  seg.centroid.assign(k, {0.0, 0.0});
  seg.area_px.assign(k, 0);
  seg.touches_boundary.assign(k, false);
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) {
      const int l = seg.label(r, c);
      const double count = static_cast<double>(++seg.area_px[l]);
      auto& m = seg.mean_lab[l];
      for (int ch = 0; ch < 3; ++ch) m[ch] += (lab.at(r, c, ch) - m[ch]) / count;
      auto& cen = seg.centroid[l];
      cen[0] += (r - cen[0]) / count;
      cen[1] += (c - cen[1]) / count;
      if (r == 0 || c == 0 || r == seg.height - 1 || c == seg.width - 1) {
        seg.touches_boundary[l] = true;
      }
    }
  }
}

Segmentation make_segmentation(std::vector<int> labels, int height, int width,
                               int num_superpixels, const Image& lab) {
  if (labels.size() != static_cast<std::size_t>(height) * width ||
      lab.height() != height || lab.width() != width || lab.channels() != 3) {
    throw Error(Errc::shape_mismatch, "label raster does not match the image");
  }
  std::vector<bool> used(num_superpixels, false);
  for (int l : labels) {
    if (l < 0 || l >= num_superpixels) {
      throw Error(Errc::invalid_argument, "label outside [0, K)");
    }
    used[l] = true;
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw Error(Errc::invalid_argument, "every label in [0, K) must be used");
  }
  Segmentation seg;
  seg.height = height;
  seg.width = width;
  seg.num_superpixels = num_superpixels;
  seg.labels = std::move(labels);
  compute_segment_stats(seg, lab);
  return seg;
}

SuperpixelGraph build_graph(const Segmentation& seg) {
  std::set<std::pair<int, int>> pairs;
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) {
      const int a = seg.label(r, c);
      if (c + 1 < seg.width) {
        const int b = seg.label(r, c + 1);
        if (a != b) pairs.insert(std::minmax(a, b));
      }
      if (r + 1 < seg.height) {
        const int b = seg.label(r + 1, c);
        if (a != b) pairs.insert(std::minmax(a, b));
      }
    }
  }
  SuperpixelGraph g;
  g.num_nodes = seg.num_superpixels;
  g.adjacency.resize(g.num_nodes);
  for (const auto& [a, b] : pairs) {
    const auto& ma = seg.mean_lab[a];
    const auto& mb = seg.mean_lab[b];
    const double d0 = ma[0] - mb[0], d1 = ma[1] - mb[1], d2 = ma[2] - mb[2];
    g.adjacency[a].push_back(static_cast<int>(g.edges.size()));
    g.adjacency[b].push_back(static_cast<int>(g.edges.size()));
    g.edges.push_back({a, b, std::sqrt(d0 * d0 + d1 * d1 + d2 * d2)});
  }
  return g;
}

std::vector<int> boundary_superpixels(const Segmentation& seg) {
  std::vector<int> ids;
  for (int i = 0; i < seg.num_superpixels; ++i) {
    if (seg.touches_boundary[i]) ids.push_back(i);
  }
  return ids;
}

}  // namespace salfuse
