#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "salfuse/image.hpp"

namespace salfuse {

struct SlicParams {
  int n_target = 200;
  double compactness = 10.0;
  int iters = 10;
};

/// Label raster plus per-segment statistics. Labels are dense in [0, K).
struct Segmentation {
  int height = 0;
  int width = 0;
  int num_superpixels = 0;
  std::vector<int> labels;                     // H*W, row-major
  std::vector<std::array<double, 3>> mean_lab;  // K
  std::vector<std::array<double, 2>> centroid;  // K, (row, col)
  std::vector<std::size_t> area_px;             // K
  std::vector<bool> touches_boundary;           // K

  int label(int r, int c) const noexcept {
    return labels[static_cast<std::size_t>(r) * width + c];
  }
};

/// Recomputes mean color, centroid, area and border flags from `labels`.
/// Means are accumulated incrementally so a constant-color segment reports
/// exactly that color. `num_superpixels` must already be set.
void compute_segment_stats(Segmentation& seg, const Image& lab);

/// Builds a Segmentation from an arbitrary label raster (labels in [0, K)).
Segmentation make_segmentation(std::vector<int> labels, int height, int width,
                               int num_superpixels, const Image& lab);

/// Optional diagnostics from the k-means phase.
struct SlicTrace {
  int seeds = 0;
  double grid_interval = 0.0;
  /// Sum over pixels of the squared joint distance to the assigned center,
  /// measured after each center update (one entry per iteration).
  std::vector<double> energy;
  /// Labels right before connectivity enforcement.
  std::vector<int> raw_labels;
};

/// Grid interval S = sqrt(H * W / n_target).
double slic_grid_interval(int height, int width, int n_target);

/// SLIC over-segmentation of a LAB image (fixed-compactness variant).
Segmentation slic(const Image& lab, const SlicParams& params,
                  SlicTrace* trace = nullptr);

/// Relabels every 4-connected component to its own id, then merges
/// components smaller than `min_size` into the neighbour sharing the
/// longest border (ties to the smallest id). Returns the new label count.
int enforce_connectivity(std::vector<int>& labels, int height, int width,
                         std::size_t min_size);

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  double weight = 0.0;
};

/// Region adjacency graph with Lab-distance edge weights.
struct SuperpixelGraph {
  int num_nodes = 0;
  std::vector<Edge> edges;                       // sorted by (a, b)
  std::vector<std::vector<int>> adjacency;       // edge indices per node
};

SuperpixelGraph build_graph(const Segmentation& seg);

std::vector<int> boundary_superpixels(const Segmentation& seg);

}  // namespace salfuse
