#pragma once

#include <span>
#include <vector>

#include "salfuse/image.hpp"
#include "salfuse/saliency_map.hpp"
#include "salfuse/superpixel.hpp"

namespace salfuse {

struct RbdParams {
  int n_seg = 200;
  double sigma_clr = 10.0;   // Lab units
  double sigma_bnd = 1.0;
  double sigma_spa = 0.25;   // fraction of the image diagonal
  double mu = 0.1;           // smoothness floor
  SlicParams slic{};         // n_target is overridden by n_seg
};

/// Dense K x K matrix of geodesic distances, row-major.
struct DistanceMatrix {
  int n = 0;
  std::vector<double> d;

  double operator()(int p, int q) const noexcept {
    return d[static_cast<std::size_t>(p) * n + q];
  }
};

/// Shortest-path distances over the region adjacency graph. Throws
/// Errc::disconnected_graph if some pair is unreachable.
DistanceMatrix geodesic_distances(const SuperpixelGraph& graph);

struct ConnectivityStats {
  std::vector<double> len_bnd;
  std::vector<double> area;
  std::vector<double> bnd_con;
  std::vector<double> w_bg;
};

/// Soft area / boundary length / boundary connectivity per superpixel:
///   S(p,q)     = exp(-d_geo(p,q)^2 / (2 sigma_clr^2))
///   Area(p)    = sum_q S(p,q)
///   Len_bnd(p) = sum_{q on border} S(p,q)
///   BndCon(p)  = Len_bnd(p) / sqrt(Area(p))
///   w_bg(p)    = 1 - exp(-BndCon(p)^2 / (2 sigma_bnd^2))
ConnectivityStats connectivity_stats(const Segmentation& seg,
                                     const DistanceMatrix& dist,
                                     double sigma_clr, double sigma_bnd = 1.0);

/// Coefficients of the quadratic refinement energy
///   E(s) = sum_p w_bg s_p^2 + sum_p w_fg (s_p - 1)^2
///        + sum_{(p,q)} w_pq (s_p - s_q)^2.
struct RefinementProblem {
  std::vector<double> w_bg;
  std::vector<double> w_fg;
  std::vector<Edge> smooth;  // weight field holds w_pq
};

/// Minimizes E with a dense Cholesky solve plus iterative refinement.
std::vector<double> solve_refinement(const RefinementProblem& problem);

/// Gradient of E at s.
std::vector<double> refinement_gradient(const RefinementProblem& problem,
                                        std::span<const double> s);

/// Intermediate quantities of one rbd_map run, for tests and diagnostics.
struct RbdDetail {
  Segmentation seg;
  ConnectivityStats stats;
  std::vector<double> contrast;
  RefinementProblem problem;
  std::vector<double> region_saliency;
};

RefinementProblem build_refinement(const SuperpixelGraph& graph,
                                   const ConnectivityStats& stats,
                                   std::span<const double> contrast,
                                   const RbdParams& params);

/// Boundary-connectivity saliency of an SRGB image at its native size.
SaliencyMap rbd_map(const Image& srgb, const RbdParams& params = {},
                    RbdDetail* detail = nullptr);

}  // namespace salfuse
