#include "salfuse/rbd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "salfuse/error.hpp"
#include "salfuse/kernels.hpp"

namespace salfuse {

DistanceMatrix geodesic_distances(const SuperpixelGraph& graph) {
  DistanceMatrix m{graph.num_nodes, kernels::omp::all_pairs_geodesic(graph)};
  for (double v : m.d) {
    if (!std::isfinite(v)) {
      throw Error(Errc::disconnected_graph,
                  "superpixel graph is disconnected (segmentation bug)");
    }
  }
  return m;
}

ConnectivityStats connectivity_stats(const Segmentation& seg,
                                     const DistanceMatrix& dist,
                                     double sigma_clr, double sigma_bnd) {
  if (!(sigma_clr > 0.0) || !(sigma_bnd > 0.0)) {
    throw Error(Errc::invalid_argument, "sigma_clr and sigma_bnd must be positive");
  }
  const int k = seg.num_superpixels;
  if (dist.n != k) {
    throw Error(Errc::shape_mismatch, "distance matrix does not match segmentation");
  }
  const double inv_clr = 1.0 / (2.0 * sigma_clr * sigma_clr);
  const double inv_bnd = 1.0 / (2.0 * sigma_bnd * sigma_bnd);
  ConnectivityStats st;
  st.len_bnd.assign(k, 0.0);
  st.area.assign(k, 0.0);
  st.bnd_con.assign(k, 0.0);
  st.w_bg.assign(k, 0.0);
  for (int p = 0; p < k; ++p) {
    double area = 0.0, len = 0.0;
    for (int q = 0; q < k; ++q) {
      const double d = dist(p, q);
      const double s = std::exp(-d * d * inv_clr);
      area += s;
      if (seg.touches_boundary[q]) len += s;
    }
    st.area[p] = area;
    st.len_bnd[p] = len;
    st.bnd_con[p] = len / std::sqrt(area);
    st.w_bg[p] = 1.0 - std::exp(-st.bnd_con[p] * st.bnd_con[p] * inv_bnd);
  }
  return st;
}

RefinementProblem build_refinement(const SuperpixelGraph& graph,
                                   const ConnectivityStats& stats,
                                   std::span<const double> contrast,
                                   const RbdParams& params) {
  RefinementProblem pr;
  pr.w_bg = stats.w_bg;
  pr.w_fg = minmax_normalize(contrast);
  const double inv_clr = 1.0 / (2.0 * params.sigma_clr * params.sigma_clr);
  pr.smooth = graph.edges;
  for (Edge& e : pr.smooth) {
    e.weight = std::exp(-e.weight * e.weight * inv_clr) + params.mu;
  }
  return pr;
}

namespace {

Eigen::MatrixXd system_matrix(const RefinementProblem& pr) {
  const auto n = static_cast<Eigen::Index>(pr.w_bg.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = pr.w_bg[i] + pr.w_fg[i];
  for (const Edge& e : pr.smooth) {
    a(e.a, e.a) += e.weight;
    a(e.b, e.b) += e.weight;
    a(e.a, e.b) -= e.weight;
    a(e.b, e.a) -= e.weight;
  }
  return a;
}

}  // namespace

std::vector<double> solve_refinement(const RefinementProblem& pr) {
  const std::size_t n = pr.w_bg.size();
  if (pr.w_fg.size() != n) {
    throw Error(Errc::shape_mismatch, "w_bg and w_fg lengths differ");
  }
  if (n == 0) return {};
  const Eigen::MatrixXd a = system_matrix(pr);
  const Eigen::VectorXd b =
      Eigen::Map<const Eigen::VectorXd>(pr.w_fg.data(), static_cast<Eigen::Index>(n));
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::invalid_argument,
                "refinement system is not positive definite (all weights zero?)");
  }
  Eigen::VectorXd s = llt.solve(b);
  for (int round = 0; round < 2; ++round) {
    const Eigen::VectorXd r = b - a * s;
    s += llt.solve(r);
  }
  return {s.data(), s.data() + n};
}

std::vector<double> refinement_gradient(const RefinementProblem& pr,
                                        std::span<const double> s) {
  std::vector<double> g(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    g[p] = 2.0 * pr.w_bg[p] * s[p] + 2.0 * pr.w_fg[p] * (s[p] - 1.0);
  }
  for (const Edge& e : pr.smooth) {
    const double d = 2.0 * e.weight * (s[e.a] - s[e.b]);
    g[e.a] += d;
    g[e.b] -= d;
  }
  return g;
}

SaliencyMap rbd_map(const Image& input, const RbdParams& params,
                    RbdDetail* detail) {
  Image srgb = input;
  if (input.colorspace() == ColorSpace::gray) {
    srgb = Image(input.height(), input.width(), 3, ColorSpace::srgb);
    for (std::size_t p = 0; p < input.pixel_count(); ++p) {
      for (int ch = 0; ch < 3; ++ch) srgb.data()[3 * p + ch] = input.data()[p];
    }
  } else if (input.colorspace() != ColorSpace::srgb) {
    throw Error(Errc::wrong_colorspace, "rbd_map expects an SRGB or GRAY image");
  }

  SlicParams sp = params.slic;
  sp.n_target = params.n_seg;
  Segmentation seg = slic(rgb_to_lab(srgb), sp);
  const SuperpixelGraph graph = build_graph(seg);
  const DistanceMatrix dist = geodesic_distances(graph);
  ConnectivityStats stats =
      connectivity_stats(seg, dist, params.sigma_clr, params.sigma_bnd);
  std::vector<double> contrast =
      kernels::omp::background_contrast(seg, stats.w_bg, params.sigma_spa);
  RefinementProblem problem = build_refinement(graph, stats, contrast, params);
  std::vector<double> region = solve_refinement(problem);

  std::vector<double> pixels(seg.labels.size());
  for (std::size_t p = 0; p < pixels.size(); ++p) pixels[p] = region[seg.labels[p]];
  SaliencyMap out(seg.height, seg.width, Provenance::rbd, minmax_normalize(pixels));

  if (detail != nullptr) {
    detail->seg = std::move(seg);
    detail->stats = std::move(stats);
    detail->contrast = std::move(contrast);
    detail->problem = std::move(problem);
    detail->region_saliency = std::move(region);
  }
  return out;
}

}  // namespace salfuse
