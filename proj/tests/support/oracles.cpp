#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "synthetic.hpp"

namespace salfuse::synth {

std::vector<int> component_counts(const Segmentation& seg) {
  const int h = seg.height, w = seg.width;
  std::vector<char> seen(static_cast<std::size_t>(h) * w, 0);
  std::vector<int> count(seg.num_superpixels, 0);
  std::vector<int> stack;
  for (int start = 0; start < h * w; ++start) {
    if (seen[start]) continue;
    const int lab = seg.labels[start];
    ++count[lab];
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int r = p / w, c = p % w;
      const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        const int i = q[0] * w + q[1];
        if (!seen[i] && seg.labels[i] == lab) {
          seen[i] = 1;
          stack.push_back(i);
        }
      }
    }
  }
  return count;
}

SuperpixelGraph make_graph(int n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
  SuperpixelGraph g;
  g.num_nodes = n;
  g.edges = std::move(edges);
  g.adjacency.assign(n, {});
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
    g.adjacency[g.edges[i].a].push_back(i);
    g.adjacency[g.edges[i].b].push_back(i);
  }
  return g;
}

SuperpixelGraph random_graph(int n, std::mt19937_64& rng) {
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  std::vector<Edge> edges;
  auto add = [&](int a, int b) {
    if (a == b || has[a][b]) return;
    has[a][b] = has[b][a] = true;
    // quarter-integer weights keep path sums exact in binary
    edges.push_back({std::min(a, b), std::max(a, b),
                     0.25 * static_cast<double>(1 + rng() % 80)});
  };
  for (int v = 1; v < n; ++v) add(v, static_cast<int>(rng() % v));
  const int extra = n > 1 ? static_cast<int>(rng() % (n * (n - 1) / 2)) : 0;
  for (int i = 0; i < extra; ++i) {
    add(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
  }
  return make_graph(n, std::move(edges));
}

std::vector<double> enumerate_paths(const SuperpixelGraph& g) {
  const int n = g.num_nodes;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, -1.0));
  for (const auto& e : g.edges) w[e.a][e.b] = w[e.b][e.a] = e.weight;
  std::vector<double> best(static_cast<std::size_t>(n) * n,
                           std::numeric_limits<double>::infinity());
  std::vector<bool> on_path(n, false);
  std::function<void(int, int, double)> walk = [&](int src, int v, double len) {
    auto& b = best[static_cast<std::size_t>(src) * n + v];
    b = std::min(b, len);
    on_path[v] = true;
    for (int u = 0; u < n; ++u) {
      if (w[v][u] >= 0.0 && !on_path[u]) walk(src, u, len + w[v][u]);
    }
    on_path[v] = false;
  };
  for (int s = 0; s < n; ++s) walk(s, s, 0.0);
  return best;
}

double brute_mae(const SaliencyMap& s, const SaliencyMap& gt) {
  double sum = 0.0;
  for (int r = 0; r < s.height(); ++r) {
    for (int c = 0; c < s.width(); ++c) sum += std::abs(s.at(r, c) - gt.at(r, c));
  }
  return sum / (static_cast<double>(s.height()) * s.width());
}

Confusion brute_confusion(const SaliencyMap& s, const SaliencyMap& gt, int t) {
  Confusion c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int byte = std::clamp(static_cast<int>(std::floor(s[i] * 255.0 + 0.5)), 0, 255);
    const bool det = byte >= t;
    const bool pos = gt[i] >= 0.5;
    c.tp += det && pos;
    c.fp += det && !pos;
    c.fn += !det && pos;
  }
  return c;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

double conv_objective(const Tensor3& x, const ConvKernel& k, const Tensor3& up) {
  const Tensor3 y = conv2d_forward(x, k);
  double s = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * up.data[i];
  return s;
}

}  // namespace

double conv_gradient_error(std::mt19937_64& rng, double eps) {
  const int h = 2 + static_cast<int>(rng() % 5), w = 2 + static_cast<int>(rng() % 5);
  const int cin = 1 + static_cast<int>(rng() % 3), cout = 1 + static_cast<int>(rng() % 3);
  const int ks = rng() % 2 == 0 ? 3 : 1;
  Tensor3 x(h, w, cin);
  for (double& v : x.data) v = uniform(rng, -1, 1);
  ConvKernel k(ks, ks, cin, cout);
  for (double& v : k.weights) v = uniform(rng, -1, 1);
  for (double& v : k.bias) v = uniform(rng, -1, 1);
  Tensor3 up(h, w, cout);
  for (double& v : up.data) v = uniform(rng, -1, 1);

  const ConvGrads g = conv2d_backward(up, x, k);
  double worst = 0.0;
  auto probe = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + eps;
    const double fp = conv_objective(x, k, up);
    slot = saved - eps;
    const double fm = conv_objective(x, k, up);
    slot = saved;
    worst = std::max(worst, relative_error(analytic, (fp - fm) / (2.0 * eps)));
  };
  for (std::size_t i = 0; i < x.data.size(); ++i) probe(x.data[i], g.input.data[i]);
  for (std::size_t i = 0; i < k.weights.size(); ++i) probe(k.weights[i], g.kernel.weights[i]);
  for (std::size_t i = 0; i < k.bias.size(); ++i) probe(k.bias[i], g.kernel.bias[i]);
  return worst;
}

double softmax_gradient_error(std::mt19937_64& rng, double eps) {
  const int h = 1 + static_cast<int>(rng() % 4), w = 1 + static_cast<int>(rng() % 4);
  Tensor3 logits(h, w, 2);
  for (double& v : logits.data) v = uniform(rng, -3, 3);
  std::vector<double> target(static_cast<std::size_t>(h) * w);
  for (double& t : target) t = static_cast<double>(rng() % 2);
  const SoftmaxLoss base = softmax_xent(logits, target);
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.data.size(); ++i) {
    const double saved = logits.data[i];
    logits.data[i] = saved + eps;
    const double fp = softmax_xent(logits, target).loss;
    logits.data[i] = saved - eps;
    const double fm = softmax_xent(logits, target).loss;
    logits.data[i] = saved;
    worst = std::max(worst, relative_error(base.grad.data[i], (fp - fm) / (2.0 * eps)));
  }
  return worst;
}

}  // namespace salfuse::synth
