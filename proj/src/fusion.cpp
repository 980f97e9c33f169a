#include "salfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <string>

#include "salfuse/error.hpp"
#include "salfuse/kernels.hpp"

namespace salfuse {

namespace {

void check_kernel(const ConvKernel& k) {
  if (k.kh <= 0 || k.kw <= 0 || k.kh % 2 == 0 || k.kw % 2 == 0) {
    throw Error(Errc::invalid_argument, "kernel spatial size must be odd");
  }
  if (k.cin <= 0 || k.cout <= 0 ||
      k.weights.size() != static_cast<std::size_t>(k.kh) * k.kw * k.cin * k.cout ||
      k.bias.size() != static_cast<std::size_t>(k.cout)) {
    throw Error(Errc::shape_mismatch, "kernel storage does not match its shape");
  }
}

void check_conv_input(const Tensor3& in, const ConvKernel& k) {
  check_kernel(k);
  if (in.c != k.cin || in.h <= 0 || in.w <= 0 ||
      in.data.size() != static_cast<std::size_t>(in.h) * in.w * in.c) {
    throw Error(Errc::shape_mismatch,
                "conv input has " + std::to_string(in.c) + " channels, kernel expects " +
                    std::to_string(k.cin));
  }
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void xavier_fill(ConvKernel& k, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(k.kh) * k.kw * k.cin;
  const double fan_out = static_cast<double>(k.kh) * k.kw * k.cout;
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : k.weights) w = (2.0 * unit_uniform(rng) - 1.0) * bound;
  std::fill(k.bias.begin(), k.bias.end(), 0.0);
}

void add_scaled(ConvKernel& dst, const ConvKernel& src, double scale) {
  for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights[i] += scale * src.weights[i];
  for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += scale * src.bias[i];
}

void momentum_step(ConvKernel& param, ConvKernel& velocity, const ConvKernel& grad,
                   double lr, double momentum) {
  for (std::size_t i = 0; i < param.weights.size(); ++i) {
    velocity.weights[i] = momentum * velocity.weights[i] + lr * grad.weights[i];
    param.weights[i] -= velocity.weights[i];
  }
  for (std::size_t i = 0; i < param.bias.size(); ++i) {
    velocity.bias[i] = momentum * velocity.bias[i] + lr * grad.bias[i];
    param.bias[i] -= velocity.bias[i];
  }
}

}  // namespace

FusionParams FusionParams::zeros(const FusionArch& arch) {
  if (arch.k1 % 2 == 0 || arch.k2 % 2 == 0 || arch.hidden == 0) {
    throw Error(Errc::invalid_argument,
                "fusion kernels must have odd size and hidden channels > 0");
  }
  FusionParams p;
  p.arch = arch;
  p.conv1 = ConvKernel(static_cast<int>(arch.k1), static_cast<int>(arch.k1), 2,
                       static_cast<int>(arch.hidden));
  p.conv2 = ConvKernel(static_cast<int>(arch.k2), static_cast<int>(arch.k2),
                       static_cast<int>(arch.hidden), 2);
  return p;
}

Tensor3 conv2d_forward(const Tensor3& input, const ConvKernel& kernel) {
  check_conv_input(input, kernel);
  return kernels::omp::conv2d_forward(input, kernel);
}

ConvGrads conv2d_backward(const Tensor3& upstream, const Tensor3& input,
                          const ConvKernel& kernel) {
  check_conv_input(input, kernel);
  if (upstream.h != input.h || upstream.w != input.w || upstream.c != kernel.cout) {
    throw Error(Errc::shape_mismatch, "upstream gradient does not match conv output");
  }
  return kernels::omp::conv2d_backward(upstream, input, kernel);
}

SoftmaxLoss softmax_xent(const Tensor3& logits, std::span<const double> target) {
  if (logits.c != 2) {
    throw Error(Errc::shape_mismatch, "softmax_xent expects two logit channels");
  }
  const std::size_t n = static_cast<std::size_t>(logits.h) * logits.w;
  if (target.size() != n) {
    throw Error(Errc::shape_mismatch, "target size does not match logits");
  }
  SoftmaxLoss out{0.0, Tensor3(logits.h, logits.w, 2)};
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double t = target[p];
    if (t != 0.0 && t != 1.0) {
      throw Error(Errc::invalid_argument, "softmax_xent target must be binary");
    }
    const double z0 = logits.data[2 * p];
    const double z1 = logits.data[2 * p + 1];
    const double zmax = std::max(z0, z1);
    const double lse = zmax + std::log(std::exp(z0 - zmax) + std::exp(z1 - zmax));
    const int cls = t == 1.0 ? 1 : 0;
    total += lse - (cls == 1 ? z1 : z0);
    const double p0 = std::exp(z0 - lse);
    const double p1 = std::exp(z1 - lse);
    out.grad.data[2 * p] = (p0 - (cls == 0 ? 1.0 : 0.0)) * inv_n;
    out.grad.data[2 * p + 1] = (p1 - (cls == 1 ? 1.0 : 0.0)) * inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

std::vector<double> softmax_foreground(const Tensor3& logits) {
  if (logits.c != 2) {
    throw Error(Errc::shape_mismatch, "softmax_foreground expects two channels");
  }
  const std::size_t n = static_cast<std::size_t>(logits.h) * logits.w;
  std::vector<double> fg(n);
  for (std::size_t p = 0; p < n; ++p) {
    fg[p] = 1.0 / (1.0 + std::exp(logits.data[2 * p] - logits.data[2 * p + 1]));
  }
  return fg;
}

Tensor3 concat_maps(const SaliencyMap& deep, const SaliencyMap& rbd) {
  if (deep.height() != rbd.height() || deep.width() != rbd.width()) {
    throw Error(Errc::shape_mismatch,
                "deep and RBD maps differ in size; resize both to the work size");
  }
  Tensor3 t(deep.height(), deep.width(), 2);
  for (std::size_t p = 0; p < deep.size(); ++p) {
    t.data[2 * p] = deep[p];
    t.data[2 * p + 1] = rbd[p];
  }
  return t;
}

FusionActivations fusion_forward_pass(const FusionParams& params,
                                      const Tensor3& input) {
  FusionActivations a;
  a.input = input;
  a.hidden_pre = conv2d_forward(input, params.conv1);
  a.hidden = a.hidden_pre;
  for (double& v : a.hidden.data) v = std::max(v, 0.0);
  a.logits = conv2d_forward(a.hidden, params.conv2);
  return a;
}

SaliencyMap fuse_forward(const FusionParams& params, const SaliencyMap& deep,
                         const SaliencyMap& rbd) {
  const auto act = fusion_forward_pass(params, concat_maps(deep, rbd));
  return SaliencyMap(deep.height(), deep.width(), Provenance::fused,
                     softmax_foreground(act.logits));
}

double fusion_loss_and_grads(const FusionParams& params, const Tensor3& input,
                             std::span<const double> target, FusionGrads* grads) {
  const auto act = fusion_forward_pass(params, input);
  auto xent = softmax_xent(act.logits, target);
  if (grads != nullptr) {
    ConvGrads g2 = conv2d_backward(xent.grad, act.hidden, params.conv2);
    for (std::size_t i = 0; i < g2.input.data.size(); ++i) {
      if (act.hidden_pre.data[i] <= 0.0) g2.input.data[i] = 0.0;
    }
    ConvGrads g1 = conv2d_backward(g2.input, act.input, params.conv1);
    grads->conv1 = std::move(g1.kernel);
    grads->conv2 = std::move(g2.kernel);
  }
  return xent.loss;
}

double poly_lr(const TrainConfig& cfg, int iter) {
  if (iter >= cfg.max_iter) return 0.0;
  const double frac = 1.0 - static_cast<double>(iter) / cfg.max_iter;
  return cfg.base_lr * std::pow(frac, cfg.power);
}

FusionParams xavier_init(const FusionArch& arch, std::uint64_t seed) {
  FusionParams p = FusionParams::zeros(arch);
  std::mt19937_64 rng(seed);
  xavier_fill(p.conv1, rng);
  xavier_fill(p.conv2, rng);
  return p;
}

TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& cfg) {
  if (dataset.empty()) {
    throw Error(Errc::empty_dataset, "fusion training needs at least one sample");
  }
  if (!(cfg.base_lr > 0.0) || !(cfg.momentum >= 0.0 && cfg.momentum < 1.0) ||
      !(cfg.power > 0.0) || cfg.max_iter < 1 || cfg.batch < 1) {
    throw Error(Errc::invalid_argument, "invalid training configuration");
  }
  const int h = dataset.front().gt.height();
  const int w = dataset.front().gt.width();
  std::vector<Tensor3> inputs;
  std::vector<std::vector<double>> targets;
  for (const auto& s : dataset) {
    if (s.gt.height() != h || s.gt.width() != w || s.deep.height() != h ||
        s.deep.width() != w || s.rbd.height() != h || s.rbd.width() != w) {
      throw Error(Errc::shape_mismatch, "all training triples must share one size");
    }
    inputs.push_back(concat_maps(s.deep, s.rbd));
    targets.emplace_back(s.gt.values().begin(), s.gt.values().end());
  }

  TrainResult result{xavier_init(cfg.arch, cfg.seed), {}};
  FusionParams& params = result.params;
  FusionParams velocity = FusionParams::zeros(cfg.arch);

  std::mt19937_64 order_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<int> order(dataset.size());
  std::size_t cursor = order.size();
  auto next_index = [&] {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(order_rng() % i);
        std::swap(order[i - 1], order[j]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  const int batch = cfg.batch;
  std::vector<int> picks(batch);
  std::vector<FusionGrads> sample_grads(batch);
  std::vector<double> sample_loss(batch);
  result.loss_trace.reserve(cfg.max_iter);

  for (int it = 0; it < cfg.max_iter; ++it) {
    for (int b = 0; b < batch; ++b) picks[b] = next_index();

    std::vector<std::exception_ptr> errors(batch);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
      try {
        sample_loss[b] = fusion_loss_and_grads(params, inputs[picks[b]],
                                               targets[picks[b]], &sample_grads[b]);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    FusionGrads total{ConvKernel(params.conv1.kh, params.conv1.kw, params.conv1.cin,
                                 params.conv1.cout),
                      ConvKernel(params.conv2.kh, params.conv2.kw, params.conv2.cin,
                                 params.conv2.cout)};
    double loss = 0.0;
    const double inv_batch = 1.0 / batch;
    for (int b = 0; b < batch; ++b) {
      add_scaled(total.conv1, sample_grads[b].conv1, inv_batch);
      add_scaled(total.conv2, sample_grads[b].conv2, inv_batch);
      loss += sample_loss[b] * inv_batch;
    }
    if (!std::isfinite(loss)) {
      throw Error(Errc::non_finite_loss,
                  "training diverged at iteration " + std::to_string(it));
    }
    result.loss_trace.push_back(loss);

    const double lr = poly_lr(cfg, it);
    momentum_step(params.conv1, velocity.conv1, total.conv1, lr, cfg.momentum);
    momentum_step(params.conv2, velocity.conv2, total.conv2, lr, cfg.momentum);
  }
  return result;
}

}  // namespace salfuse
