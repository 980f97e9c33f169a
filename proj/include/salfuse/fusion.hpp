#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salfuse/saliency_map.hpp"
#include "salfuse/tensor.hpp"

namespace salfuse {

/// Shape of the two-layer fusion network: concat(deep, rbd) -> conv k1
/// (2 -> hidden) -> ReLU -> conv k2 (hidden -> 2) -> softmax.
struct FusionArch {
  std::uint32_t k1 = 3;
  std::uint32_t hidden = 8;
  std::uint32_t k2 = 3;

  friend bool operator==(const FusionArch&, const FusionArch&) = default;
};

struct FusionParams {
  FusionArch arch;
  ConvKernel conv1;  // k1 x k1 x 2 x hidden
  ConvKernel conv2;  // k2 x k2 x hidden x 2

  /// Zero-initialized parameters for `arch`. Throws on even kernel sizes
  /// or zero channels.
  static FusionParams zeros(const FusionArch& arch);

  friend bool operator==(const FusionParams&, const FusionParams&) = default;
};

/// Cross-correlation with zero "same" padding plus bias.
Tensor3 conv2d_forward(const Tensor3& input, const ConvKernel& kernel);
ConvGrads conv2d_backward(const Tensor3& upstream, const Tensor3& input,
                          const ConvKernel& kernel);

struct SoftmaxLoss {
  double loss = 0.0;
  Tensor3 grad;  // dL/dlogits
};

/// Mean per-pixel two-class cross-entropy. Channel 1 is "salient".
/// target must hold only 0 and 1.
SoftmaxLoss softmax_xent(const Tensor3& logits, std::span<const double> target);

/// Per-pixel two-class softmax; returns the salient-channel probability.
std::vector<double> softmax_foreground(const Tensor3& logits);

/// Stacks deep and rbd maps as channels 0 and 1.
Tensor3 concat_maps(const SaliencyMap& deep, const SaliencyMap& rbd);

struct FusionActivations {
  Tensor3 input;
  Tensor3 hidden_pre;
  Tensor3 hidden;
  Tensor3 logits;
};

FusionActivations fusion_forward_pass(const FusionParams& params,
                                      const Tensor3& input);

SaliencyMap fuse_forward(const FusionParams& params, const SaliencyMap& deep,
                         const SaliencyMap& rbd);

struct FusionGrads {
  ConvKernel conv1;
  ConvKernel conv2;
};

/// Loss and parameter gradients for one sample.
double fusion_loss_and_grads(const FusionParams& params, const Tensor3& input,
                             std::span<const double> target,
                             FusionGrads* grads);

struct TrainSample {
  SaliencyMap deep;
  SaliencyMap rbd;
  SaliencyMap gt;  // binary
};

struct TrainConfig {
  double base_lr = 1e-4;
  double momentum = 0.9;
  double power = 0.9;
  int max_iter = 1000;
  int batch = 1;
  std::uint64_t seed = 1;
  FusionArch arch{};
};

/// base_lr * (1 - iter / max_iter)^power
double poly_lr(const TrainConfig& cfg, int iter);

/// Xavier-uniform kernels (bound sqrt(6 / (fan_in + fan_out))), zero biases.
FusionParams xavier_init(const FusionArch& arch, std::uint64_t seed);

struct TrainResult {
  FusionParams params;
  std::vector<double> loss_trace;  // mean batch loss per iteration
};

/// SGD with momentum and poly decay over shuffled epochs. Per-sample
/// gradients in a batch are computed concurrently and summed in batch order.
TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& cfg);

/// "SFN1" model file. Layout (all little-endian):
///   4 bytes  magic "SFN1"
///   u32 k1, u32 hidden, u32 k2
///   f64 conv1 weights (k1*k1*2*hidden, order kh,kw,cin,cout)
///   f64 conv1 bias    (hidden)
///   f64 conv2 weights (k2*k2*hidden*2, same order)
///   f64 conv2 bias    (2)
void save_model(const FusionParams& params, const std::filesystem::path& path);
FusionParams load_model(const std::filesystem::path& path);

}  // namespace salfuse
