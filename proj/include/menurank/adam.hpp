#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "menurank/tensor.hpp"

namespace menurank::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates, shape-matched to the parameters they track.
struct AdamState {
  std::vector<Tensor2> first_moment;
  std::vector<Tensor2> second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update applied in place. An empty state is
/// initialized to zero moments on first use. Throws DimensionError when the
/// parameter, gradient, and state shapes disagree, and ContractError when
/// lr <= 0.
void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
               AdamState& state, const AdamConfig& config);

}  // namespace menurank::nn
