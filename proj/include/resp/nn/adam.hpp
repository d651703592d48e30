#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resp/nn/tensor.hpp"

namespace resp::nn {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update from each tensor's grad. An empty state is
/// initialized to zeros on first use.
void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamConfig& config);

}  // namespace resp::nn
