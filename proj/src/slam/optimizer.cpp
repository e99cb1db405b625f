// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/slam/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace sgslam {

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void Adam::resize(std::size_t n) {
  m_.resize(n, 0.0);
  v_.resize(n, 0.0);
}

void Adam::step(std::span<const double> grad, std::span<double> delta) {
  if (grad.size() != m_.size() || delta.size() != m_.size())
    throw std::invalid_argument("Adam step size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    delta[i] = -lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace sgslam
