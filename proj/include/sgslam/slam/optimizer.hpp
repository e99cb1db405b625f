// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgslam {

/// Adam over a flat parameter group. step() returns the update rather than
/// applying it, so manifold parameters can apply it through their retraction.
class Adam {
 public:
  explicit Adam(std::size_t n = 0, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  /// Grows the group; new coordinates start with zero moments.
  void resize(std::size_t n);
  std::size_t size() const { return m_.size(); }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  int steps() const { return t_; }

  /// delta[i] = -lr * m_hat / (sqrt(v_hat) + eps). A zero gradient history gives a zero update.
  void step(std::span<const double> grad, std::span<double> delta);

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace sgslam
