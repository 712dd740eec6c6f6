#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace specknet {

/// Adam with bias correction; epsilon is added after the square root.
template <class T>
class Adam {
 public:
  Adam(std::size_t n, double learning_rate, double beta1, double beta2, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(n, T(0)), v_(n, T(0)) {}

  void step(std::span<T> params, std::span<const T> grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    const T one_b1 = static_cast<T>(1.0 - beta1_), one_b2 = static_cast<T>(1.0 - beta2_);
    const T inv_bc1 = static_cast<T>(1.0 / bc1), inv_bc2 = static_cast<T>(1.0 / bc2);
    const T lr = static_cast<T>(lr_), eps = static_cast<T>(eps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const T g = grads[i];
      m_[i] = b1 * m_[i] + one_b1 * g;
      v_[i] = b2 * v_[i] + one_b2 * g * g;
      const T m_hat = m_[i] * inv_bc1;
      const T v_hat = v_[i] * inv_bc2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }

  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<T> m_, v_;
  long t_ = 0;
};

}  // namespace specknet
