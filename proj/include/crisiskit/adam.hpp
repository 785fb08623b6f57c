#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crisiskit/autograd.hpp"

namespace crisiskit::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list. Moment buffers are
/// allocated to match each parameter's shape.
template <class Real>
class Adam {
 public:
  Adam(std::vector<NodePtr<Real>> params, AdamConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.push_back(Tensor<Real>::zeros(p->value.shape));
      v_.push_back(Tensor<Real>::zeros(p->value.shape));
    }
  }

  void zero_grad() { num::zero_grad(params_); }

  /// One update from the gradients currently stored on the parameters.
  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
      auto& p = *params_[pi];
      p.ensure_grad();
      auto& m = m_[pi].data;
      auto& v = v_[pi].data;
      for (size_t i = 0; i < p.value.data.size(); ++i) {
        const double g = double(p.grad.data[i]);
        if (!std::isfinite(g)) throw std::runtime_error("diverged");
        const double mn = cfg_.beta1 * double(m[i]) + (1.0 - cfg_.beta1) * g;
        const double vn = cfg_.beta2 * double(v[i]) + (1.0 - cfg_.beta2) * g * g;
        m[i] = Real(mn);
        v[i] = Real(vn);
        const double mhat = mn / bc1;
        const double vhat = vn / bc2;
        p.value.data[i] -= Real(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  std::int64_t step_count() const { return t_; }
  const std::vector<NodePtr<Real>>& params() const { return params_; }

 private:
  std::vector<NodePtr<Real>> params_;
  AdamConfig cfg_;
  std::vector<Tensor<Real>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace crisiskit::num
