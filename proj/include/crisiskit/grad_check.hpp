#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "crisiskit/autograd.hpp"

namespace crisiskit::num {

/// Compares reverse-mode gradients against central finite differences for
/// every coordinate of every listed parameter. `build_loss` must rebuild
/// the graph from the parameters' current values each call. Runs in
/// whatever precision the parameters carry; use double for verification.
inline double grad_check(const std::vector<NodePtr<double>>& params,
                         const std::function<NodePtr<double>()>& build_loss,
                         double step = 1e-5) {
  zero_grad(params);
  auto loss = build_loss();
  backward(loss);

  std::vector<Tensor<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    p->ensure_grad();
    analytic.push_back(p->grad);
  }

  double worst = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = params[pi]->value;
    for (size_t i = 0; i < value.data.size(); ++i) {
      const double saved = value.data[i];
      value.data[i] = saved + step;
      const double up = build_loss()->value.data[0];
      value.data[i] = saved - step;
      const double down = build_loss()->value.data[0];
      value.data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi].data[i];
      const double denom = std::max(std::abs(a), std::abs(numeric));
      const double err = denom > 1e-6 ? std::abs(a - numeric) / denom : std::abs(a - numeric);
      if (err > worst) worst = err;
    }
  }
  return worst;
}

}  // namespace crisiskit::num
