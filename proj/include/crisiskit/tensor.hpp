#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "crisiskit/common.hpp"

namespace crisiskit::num {

/// Dense row-major tensor. Real is float for training, double for the
/// verification mode used by gradient checks.
template <class Real>
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, Real fill = Real(0))
      : shape(std::move(s)), data(numel_of(shape), fill) {}
  Tensor(std::vector<int> s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
    if (std::int64_t(data.size()) != numel_of(shape))
      throw std::invalid_argument("tensor data does not match shape");
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  std::int64_t numel() const { return std::int64_t(data.size()); }
  int rank() const { return int(shape.size()); }
  int dim(int i) const { return shape[size_t(i)]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  Real& operator[](std::int64_t i) { return data[size_t(i)]; }
  Real operator[](std::int64_t i) const { return data[size_t(i)]; }

  Real& at(int i, int j) { return data[size_t(i) * shape[1] + j]; }
  Real at(int i, int j) const { return data[size_t(i) * shape[1] + j]; }
  Real& at(int i, int j, int k) {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }
  Real at(int i, int j, int k) const {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }

  bool all_finite() const {
    for (Real v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  template <class Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = Other(data[i]);
    return out;
  }
};

// ---- matmul kernels (the three orientations backward needs) ----

/// C[m,n] += A[m,k] * B[k,n]
template <class Real>
void matmul_nn_acc(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    Real* ci = c + std::int64_t(i) * n;
    const Real* ai = a + std::int64_t(i) * k;
    for (int p = 0; p < k; ++p) {
      const Real aip = ai[p];
      const Real* bp = b + std::int64_t(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

/// C[m,n] += A[m,k] * B[n,k]^T
template <class Real>
void matmul_nt_acc(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const Real* ai = a + std::int64_t(i) * k;
    Real* ci = c + std::int64_t(i) * n;
    for (int j = 0; j < n; ++j) {
      const Real* bj = b + std::int64_t(j) * k;
      Real acc = 0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

/// C[m,n] += A[k,m]^T * B[k,n]
template <class Real>
void matmul_tn_acc(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const Real* ap = a + std::int64_t(p) * m;
    const Real* bp = b + std::int64_t(p) * n;
    for (int i = 0; i < m; ++i) {
      const Real api = ap[i];
      Real* ci = c + std::int64_t(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

template <class Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
  check(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 tensors");
  check(a.shape[1] == b.shape[0], "matmul inner dimensions differ");
  Tensor<Real> c({a.shape[0], b.shape[1]});
  matmul_nn_acc(a.data.data(), b.data.data(), c.data.data(), a.shape[0], a.shape[1],
                b.shape[1]);
  return c;
}

// ---- elementwise / reductions used across the toolkit ----

/// Numerically stable softmax along `axis`. Rejects non-finite input.
template <class Real>
Tensor<Real> softmax(const Tensor<Real>& logits, int axis) {
  if (axis < 0) axis += logits.rank();
  check(axis >= 0 && axis < logits.rank(), "softmax axis out of range");
  if (!logits.all_finite()) throw std::invalid_argument("non-finite input");
  const int n = logits.shape[size_t(axis)];
  std::int64_t inner = 1, outer = 1;
  for (int i = 0; i < logits.rank(); ++i) {
    if (i < axis) outer *= logits.shape[size_t(i)];
    if (i > axis) inner *= logits.shape[size_t(i)];
  }
  Tensor<Real> out(logits.shape);
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      const std::int64_t base = o * n * inner + in;
      Real mx = logits.data[size_t(base)];
      for (int i = 1; i < n; ++i) mx = std::max(mx, logits.data[size_t(base + i * inner)]);
      Real sum = 0;
      for (int i = 0; i < n; ++i) {
        const Real e = std::exp(logits.data[size_t(base + i * inner)] - mx);
        out.data[size_t(base + i * inner)] = e;
        sum += e;
      }
      for (int i = 0; i < n; ++i) out.data[size_t(base + i * inner)] /= sum;
    }
  }
  return out;
}

/// T^2-scaled KL(teacher || student) with temperature softening, averaged
/// over rows (the batch dimension for [B,C] logits).
template <class Real>
double kl_divergence(const Tensor<Real>& teacher_logits, const Tensor<Real>& student_logits,
                     double temperature) {
  check(teacher_logits.same_shape(student_logits), "kl_divergence shape mismatch");
  check(temperature > 0, "temperature must be positive");
  const int c = teacher_logits.shape.back();
  const std::int64_t rows = teacher_logits.numel() / c;
  double total = 0;
  std::vector<double> pt(c), ps(c);
  for (std::int64_t r = 0; r < rows; ++r) {
    const Real* t = teacher_logits.data.data() + r * c;
    const Real* s = student_logits.data.data() + r * c;
    auto soften = [&](const Real* src, std::vector<double>& dst) {
      double mx = -1e300;
      for (int i = 0; i < c; ++i) mx = std::max(mx, double(src[i]) / temperature);
      double sum = 0;
      for (int i = 0; i < c; ++i) {
        dst[size_t(i)] = std::exp(double(src[i]) / temperature - mx);
        sum += dst[size_t(i)];
      }
      for (int i = 0; i < c; ++i) dst[size_t(i)] /= sum;
    };
    soften(t, pt);
    soften(s, ps);
    double kl = 0;
    for (int i = 0; i < c; ++i)
      if (pt[size_t(i)] > 0) kl += pt[size_t(i)] * (std::log(pt[size_t(i)]) - std::log(ps[size_t(i)]));
    total += kl;
  }
  return temperature * temperature * total / double(rows);
}

/// -weight * log softmax(logits)[class_index] for a single example.
template <class Real>
double cross_entropy(const Tensor<Real>& logits, int class_index, double weight) {
  check(logits.rank() == 1, "cross_entropy expects rank-1 logits");
  const int c = logits.shape[0];
  if (class_index < 0 || class_index >= c)
    throw std::invalid_argument("class index out of range");
  double mx = -1e300;
  for (int i = 0; i < c; ++i) mx = std::max(mx, double(logits.data[size_t(i)]));
  double sum = 0;
  for (int i = 0; i < c; ++i) sum += std::exp(double(logits.data[size_t(i)]) - mx);
  const double logp = double(logits.data[size_t(class_index)]) - mx - std::log(sum);
  return -weight * logp;
}

template <class Real>
double mse(const Tensor<Real>& a, const Tensor<Real>& b) {
  check(a.same_shape(b), "mse shape mismatch");
  double total = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    total += d * d;
  }
  return total / double(a.numel());
}

}  // namespace crisiskit::num
