#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crisiskit/tensor.hpp"

namespace crisiskit::num {

/// Reverse-mode graph node. Ops build a DAG of these; backward() walks it
/// in reverse topological order. Nodes whose ancestors need no gradients
/// carry no parents, so frozen-model subgraphs are pruned as they are
/// built.
template <class Real>
struct Node {
  Tensor<Real> value;
  Tensor<Real> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.data.empty()) grad = Tensor<Real>::zeros(value.shape);
  }
};

template <class Real>
using NodePtr = std::shared_ptr<Node<Real>>;

template <class Real>
struct NamedParam {
  std::string name;
  NodePtr<Real> node;
};

template <class Real>
NodePtr<Real> make_param(Tensor<Real> value) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

template <class Real>
NodePtr<Real> make_const(Tensor<Real> value) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  return n;
}

template <class Real>
NodePtr<Real> op_node(Tensor<Real> value, std::vector<NodePtr<Real>> parents,
                      std::function<void(Node<Real>&)> fn) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  for (const auto& p : parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

/// Accumulates d(loss)/d(node) into every reachable node's grad buffer.
template <class Real>
void backward(const NodePtr<Real>& loss) {
  check(loss->value.numel() == 1, "backward expects a scalar loss");
  if (!loss->requires_grad) return;

  std::vector<Node<Real>*> order;
  std::unordered_set<Node<Real>*> seen;
  std::vector<std::pair<Node<Real>*, size_t>> stack;
  stack.push_back({loss.get(), 0});
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<Real>* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->ensure_grad();
  loss->grad.data[0] = Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Real>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

template <class Real>
void zero_grad(const std::vector<NodePtr<Real>>& params) {
  for (const auto& p : params) {
    p->ensure_grad();
    std::fill(p->grad.data.begin(), p->grad.data.end(), Real(0));
  }
}

// ---------------------------------------------------------------- ops ----

template <class Real>
NodePtr<Real> add(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  check(a->value.same_shape(b->value), "add shape mismatch");
  Tensor<Real> out = a->value;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value.data[i];
  return op_node<Real>(std::move(out), {a, b}, [a, b](Node<Real>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < self.grad.data.size(); ++i) a->grad.data[i] += self.grad.data[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (size_t i = 0; i < self.grad.data.size(); ++i) b->grad.data[i] += self.grad.data[i];
    }
  });
}

template <class Real>
NodePtr<Real> scale(const NodePtr<Real>& x, Real c) {
  Tensor<Real> out = x->value;
  for (auto& v : out.data) v *= c;
  return op_node<Real>(std::move(out), {x}, [x, c](Node<Real>& self) {
    x->ensure_grad();
    for (size_t i = 0; i < self.grad.data.size(); ++i) x->grad.data[i] += c * self.grad.data[i];
  });
}

/// y[..., k] = x[..., h] W[h, k] + b[k]; leading dimensions are preserved.
template <class Real>
NodePtr<Real> affine(const NodePtr<Real>& x, const NodePtr<Real>& w, const NodePtr<Real>& b) {
  const int h = x->value.shape.back();
  check(w->value.rank() == 2 && w->value.shape[0] == h, "affine weight mismatch");
  const int k = w->value.shape[1];
  check(b->value.rank() == 1 && b->value.shape[0] == k, "affine bias mismatch");
  const std::int64_t rows = x->value.numel() / h;

  std::vector<int> out_shape = x->value.shape;
  out_shape.back() = k;
  Tensor<Real> out(out_shape);
  matmul_nn_acc(x->value.data.data(), w->value.data.data(), out.data.data(), int(rows), h, k);
  for (std::int64_t r = 0; r < rows; ++r)
    for (int j = 0; j < k; ++j) out.data[size_t(r * k + j)] += b->value.data[size_t(j)];

  return op_node<Real>(std::move(out), {x, w, b}, [x, w, b, rows, h, k](Node<Real>& self) {
    if (x->requires_grad) {
      x->ensure_grad();
      matmul_nt_acc(self.grad.data.data(), w->value.data.data(), x->grad.data.data(),
                    int(rows), k, h);
    }
    if (w->requires_grad) {
      w->ensure_grad();
      matmul_tn_acc(x->value.data.data(), self.grad.data.data(), w->grad.data.data(), h,
                    int(rows), k);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < k; ++j) b->grad.data[size_t(j)] += self.grad.data[size_t(r * k + j)];
    }
  });
}

/// 2-D matmul node (used directly by tests; affine covers the model paths).
template <class Real>
NodePtr<Real> matmul_node(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  check(a->value.rank() == 2 && b->value.rank() == 2, "matmul expects rank-2");
  check(a->value.shape[1] == b->value.shape[0], "matmul inner dimensions differ");
  const int m = a->value.shape[0], k = a->value.shape[1], n = b->value.shape[1];
  Tensor<Real> out({m, n});
  matmul_nn_acc(a->value.data.data(), b->value.data.data(), out.data.data(), m, k, n);
  return op_node<Real>(std::move(out), {a, b}, [a, b, m, k, n](Node<Real>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      matmul_nt_acc(self.grad.data.data(), b->value.data.data(), a->grad.data.data(), m, n, k);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      matmul_tn_acc(a->value.data.data(), self.grad.data.data(), b->grad.data.data(), k, m, n);
    }
  });
}

/// C[i] = A[i] * B[i] for every batch slice.
template <class Real>
NodePtr<Real> bmm_nn(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  check(a->value.rank() == 3 && b->value.rank() == 3, "bmm expects rank-3");
  check(a->value.shape[0] == b->value.shape[0], "bmm batch mismatch");
  check(a->value.shape[2] == b->value.shape[1], "bmm inner dimensions differ");
  const int bs = a->value.shape[0], m = a->value.shape[1], k = a->value.shape[2],
            n = b->value.shape[2];
  Tensor<Real> out({bs, m, n});
  for (int i = 0; i < bs; ++i)
    matmul_nn_acc(a->value.data.data() + std::int64_t(i) * m * k,
                  b->value.data.data() + std::int64_t(i) * k * n,
                  out.data.data() + std::int64_t(i) * m * n, m, k, n);
  return op_node<Real>(std::move(out), {a, b}, [a, b, bs, m, k, n](Node<Real>& self) {
    for (int i = 0; i < bs; ++i) {
      const Real* g = self.grad.data.data() + std::int64_t(i) * m * n;
      if (a->requires_grad) {
        a->ensure_grad();
        matmul_nt_acc(g, b->value.data.data() + std::int64_t(i) * k * n,
                      a->grad.data.data() + std::int64_t(i) * m * k, m, n, k);
      }
      if (b->requires_grad) {
        b->ensure_grad();
        matmul_tn_acc(a->value.data.data() + std::int64_t(i) * m * k, g,
                      b->grad.data.data() + std::int64_t(i) * k * n, k, m, n);
      }
    }
  });
}

/// C[i] = A[i] * B[i]^T for every batch slice.
template <class Real>
NodePtr<Real> bmm_nt(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  check(a->value.rank() == 3 && b->value.rank() == 3, "bmm expects rank-3");
  check(a->value.shape[0] == b->value.shape[0], "bmm batch mismatch");
  check(a->value.shape[2] == b->value.shape[2], "bmm inner dimensions differ");
  const int bs = a->value.shape[0], m = a->value.shape[1], k = a->value.shape[2],
            n = b->value.shape[1];
  Tensor<Real> out({bs, m, n});
  for (int i = 0; i < bs; ++i)
    matmul_nt_acc(a->value.data.data() + std::int64_t(i) * m * k,
                  b->value.data.data() + std::int64_t(i) * n * k,
                  out.data.data() + std::int64_t(i) * m * n, m, k, n);
  return op_node<Real>(std::move(out), {a, b}, [a, b, bs, m, k, n](Node<Real>& self) {
    for (int i = 0; i < bs; ++i) {
      const Real* g = self.grad.data.data() + std::int64_t(i) * m * n;
      if (a->requires_grad) {
        a->ensure_grad();
        matmul_nn_acc(g, b->value.data.data() + std::int64_t(i) * n * k,
                      a->grad.data.data() + std::int64_t(i) * m * k, m, n, k);
      }
      if (b->requires_grad) {
        b->ensure_grad();
        matmul_tn_acc(g, a->value.data.data() + std::int64_t(i) * m * k,
                      b->grad.data.data() + std::int64_t(i) * n * k, n, m, k);
      }
    }
  });
}

/// Gathers rows of `table` by id; out[b, s] = table[ids[b*s_len + s]].
template <class Real>
NodePtr<Real> embedding(const NodePtr<Real>& table, std::vector<int> ids, int batch,
                        int seq_len) {
  check(table->value.rank() == 2, "embedding table must be rank-2");
  check(int(ids.size()) == batch * seq_len, "embedding id count mismatch");
  const int v = table->value.shape[0], h = table->value.shape[1];
  Tensor<Real> out({batch, seq_len, h});
  for (size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < v, "token id out of vocabulary range");
    const Real* src = table->value.data.data() + std::int64_t(ids[i]) * h;
    std::copy(src, src + h, out.data.data() + std::int64_t(i) * h);
  }
  return op_node<Real>(std::move(out), {table},
                       [table, ids = std::move(ids), h](Node<Real>& self) {
                         table->ensure_grad();
                         for (size_t i = 0; i < ids.size(); ++i) {
                           Real* dst = table->grad.data.data() + std::int64_t(ids[i]) * h;
                           const Real* g = self.grad.data.data() + std::int64_t(i) * h;
                           for (int j = 0; j < h; ++j) dst[j] += g[j];
                         }
                       });
}

/// out[b, s] = x[b, s] + pos[s]
template <class Real>
NodePtr<Real> add_position(const NodePtr<Real>& x, const NodePtr<Real>& pos) {
  check(x->value.rank() == 3 && pos->value.rank() == 2, "add_position rank mismatch");
  const int b = x->value.shape[0], s = x->value.shape[1], h = x->value.shape[2];
  check(pos->value.shape[1] == h, "add_position width mismatch");
  check(pos->value.shape[0] >= s, "sequence longer than max positions");
  Tensor<Real> out = x->value;
  for (int bi = 0; bi < b; ++bi)
    for (int si = 0; si < s; ++si) {
      Real* dst = out.data.data() + (std::int64_t(bi) * s + si) * h;
      const Real* p = pos->value.data.data() + std::int64_t(si) * h;
      for (int j = 0; j < h; ++j) dst[j] += p[j];
    }
  return op_node<Real>(std::move(out), {x, pos}, [x, pos, b, s, h](Node<Real>& self) {
    if (x->requires_grad) {
      x->ensure_grad();
      for (size_t i = 0; i < self.grad.data.size(); ++i) x->grad.data[i] += self.grad.data[i];
    }
    if (pos->requires_grad) {
      pos->ensure_grad();
      for (int bi = 0; bi < b; ++bi)
        for (int si = 0; si < s; ++si) {
          Real* dst = pos->grad.data.data() + std::int64_t(si) * h;
          const Real* g = self.grad.data.data() + (std::int64_t(bi) * s + si) * h;
          for (int j = 0; j < h; ++j) dst[j] += g[j];
        }
    }
  });
}

/// Layer norm over the last dimension, eps 1e-12, then affine gamma/beta.
template <class Real>
NodePtr<Real> layer_norm(const NodePtr<Real>& x, const NodePtr<Real>& gamma,
                         const NodePtr<Real>& beta) {
  const int h = x->value.shape.back();
  check(gamma->value.rank() == 1 && gamma->value.shape[0] == h, "layer_norm gamma mismatch");
  check(beta->value.rank() == 1 && beta->value.shape[0] == h, "layer_norm beta mismatch");
  const std::int64_t rows = x->value.numel() / h;
  constexpr double kEps = 1e-12;

  Tensor<Real> out(x->value.shape);
  Tensor<Real> xhat(x->value.shape);
  std::vector<Real> inv_std(static_cast<size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const Real* xr = x->value.data.data() + r * h;
    double mean = 0;
    for (int j = 0; j < h; ++j) mean += double(xr[j]);
    mean /= h;
    double var = 0;
    for (int j = 0; j < h; ++j) {
      const double d = double(xr[j]) - mean;
      var += d * d;
    }
    var /= h;
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_std[size_t(r)] = Real(inv);
    Real* xh = xhat.data.data() + r * h;
    Real* o = out.data.data() + r * h;
    for (int j = 0; j < h; ++j) {
      xh[j] = Real((double(xr[j]) - mean) * inv);
      o[j] = gamma->value.data[size_t(j)] * xh[j] + beta->value.data[size_t(j)];
    }
  }

  return op_node<Real>(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
       h](Node<Real>& self) {
        if (gamma->requires_grad) gamma->ensure_grad();
        if (beta->requires_grad) beta->ensure_grad();
        if (x->requires_grad) x->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r) {
          const Real* g = self.grad.data.data() + r * h;
          const Real* xh = xhat.data.data() + r * h;
          if (gamma->requires_grad || beta->requires_grad) {
            for (int j = 0; j < h; ++j) {
              if (gamma->requires_grad) gamma->grad.data[size_t(j)] += g[j] * xh[j];
              if (beta->requires_grad) beta->grad.data[size_t(j)] += g[j];
            }
          }
          if (x->requires_grad) {
            double sum_dxhat = 0, sum_dxhat_xhat = 0;
            for (int j = 0; j < h; ++j) {
              const double dxh = double(g[j]) * double(gamma->value.data[size_t(j)]);
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * double(xh[j]);
            }
            const double mean_dxhat = sum_dxhat / h;
            const double mean_dxhat_xhat = sum_dxhat_xhat / h;
            Real* dx = x->grad.data.data() + r * h;
            for (int j = 0; j < h; ++j) {
              const double dxh = double(g[j]) * double(gamma->value.data[size_t(j)]);
              dx[j] += Real(double(inv_std[size_t(r)]) *
                            (dxh - mean_dxhat - double(xh[j]) * mean_dxhat_xhat));
            }
          }
        }
      });
}

/// Exact (erf) GELU.
template <class Real>
NodePtr<Real> gelu(const NodePtr<Real>& x) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  Tensor<Real> out(x->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double v = double(x->value.data[i]);
    out.data[i] = Real(0.5 * v * (1.0 + std::erf(v * kInvSqrt2)));
  }
  return op_node<Real>(std::move(out), {x}, [x](Node<Real>& self) {
    x->ensure_grad();
    for (size_t i = 0; i < self.grad.data.size(); ++i) {
      const double v = double(x->value.data[i]);
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      x->grad.data[i] += Real(double(self.grad.data[i]) * (cdf + v * pdf));
    }
  });
}

/// [B, S, H] -> [B*heads, S, H/heads]
template <class Real>
NodePtr<Real> split_heads(const NodePtr<Real>& x, int heads) {
  const int b = x->value.shape[0], s = x->value.shape[1], h = x->value.shape[2];
  check(h % heads == 0, "hidden size not divisible by head count");
  const int dh = h / heads;
  Tensor<Real> out({b * heads, s, dh});
  for (int bi = 0; bi < b; ++bi)
    for (int si = 0; si < s; ++si)
      for (int a = 0; a < heads; ++a) {
        const Real* src = x->value.data.data() + ((std::int64_t(bi) * s + si) * h) + a * dh;
        Real* dst =
            out.data.data() + ((std::int64_t(bi) * heads + a) * s + si) * std::int64_t(dh);
        std::copy(src, src + dh, dst);
      }
  return op_node<Real>(std::move(out), {x}, [x, b, s, h, heads, dh](Node<Real>& self) {
    x->ensure_grad();
    for (int bi = 0; bi < b; ++bi)
      for (int si = 0; si < s; ++si)
        for (int a = 0; a < heads; ++a) {
          Real* dst = x->grad.data.data() + ((std::int64_t(bi) * s + si) * h) + a * dh;
          const Real* g = self.grad.data.data() +
                          ((std::int64_t(bi) * heads + a) * s + si) * std::int64_t(dh);
          for (int j = 0; j < dh; ++j) dst[j] += g[j];
        }
  });
}

/// [B*heads, S, H/heads] -> [B, S, H]
template <class Real>
NodePtr<Real> merge_heads(const NodePtr<Real>& x, int heads) {
  const int bh = x->value.shape[0], s = x->value.shape[1], dh = x->value.shape[2];
  check(bh % heads == 0, "batch not divisible by head count");
  const int b = bh / heads, h = dh * heads;
  Tensor<Real> out({b, s, h});
  for (int bi = 0; bi < b; ++bi)
    for (int si = 0; si < s; ++si)
      for (int a = 0; a < heads; ++a) {
        const Real* src = x->value.data.data() +
                          ((std::int64_t(bi) * heads + a) * s + si) * std::int64_t(dh);
        Real* dst = out.data.data() + ((std::int64_t(bi) * s + si) * h) + a * dh;
        std::copy(src, src + dh, dst);
      }
  return op_node<Real>(std::move(out), {x}, [x, b, s, h, heads, dh](Node<Real>& self) {
    x->ensure_grad();
    for (int bi = 0; bi < b; ++bi)
      for (int si = 0; si < s; ++si)
        for (int a = 0; a < heads; ++a) {
          Real* dst = x->grad.data.data() +
                      ((std::int64_t(bi) * heads + a) * s + si) * std::int64_t(dh);
          const Real* g = self.grad.data.data() + ((std::int64_t(bi) * s + si) * h) + a * dh;
          for (int j = 0; j < dh; ++j) dst[j] += g[j];
        }
  });
}

/// Softmax over the last dim of [B*heads, Sq, Sk] with key positions where
/// mask[b, k] == 0 excluded (additive -1e30 before normalization).
template <class Real>
NodePtr<Real> masked_softmax(const NodePtr<Real>& scores, const Tensor<Real>& key_mask,
                             int heads) {
  check(scores->value.rank() == 3, "masked_softmax expects rank-3 scores");
  const int bh = scores->value.shape[0], sq = scores->value.shape[1],
            sk = scores->value.shape[2];
  check(key_mask.rank() == 2 && key_mask.shape[0] * heads == bh && key_mask.shape[1] == sk,
        "mask does not match scores");
  constexpr Real kNegInf = Real(-1e30);

  Tensor<Real> out({bh, sq, sk});
  for (int r = 0; r < bh; ++r) {
    const int b = r / heads;
    const Real* mrow = key_mask.data.data() + std::int64_t(b) * sk;
    for (int q = 0; q < sq; ++q) {
      const Real* in = scores->value.data.data() + (std::int64_t(r) * sq + q) * sk;
      Real* o = out.data.data() + (std::int64_t(r) * sq + q) * sk;
      Real mx = kNegInf;
      for (int kk = 0; kk < sk; ++kk) {
        const Real v = mrow[kk] > Real(0.5) ? in[kk] : kNegInf;
        if (v > mx) mx = v;
      }
      Real sum = 0;
      for (int kk = 0; kk < sk; ++kk) {
        const Real v = mrow[kk] > Real(0.5) ? std::exp(in[kk] - mx) : Real(0);
        o[kk] = v;
        sum += v;
      }
      check(sum > Real(0), "attention row fully masked");
      for (int kk = 0; kk < sk; ++kk) o[kk] /= sum;
    }
  }

  Tensor<Real> saved = out;
  return op_node<Real>(std::move(out), {scores},
                       [scores, saved = std::move(saved), bh, sq, sk](Node<Real>& self) {
                         scores->ensure_grad();
                         for (std::int64_t row = 0; row < std::int64_t(bh) * sq; ++row) {
                           const Real* y = saved.data.data() + row * sk;
                           const Real* g = self.grad.data.data() + row * sk;
                           Real dot = 0;
                           for (int kk = 0; kk < sk; ++kk) dot += y[kk] * g[kk];
                           Real* dx = scores->grad.data.data() + row * sk;
                           for (int kk = 0; kk < sk; ++kk) dx[kk] += y[kk] * (g[kk] - dot);
                         }
                       });
}

/// Mask-weighted average over the sequence dim: [B, S, H] -> [B, H].
template <class Real>
NodePtr<Real> mean_pool(const NodePtr<Real>& x, const Tensor<Real>& mask) {
  check(x->value.rank() == 3, "mean_pool expects rank-3 input");
  const int b = x->value.shape[0], s = x->value.shape[1], h = x->value.shape[2];
  check(mask.rank() == 2 && mask.shape[0] == b && mask.shape[1] == s,
        "mask does not match embeddings");
  Tensor<Real> out({b, h});
  std::vector<Real> denom(static_cast<size_t>(b));
  for (int bi = 0; bi < b; ++bi) {
    Real m = 0;
    for (int si = 0; si < s; ++si) m += mask.data[size_t(bi) * s + si];
    if (!(m > Real(0))) throw std::invalid_argument("empty sequence");
    denom[size_t(bi)] = m;
    Real* o = out.data.data() + std::int64_t(bi) * h;
    for (int si = 0; si < s; ++si) {
      const Real w = mask.data[size_t(bi) * s + si];
      if (w == Real(0)) continue;
      const Real* xr = x->value.data.data() + (std::int64_t(bi) * s + si) * h;
      for (int j = 0; j < h; ++j) o[j] += w * xr[j];
    }
    for (int j = 0; j < h; ++j) o[j] /= m;
  }
  return op_node<Real>(std::move(out), {x},
                       [x, mask, denom = std::move(denom), b, s, h](Node<Real>& self) {
                         x->ensure_grad();
                         for (int bi = 0; bi < b; ++bi) {
                           const Real* g = self.grad.data.data() + std::int64_t(bi) * h;
                           for (int si = 0; si < s; ++si) {
                             const Real w = mask.data[size_t(bi) * s + si];
                             if (w == Real(0)) continue;
                             Real* dx = x->grad.data.data() + (std::int64_t(bi) * s + si) * h;
                             const Real scale = w / denom[size_t(bi)];
                             for (int j = 0; j < h; ++j) dx[j] += scale * g[j];
                           }
                         }
                       });
}

/// First-position vector per batch row: [B, S, H] -> [B, H].
template <class Real>
NodePtr<Real> cls_pool(const NodePtr<Real>& x) {
  check(x->value.rank() == 3, "cls_pool expects rank-3 input");
  const int b = x->value.shape[0], s = x->value.shape[1], h = x->value.shape[2];
  Tensor<Real> out({b, h});
  for (int bi = 0; bi < b; ++bi) {
    const Real* src = x->value.data.data() + std::int64_t(bi) * s * h;
    std::copy(src, src + h, out.data.data() + std::int64_t(bi) * h);
  }
  return op_node<Real>(std::move(out), {x}, [x, b, s, h](Node<Real>& self) {
    x->ensure_grad();
    for (int bi = 0; bi < b; ++bi) {
      Real* dst = x->grad.data.data() + std::int64_t(bi) * s * h;
      const Real* g = self.grad.data.data() + std::int64_t(bi) * h;
      for (int j = 0; j < h; ++j) dst[j] += g[j];
    }
  });
}

// ------------------------------------------------------------- losses ----

/// Mean of squared differences over all elements; gradients flow to both sides.
template <class Real>
NodePtr<Real> mse_loss(const NodePtr<Real>& a, const NodePtr<Real>& b) {
  check(a->value.same_shape(b->value), "mse shape mismatch");
  const std::int64_t n = a->value.numel();
  double total = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = double(a->value.data[size_t(i)]) - double(b->value.data[size_t(i)]);
    total += d * d;
  }
  Tensor<Real> out({1});
  out.data[0] = Real(total / double(n));
  return op_node<Real>(std::move(out), {a, b}, [a, b, n](Node<Real>& self) {
    const Real g = self.grad.data[0] * Real(2.0 / double(n));
    if (a->requires_grad) a->ensure_grad();
    if (b->requires_grad) b->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i) {
      const Real d = a->value.data[size_t(i)] - b->value.data[size_t(i)];
      if (a->requires_grad) a->grad.data[size_t(i)] += g * d;
      if (b->requires_grad) b->grad.data[size_t(i)] -= g * d;
    }
  });
}

/// Weighted categorical cross-entropy over [B, C] logits, normalized by the
/// sum of weights so all-equal weights match the unweighted mean exactly.
template <class Real>
NodePtr<Real> cross_entropy_loss(const NodePtr<Real>& logits, const std::vector<int>& labels,
                                 const std::vector<double>& weights) {
  check(logits->value.rank() == 2, "cross_entropy expects [batch, classes] logits");
  const int bsz = logits->value.shape[0], c = logits->value.shape[1];
  check(int(labels.size()) == bsz, "label count mismatch");
  check(weights.empty() || int(weights.size()) == bsz, "weight count mismatch");

  Tensor<Real> probs = softmax(logits->value, 1);
  double weight_sum = 0, total = 0;
  for (int i = 0; i < bsz; ++i) {
    check(labels[size_t(i)] >= 0 && labels[size_t(i)] < c, "class index out of range");
    const double w = weights.empty() ? 1.0 : weights[size_t(i)];
    weight_sum += w;
    total -= w * std::log(std::max(double(probs.at(i, labels[size_t(i)])), 1e-300));
  }
  Tensor<Real> out({1});
  out.data[0] = Real(total / weight_sum);
  return op_node<Real>(
      std::move(out), {logits},
      [logits, labels, weights, probs = std::move(probs), bsz, c,
       weight_sum](Node<Real>& self) {
        logits->ensure_grad();
        const double g = double(self.grad.data[0]) / weight_sum;
        for (int i = 0; i < bsz; ++i) {
          const double w = weights.empty() ? 1.0 : weights[size_t(i)];
          Real* dst = logits->grad.data.data() + std::int64_t(i) * c;
          const Real* p = probs.data.data() + std::int64_t(i) * c;
          for (int j = 0; j < c; ++j) {
            const double onehot = (j == labels[size_t(i)]) ? 1.0 : 0.0;
            dst[j] += Real(g * w * (double(p[j]) - onehot));
          }
        }
      });
}

/// T^2-scaled KL(teacher || student) with temperature softening, averaged
/// over the batch. The teacher side is a constant.
template <class Real>
NodePtr<Real> kl_distill_loss(const Tensor<Real>& teacher_logits, const NodePtr<Real>& student,
                              double temperature) {
  check(teacher_logits.same_shape(student->value), "kl_divergence shape mismatch");
  check(temperature > 0, "temperature must be positive");
  const int bsz = teacher_logits.shape[0], c = teacher_logits.shape[1];

  auto soften = [&](const Tensor<Real>& logits) {
    Tensor<Real> t = logits;
    for (auto& v : t.data) v = Real(double(v) / temperature);
    return softmax(t, 1);
  };
  Tensor<Real> pt = soften(teacher_logits);
  Tensor<Real> ps = soften(student->value);

  double total = 0;
  for (int i = 0; i < bsz; ++i)
    for (int j = 0; j < c; ++j) {
      const double p = double(pt.at(i, j));
      if (p > 0) total += p * (std::log(p) - std::log(std::max(double(ps.at(i, j)), 1e-300)));
    }
  Tensor<Real> out({1});
  out.data[0] = Real(temperature * temperature * total / double(bsz));
  return op_node<Real>(std::move(out), {student},
                       [student, pt = std::move(pt), ps = std::move(ps), bsz, c,
                        temperature](Node<Real>& self) {
                         student->ensure_grad();
                         const double g =
                             double(self.grad.data[0]) * temperature / double(bsz);
                         for (int i = 0; i < bsz; ++i) {
                           Real* dst = student->grad.data.data() + std::int64_t(i) * c;
                           for (int j = 0; j < c; ++j)
                             dst[j] += Real(g * (double(ps.at(i, j)) - double(pt.at(i, j))));
                         }
                       });
}

/// Convex combination used by task distillation:
/// alpha * soft + (1 - alpha) * hard.
template <class Real>
NodePtr<Real> blend(const NodePtr<Real>& soft, const NodePtr<Real>& hard, double alpha) {
  check(soft->value.numel() == 1 && hard->value.numel() == 1, "blend expects scalars");
  Tensor<Real> out({1});
  out.data[0] = Real(alpha * double(soft->value.data[0]) +
                     (1.0 - alpha) * double(hard->value.data[0]));
  return op_node<Real>(std::move(out), {soft, hard}, [soft, hard, alpha](Node<Real>& self) {
    if (soft->requires_grad) {
      soft->ensure_grad();
      soft->grad.data[0] += Real(alpha) * self.grad.data[0];
    }
    if (hard->requires_grad) {
      hard->ensure_grad();
      hard->grad.data[0] += Real(1.0 - alpha) * self.grad.data[0];
    }
  });
}

}  // namespace crisiskit::num
