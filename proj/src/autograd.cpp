/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stancy/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stancy/errors.hpp"
#include "stancy/kernels.hpp"

namespace stancy::ag {
namespace {

thread_local bool t_grad_enabled = true;

using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(std::size_t rows, std::size_t cols) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(rows * cols, 0.0);
  return n;
}

// Attaches the backward closure when recording and any input needs a gradient.
Tensor finish(NodePtr out, std::vector<NodePtr> parents, std::function<void(Node&)> fn) {
  if (t_grad_enabled) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->requires_grad;
    if (needs) {
      out->requires_grad = true;
      out->parents = std::move(parents);
      out->backward_fn = std::move(fn);
    }
  }
  return Tensor(std::move(out));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

std::span<double> Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::constant(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) throw ContractError("tensor: value count does not match shape");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return constant(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::parameter(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Tensor t = constant(rows, cols, std::move(values));
  t.node_->requires_grad = true;
  t.node_->ensure_grad();
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on a non-scalar tensor");
  return node_->value[0];
}

void Tensor::backward() {
  if (!node_->requires_grad) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      Node* p = n->parents[idx++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (n->backward_fn) n->grad.assign(n->value.size(), 0.0);
  }
  node_->ensure_grad();
  std::fill(node_->grad.begin(), node_->grad.end(), 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

void Tensor::zero_grad() {
  auto g = node_->ensure_grad();
  std::fill(g.begin(), g.end(), 0.0);
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const std::size_t n = x.rows(), k = x.cols(), m = weight.rows();
  if (weight.cols() != k) throw ContractError("linear: inner dimension mismatch");
  if (bias.defined() && bias.size() != m) throw ContractError("linear: bias size mismatch");
  const auto& kt = kernels::active();
  auto out = make_node(n, m);
  const Node& xv = *x.node();
  const Node& wv = *weight.node();
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out->row(i);
    for (std::size_t j = 0; j < m; ++j) o[j] = kt.dot(xv.row(i), wv.row(j), k);
    if (bias.defined()) kt.add(o, bias.value().data(), o, m);
  }
  std::vector<NodePtr> parents{x.node(), weight.node()};
  if (bias.defined()) parents.push_back(bias.node());
  return finish(out, std::move(parents), [n, k, m](Node& self) {
    const auto& kt = kernels::active();
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    if (xn.requires_grad) {
      auto dx = xn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double* dy = self.grad.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
          if (dy[j] != 0.0) kt.axpy(dy[j], wn.row(j), dx.data() + i * k, k);
        }
      }
    }
    if (wn.requires_grad) {
      auto dw = wn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double* dy = self.grad.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
          if (dy[j] != 0.0) kt.axpy(dy[j], xn.row(i), dw.data() + j * k, k);
        }
      }
    }
    if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
      auto db = self.parents[2]->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) kt.add(db.data(), self.grad.data() + i * m, db.data(), m);
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) { return linear(a, b); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) throw ContractError("matmul: inner dimension mismatch");
  const auto& kt = kernels::active();
  auto out = make_node(n, m);
  const Node& an = *a.node();
  const Node& bn = *b.node();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) kt.axpy(an.row(i)[p], bn.row(p), out->row(i), m);
  }
  return finish(out, {a.node(), b.node()}, [n, k, m](Node& self) {
    const auto& kt = kernels::active();
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    if (an.requires_grad) {
      auto da = an.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) da[i * k + p] += kt.dot(self.grad.data() + i * m, bn.row(p), m);
      }
    }
    if (bn.requires_grad) {
      auto db = bn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          kt.axpy(an.row(i)[p], self.grad.data() + i * m, db.data() + p * m, m);
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto out = make_node(a.rows(), a.cols());
  kernels::active().add(a.value().data(), b.value().data(), out->value.data(), a.size());
  return finish(out, {a.node(), b.node()}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto g = p->ensure_grad();
      kernels::active().add(g.data(), self.grad.data(), g.data(), g.size());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto out = make_node(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out->value[i] = a.value()[i] - b.value()[i];
  return finish(out, {a.node(), b.node()}, [](Node& self) {
    if (self.parents[0]->requires_grad) {
      auto g = self.parents[0]->ensure_grad();
      kernels::active().axpy(1.0, self.grad.data(), g.data(), g.size());
    }
    if (self.parents[1]->requires_grad) {
      auto g = self.parents[1]->ensure_grad();
      kernels::active().axpy(-1.0, self.grad.data(), g.data(), g.size());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  auto out = make_node(a.rows(), a.cols());
  kernels::active().mul(a.value().data(), b.value().data(), out->value.data(), a.size());
  return finish(out, {a.node(), b.node()}, [](Node& self) {
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    const std::size_t n = self.value.size();
    if (an.requires_grad) {
      auto g = an.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * bn.value[i];
    }
    if (bn.requires_grad) {
      auto g = bn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * an.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  auto out = make_node(a.rows(), a.cols());
  out->value.assign(a.value().begin(), a.value().end());
  kernels::active().scale(s, out->value.data(), out->value.size());
  return finish(out, {a.node()}, [s](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    kernels::active().axpy(s, self.grad.data(), g.data(), g.size());
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  auto out = make_node(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out->value[i] = a.value()[i] + c;
  return finish(out, {a.node()}, [](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    kernels::active().add(g.data(), self.grad.data(), g.data(), g.size());
  });
}

Tensor add_constant(const Tensor& a, std::span<const double> c) {
  if (c.size() != a.size()) throw ContractError("add_constant: size mismatch");
  auto out = make_node(a.rows(), a.cols());
  kernels::active().add(a.value().data(), c.data(), out->value.data(), a.size());
  return finish(out, {a.node()}, [](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    kernels::active().add(g.data(), self.grad.data(), g.data(), g.size());
  });
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t n = a.rows(), m = a.cols();
  auto out = make_node(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = a.node()->row(i);
    double* y = out->row(i);
    const double mx = *std::max_element(x, x + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      y[j] = std::exp(x[j] - mx);
      total += y[j];
    }
    kernels::active().scale(1.0 / total, y, m);
  }
  return finish(out, {a.node()}, [n, m](Node& self) {
    const auto& kt = kernels::active();
    auto g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double* y = self.row(i);
      const double* dy = self.grad.data() + i * m;
      const double inner = kt.dot(dy, y, m);
      double* dx = g.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) dx[j] += y[j] * (dy[j] - inner);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t n = x.rows(), m = x.cols();
  if (gamma.size() != m || beta.size() != m) throw ContractError("layer_norm: parameter size mismatch");
  auto out = make_node(n, m);
  auto xhat = std::make_shared<std::vector<double>>(n * m);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xr = x.node()->row(i);
    const double mu = kt.sum(xr, m) / static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    double* h = xhat->data() + i * m;
    for (std::size_t j = 0; j < m; ++j) h[j] = (xr[j] - mu) * is;
    double* y = out->row(i);
    kt.mul(h, gamma.value().data(), y, m);
    kt.add(y, beta.value().data(), y, m);
  }
  return finish(out, {x.node(), gamma.node(), beta.node()}, [n, m, xhat, inv_std](Node& self) {
    Node& xn = *self.parents[0];
    Node& gn = *self.parents[1];
    Node& bn = *self.parents[2];
    std::vector<double> dxhat(m);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dy = self.grad.data() + i * m;
      const double* h = xhat->data() + i * m;
      if (gn.requires_grad) {
        auto dg = gn.ensure_grad();
        for (std::size_t j = 0; j < m; ++j) dg[j] += dy[j] * h[j];
      }
      if (bn.requires_grad) {
        auto db = bn.ensure_grad();
        for (std::size_t j = 0; j < m; ++j) db[j] += dy[j];
      }
      if (xn.requires_grad) {
        double mean_d = 0.0, mean_dh = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          dxhat[j] = dy[j] * gn.value[j];
          mean_d += dxhat[j];
          mean_dh += dxhat[j] * h[j];
        }
        mean_d /= static_cast<double>(m);
        mean_dh /= static_cast<double>(m);
        auto dx = xn.ensure_grad();
        const double is = (*inv_std)[i];
        for (std::size_t j = 0; j < m; ++j) dx[i * m + j] += is * (dxhat[j] - mean_d - h[j] * mean_dh);
      }
    }
  });
}

namespace {

template <class F, class D>
Tensor unary(const Tensor& x, F f, D dfdx) {
  auto out = make_node(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out->value[i] = f(x.value()[i]);
  return finish(out, {x.node()}, [dfdx](Node& self) {
    Node& xn = *self.parents[0];
    auto g = xn.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx(xn.value[i], self.value[i]);
  });
}

}  // namespace

Tensor gelu(const Tensor& x) {
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); },
      [](double v, double) {
        return 0.5 * (1.0 + std::erf(v * M_SQRT1_2)) + v * std::exp(-0.5 * v * v) * (0.5 * M_2_SQRTPI * M_SQRT1_2);
      });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  const std::size_t h = table.cols();
  const std::size_t vocab = table.rows();
  auto out = make_node(ids.size(), h);
  auto idx = std::make_shared<std::vector<int>>(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) throw ContractError("embedding: id out of range");
    std::copy_n(table.node()->row(static_cast<std::size_t>(ids[i])), h, out->row(i));
  }
  return finish(out, {table.node()}, [idx, h](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < idx->size(); ++i) {
      kernels::active().add(g.data() + static_cast<std::size_t>((*idx)[i]) * h, self.grad.data() + i * h,
                            g.data() + static_cast<std::size_t>((*idx)[i]) * h, h);
    }
  });
}

Tensor row(const Tensor& x, std::size_t r) {
  if (r >= x.rows()) throw ContractError("row: index out of range");
  const std::size_t m = x.cols();
  auto out = make_node(1, m);
  std::copy_n(x.node()->row(r), m, out->value.data());
  return finish(out, {x.node()}, [r, m](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    kernels::active().add(g.data() + r * m, self.grad.data(), g.data() + r * m, m);
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols()) throw ContractError("slice_cols: range out of bounds");
  const std::size_t n = x.rows(), m = x.cols();
  auto out = make_node(n, count);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(x.node()->row(i) + begin, count, out->row(i));
  return finish(out, {x.node()}, [n, m, begin, count](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      double* dst = g.data() + i * m + begin;
      kernels::active().add(dst, self.grad.data() + i * count, dst, count);
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t n = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    if (p.rows() != n) throw ContractError("concat_cols: row count mismatch");
    widths.push_back(p.cols());
    total += p.cols();
    parents.push_back(p.node());
  }
  auto out = make_node(n, total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < n; ++i) std::copy_n(p.node()->row(i), p.cols(), out->row(i) + offset);
    offset += p.cols();
  }
  return finish(out, std::move(parents), [n, total, widths](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      Node& pn = *self.parents[k];
      if (pn.requires_grad) {
        auto g = pn.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
          kernels::active().add(g.data() + i * widths[k], self.grad.data() + i * total + off,
                                g.data() + i * widths[k], widths[k]);
        }
      }
      off += widths[k];
    }
  });
}

Tensor sum(const Tensor& x) {
  auto out = make_node(1, 1);
  out->value[0] = kernels::active().sum(x.value().data(), x.size());
  return finish(out, {x.node()}, [](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const std::vector<Tensor>& scalars) {
  if (scalars.empty()) throw ContractError("mean: no inputs");
  auto out = make_node(1, 1);
  std::vector<NodePtr> parents;
  double total = 0.0;
  for (const auto& s : scalars) {
    if (s.size() != 1) throw ContractError("mean: inputs must be scalars");
    total += s.item();
    parents.push_back(s.node());
  }
  const double inv = 1.0 / static_cast<double>(scalars.size());
  out->value[0] = total * inv;
  return finish(out, std::move(parents), [inv](Node& self) {
    for (auto& p : self.parents) {
      if (p->requires_grad) p->ensure_grad()[0] += self.grad[0] * inv;
    }
  });
}

Tensor cosine(const Tensor& a, const Tensor& b, double floor) {
  if (a.size() != b.size()) throw ContractError("cosine: length mismatch");
  const auto& kt = kernels::active();
  const std::size_t n = a.size();
  const double ab = kt.dot(a.value().data(), b.value().data(), n);
  const double aa = kt.dot(a.value().data(), a.value().data(), n);
  const double bb = kt.dot(b.value().data(), b.value().data(), n);
  if (aa == 0.0 || bb == 0.0) throw NumericalError("cosine: zero-norm representation");
  const double norm_product = std::sqrt(aa * bb);
  const bool floored = norm_product < floor;
  const double denom = floored ? floor : norm_product;
  const double raw = ab / denom;
  const bool clamped = raw > 1.0 || raw < -1.0;
  auto out = make_node(1, 1);
  out->value[0] = std::clamp(raw, -1.0, 1.0);
  return finish(out, {a.node(), b.node()}, [n, aa, bb, denom, raw, floored, clamped](Node& self) {
    if (clamped) return;
    const double g = self.grad[0];
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    // d cos/da = b/denom − cos·a/|a|² (second term vanishes when the floor is active)
    const double self_term_a = floored ? 0.0 : raw / aa;
    const double self_term_b = floored ? 0.0 : raw / bb;
    if (an.requires_grad) {
      auto ga = an.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ga[i] += g * (bn.value[i] / denom - self_term_a * an.value[i]);
    }
    if (bn.requires_grad) {
      auto gb = bn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) gb[i] += g * (an.value[i] / denom - self_term_b * bn.value[i]);
    }
  });
}

Tensor cross_entropy_logits(const Tensor& logits, std::size_t gold) {
  const std::size_t k = logits.size();
  if (gold >= k) throw ContractError("cross_entropy: gold index out of range");
  const auto v = logits.value();
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - mx);
  const double lse = mx + std::log(total);
  auto probs = std::make_shared<std::vector<double>>(k);
  for (std::size_t j = 0; j < k; ++j) (*probs)[j] = std::exp(v[j] - lse);
  auto out = make_node(1, 1);
  out->value[0] = lse - v[gold];
  return finish(out, {logits.node()}, [probs, gold, k](Node& self) {
    auto g = self.parents[0]->ensure_grad();
    for (std::size_t j = 0; j < k; ++j) g[j] += self.grad[0] * ((*probs)[j] - (j == gold ? 1.0 : 0.0));
  });
}

Tensor detach(const Tensor& x) {
  return Tensor::constant(x.rows(), x.cols(), std::vector<double>(x.value().begin(), x.value().end()));
}

}  // namespace stancy::ag
