#include "hiformer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hiformer/error.hpp"

namespace hiformer::ad {

namespace {

using BackwardFn = std::function<void(Node&)>;

void check_finite(const char* op, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value produced by ") + op);
  }
}

// Builds an op output. History is recorded only when grad mode is on and at
// least one input is tracked.
Tensor make_result(const char* op, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   BackwardFn backward) {
  if (check_finite_enabled()) check_finite(op, value);
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (grad_enabled()) {
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (const auto& t : inputs) node->inputs.push_back(t.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

// Gradient sink for input `i` of `self`, or nullptr if it is not tracked.
double* grad_of(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  if (!in.requires_grad) return nullptr;
  in.ensure_grad();
  return in.grad.data();
}

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError(std::string(op) + ": shapes " + shape_string(a) + " and " + shape_string(b) +
                           " cannot be broadcast");
    }
    out[i] = std::max(ea, eb);
  }
  return out;
}

// Flat index into an operand of shape `in` for every element of `out`.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  const std::size_t pad = rank - in.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > pad;) {
    const std::size_t e = in[i - pad];
    stride[i] = e == 1 ? 0 : s;
    s *= e;
  }
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> idx(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    idx[k] = flat;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      flat += stride[d];
      if (counter[d] < out[d]) break;
      flat -= stride[d] * counter[d];
      counter[d] = 0;
    }
  }
  return idx;
}

enum class BinaryKind { add, sub, mul };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* op) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  const auto va = a.data();
  const auto vb = b.data();

  auto apply = [kind](double x, double y) {
    switch (kind) {
      case BinaryKind::add: return x + y;
      case BinaryKind::sub: return x - y;
      case BinaryKind::mul: return x * y;
    }
    return 0.0;
  };

  if (sa == sb) {
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(va[i], vb[i]);
    return make_result(op, sa, std::move(out), {a, b}, [kind](Node& self) {
      const auto& g = self.grad;
      const auto& xa = self.inputs[0]->value;
      const auto& xb = self.inputs[1]->value;
      if (double* ga = grad_of(self, 0)) {
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += kind == BinaryKind::mul ? g[i] * xb[i] : g[i];
      }
      if (double* gb = grad_of(self, 1)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] += kind == BinaryKind::mul ? g[i] * xa[i] : (kind == BinaryKind::sub ? -g[i] : g[i]);
        }
      }
    });
  }

  Shape so = broadcast_shape(sa, sb, op);
  auto ia = std::make_shared<std::vector<std::size_t>>(broadcast_index(sa, so));
  auto ib = std::make_shared<std::vector<std::size_t>>(broadcast_index(sb, so));
  std::vector<double> out(ia->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(va[(*ia)[i]], vb[(*ib)[i]]);
  return make_result(op, so, std::move(out), {a, b}, [kind, ia, ib](Node& self) {
    const auto& g = self.grad;
    const auto& xa = self.inputs[0]->value;
    const auto& xb = self.inputs[1]->value;
    if (double* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[(*ia)[i]] += kind == BinaryKind::mul ? g[i] * xb[(*ib)[i]] : g[i];
      }
    }
    if (double* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = kind == BinaryKind::mul ? g[i] * xa[(*ia)[i]] : (kind == BinaryKind::sub ? -g[i] : g[i]);
        gb[(*ib)[i]] += d;
      }
    }
  });
}

template <class F, class DF>
Tensor unary(const Tensor& x, const char* op, F f, DF df) {
  const auto v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [df](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += self.grad[i] * df(xv[i], self.value[i]);
  });
}

// c[m×n] += a[m×k] · b[k×n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m×k] += g[m×n] · b[k×n]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      c[i * k + p] += acc;
    }
  }
}

// c[k×n] += a[m×k]^T · g[m×n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw DimensionError("matmul: shapes " + shape_string(sa) + " and " + shape_string(sb) + " are incompatible");
  }
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result("matmul", Shape{m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_of(self, 0)) gemm_nt(g, self.inputs[1]->value.data(), ga, m, n, k);
    if (double* gb = grad_of(self, 1)) gemm_tn(self.inputs[0]->value.data(), g, gb, m, k, n);
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const auto& sx = x.shape();
  const auto& sw = weight.shape();
  if (sw.size() != 2 || sx.back() != sw[0]) {
    throw DimensionError("linear: input " + shape_string(sx) + " does not match weight " + shape_string(sw));
  }
  Tensor flat = sx.size() == 2 ? x : reshape(x, Shape{x.numel() / sx.back(), sx.back()});
  Tensor y = matmul(flat, weight);
  if (bias.defined()) y = add(y, bias);
  if (sx.size() == 2) return y;
  Shape out = sx;
  out.back() = sw[1];
  return reshape(y, std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::mul, "mul"); }

Tensor affine(const Tensor& x, double scale, double shift) {
  return unary(
      x, "affine", [=](double v) { return scale * v + shift; }, [=](double, double) { return scale; });
}

Tensor convex_mix(const Tensor& rho, const Tensor& a, const Tensor& b) {
  if (rho.shape() != a.shape() || a.shape() != b.shape()) {
    throw DimensionError("convex_mix: shapes " + shape_string(rho.shape()) + ", " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()) + " must agree");
  }
  const auto r = rho.data();
  const auto va = a.data();
  const auto vb = b.data();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double y = vb[i] + r[i] * (va[i] - vb[i]);
    out[i] = std::clamp(y, std::min(va[i], vb[i]), std::max(va[i], vb[i]));
  }
  return make_result("convex_mix", a.shape(), std::move(out), {rho, a, b}, [](Node& self) {
    const auto& g = self.grad;
    const auto& r = self.inputs[0]->value;
    const auto& xa = self.inputs[1]->value;
    const auto& xb = self.inputs[2]->value;
    if (double* gr = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g.size(); ++i) gr[i] += g[i] * (xa[i] - xb[i]);
    }
    if (double* ga = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * r[i];
    }
    if (double* gb = grad_of(self, 2)) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * (1.0 - r[i]);
    }
  });
}

Tensor gelu(const Tensor& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return unary(
      x, "gelu", [=](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [=](double v, double) {
        const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
        return cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid",
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, "abs", [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto sp = split_at(x.shape(), axis);
  const auto v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.extent * sp.inner + in;
      double mx = -INFINITY;
      for (std::size_t a = 0; a < sp.extent; ++a) mx = std::max(mx, v[base + a * sp.inner]);
      double total = 0.0;
      for (std::size_t a = 0; a < sp.extent; ++a) {
        const double e = std::exp(v[base + a * sp.inner] - mx);
        out[base + a * sp.inner] = e;
        total += e;
      }
      for (std::size_t a = 0; a < sp.extent; ++a) out[base + a * sp.inner] /= total;
    }
  }
  return make_result("softmax", x.shape(), std::move(out), {x}, [sp](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.extent * sp.inner + in;
        double dot = 0.0;
        for (std::size_t a = 0; a < sp.extent; ++a) dot += g[base + a * sp.inner] * y[base + a * sp.inner];
        for (std::size_t a = 0; a < sp.extent; ++a) {
          const std::size_t i = base + a * sp.inner;
          gx[i] += y[i] * (g[i] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, std::size_t axis, double eps) {
  const auto sp = split_at(x.shape(), axis);
  if (sp.extent < 2) throw DimensionError("layer_norm: normalized axis needs extent >= 2, got shape " +
                                          shape_string(x.shape()));
  for (const Tensor* t : {&gain, &bias}) {
    if (t->defined() && t->numel() != sp.extent) {
      throw DimensionError("layer_norm: affine shape " + shape_string(t->shape()) + " does not match axis extent of " +
                           shape_string(x.shape()));
    }
  }
  const auto v = x.data();
  auto xhat = std::make_shared<std::vector<double>>(v.size());
  auto inv_std = std::make_shared<std::vector<double>>(sp.outer * sp.inner);
  std::vector<double> out(v.size());
  const double* gv = gain.defined() ? gain.data().data() : nullptr;
  const double* bv = bias.defined() ? bias.data().data() : nullptr;
  const double n = static_cast<double>(sp.extent);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.extent * sp.inner + in;
      double mu = 0.0;
      for (std::size_t a = 0; a < sp.extent; ++a) mu += v[base + a * sp.inner];
      mu /= n;
      double var = 0.0;
      for (std::size_t a = 0; a < sp.extent; ++a) {
        const double d = v[base + a * sp.inner] - mu;
        var += d * d;
      }
      var /= n;
      const double is = 1.0 / std::sqrt(var + eps);
      (*inv_std)[o * sp.inner + in] = is;
      for (std::size_t a = 0; a < sp.extent; ++a) {
        const std::size_t i = base + a * sp.inner;
        const double h = (v[i] - mu) * is;
        (*xhat)[i] = h;
        out[i] = h * (gv ? gv[a] : 1.0) + (bv ? bv[a] : 0.0);
      }
    }
  }
  std::vector<Tensor> inputs{x};
  const bool has_gain = gain.defined();
  const bool has_bias = bias.defined();
  if (has_gain) inputs.push_back(gain);
  if (has_bias) inputs.push_back(bias);
  return make_result("layer_norm", x.shape(), std::move(out), std::move(inputs),
                     [sp, xhat, inv_std, has_gain, has_bias, n](Node& self) {
                       const auto& g = self.grad;
                       const double* gv = has_gain ? self.inputs[1]->value.data() : nullptr;
                       double* gx = grad_of(self, 0);
                       double* ggain = has_gain ? grad_of(self, 1) : nullptr;
                       double* gbias = has_bias ? grad_of(self, has_gain ? 2 : 1) : nullptr;
                       for (std::size_t o = 0; o < sp.outer; ++o) {
                         for (std::size_t in = 0; in < sp.inner; ++in) {
                           const std::size_t base = o * sp.extent * sp.inner + in;
                           double m1 = 0.0, m2 = 0.0;
                           for (std::size_t a = 0; a < sp.extent; ++a) {
                             const std::size_t i = base + a * sp.inner;
                             const double gh = g[i] * (gv ? gv[a] : 1.0);
                             m1 += gh;
                             m2 += gh * (*xhat)[i];
                             if (ggain) ggain[a] += g[i] * (*xhat)[i];
                             if (gbias) gbias[a] += g[i];
                           }
                           if (!gx) continue;
                           m1 /= n;
                           m2 /= n;
                           const double is = (*inv_std)[o * sp.inner + in];
                           for (std::size_t a = 0; a < sp.extent; ++a) {
                             const std::size_t i = base + a * sp.inner;
                             const double gh = g[i] * (gv ? gv[a] : 1.0);
                             gx[i] += is * (gh - m1 - (*xhat)[i] * m2);
                           }
                         }
                       }
                     });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  const auto v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    (*mask)[i] = drop(rng) ? 0.0 : keep_scale;
    out[i] = v[i] * (*mask)[i];
  }
  return make_result("dropout", x.shape(), std::move(out), {x}, [mask](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < mask->size(); ++i) gx[i] += self.grad[i] * (*mask)[i];
  });
}

Tensor sum(const Tensor& x) {
  const auto v = x.data();
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  return make_result("sum", Shape{1}, {total}, {x}, [](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const double g = self.grad[0];
    for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) { return affine(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor sum_axis(const Tensor& x, std::size_t axis) {
  const auto sp = split_at(x.shape(), axis);
  Shape out_shape;
  for (std::size_t i = 0; i < x.rank(); ++i) {
    if (i != axis) out_shape.push_back(x.shape()[i]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  const auto v = x.data();
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t a = 0; a < sp.extent; ++a) {
      for (std::size_t in = 0; in < sp.inner; ++in) {
        out[o * sp.inner + in] += v[(o * sp.extent + a) * sp.inner + in];
      }
    }
  }
  return make_result("sum_axis", std::move(out_shape), std::move(out), {x}, [sp](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t a = 0; a < sp.extent; ++a) {
        for (std::size_t in = 0; in < sp.inner; ++in) {
          gx[(o * sp.extent + a) * sp.inner + in] += self.grad[o * sp.inner + in];
        }
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  }
  const auto v = x.data();
  return make_result("reshape", std::move(shape), std::vector<double>(v.begin(), v.end()), {x}, [](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const auto& s = x.shape();
  const std::size_t rank = s.size();
  if (axes.size() != rank) throw DimensionError("permute: axis list does not match shape " + shape_string(s));
  std::vector<bool> seen(rank, false);
  for (auto a : axes) {
    if (a >= rank || seen[a]) throw DimensionError("permute: invalid axis order for shape " + shape_string(s));
    seen[a] = true;
  }
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = s[axes[i]];

  std::vector<std::size_t> in_stride(rank, 1);
  for (std::size_t i = rank - 1; i-- > 0;) in_stride[i] = in_stride[i + 1] * s[i + 1];
  std::vector<std::size_t> step(rank);
  for (std::size_t i = 0; i < rank; ++i) step[i] = in_stride[axes[i]];

  const std::size_t n = x.numel();
  auto src = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    (*src)[k] = flat;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      flat += step[d];
      if (counter[d] < out_shape[d]) break;
      flat -= step[d] * counter[d];
      counter[d] = 0;
    }
  }
  const auto v = x.data();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = v[(*src)[k]];
  return make_result("permute", std::move(out_shape), std::move(out), {x}, [src](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t k = 0; k < src->size(); ++k) gx[(*src)[k]] += self.grad[k];
  });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("transpose expects a matrix, got " + shape_string(x.shape()));
  return permute(x, {1, 0});
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape& first = parts.front().shape();
  Shape out_shape = first;
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_string(first));
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: shapes " + shape_string(first) + " and " + shape_string(s) +
                           " differ off the concatenation axis");
    }
    extents.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const auto sp = split_at(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto v = parts[p].data();
    const std::size_t e = extents[p];
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(v.begin() + o * e * sp.inner, e * sp.inner,
                  out.begin() + (o * sp.extent + offset) * sp.inner);
    }
    offset += e;
  }
  return make_result("concat", std::move(out_shape), std::move(out), parts, [sp, extents](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < extents.size(); ++p) {
      const std::size_t e = extents[p];
      if (double* gp = grad_of(self, p)) {
        for (std::size_t o = 0; o < sp.outer; ++o) {
          const double* g = self.grad.data() + (o * sp.extent + offset) * sp.inner;
          double* dst = gp + o * e * sp.inner;
          for (std::size_t i = 0; i < e * sp.inner; ++i) dst[i] += g[i];
        }
      }
      offset += e;
    }
  });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const auto sp = split_at(x.shape(), axis);
  if (length == 0 || start + length > sp.extent) {
    throw DimensionError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of range on axis " + std::to_string(axis) + " of " + shape_string(x.shape()));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  const auto v = x.data();
  std::vector<double> out(sp.outer * length * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(v.begin() + (o * sp.extent + start) * sp.inner, length * sp.inner,
                out.begin() + o * length * sp.inner);
  }
  return make_result("slice", std::move(out_shape), std::move(out), {x}, [sp, start, length](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      const double* g = self.grad.data() + o * length * sp.inner;
      double* dst = gx + (o * sp.extent + start) * sp.inner;
      for (std::size_t i = 0; i < length * sp.inner; ++i) dst[i] += g[i];
    }
  });
}

Tensor mse_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw DimensionError("mse_loss: prediction " + shape_string(prediction.shape()) + " vs target " +
                         shape_string(target.shape()));
  }
  Tensor d = sub(prediction, target);
  return mean(mul(d, d));
}

Tensor mae_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw DimensionError("mae_loss: prediction " + shape_string(prediction.shape()) + " vs target " +
                         shape_string(target.shape()));
  }
  return mean(abs(sub(prediction, target)));
}

}  // namespace hiformer::ad
