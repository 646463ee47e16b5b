#include "topicaux/num/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topicaux/common/error.hpp"

namespace topicaux::num {

namespace {

void require(bool ok, const char* op) {
  if (!ok) throw DimensionError(std::string("shape mismatch in ") + op);
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Unary elementwise op whose derivative is expressed through (x, y).
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  return t.record(map(a.value(), fwd), {a}, [ia, deriv](Tape& tp, std::size_t self) {
    const Matrix& x = tp.value(ia);
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), "matmul");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(num::matmul(a.value(), b.value()), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    if (tp.requires_grad(ia)) add_inplace(tp.accumulate(ia), matmul_nt(g, tp.value(ib)));
    if (tp.requires_grad(ib)) add_inplace(tp.accumulate(ib), matmul_tn(tp.value(ia), g));
  });
}

Var add_bias(Var x, Var bias) {
  require(bias.rows() == 1 && bias.cols() == x.cols(), "add_bias");
  Matrix out = x.value();
  const Matrix& b = bias.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  Tape& t = x.tape();
  const std::size_t ix = x.id(), ib = bias.id();
  return t.record(std::move(out), {x, bias}, [ix, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    if (tp.requires_grad(ix)) add_inplace(tp.accumulate(ix), g);
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.accumulate(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Var mul_row(Var x, Var row) {
  require(row.rows() == 1 && row.cols() == x.cols(), "mul_row");
  Matrix out = x.value();
  const Matrix& w = row.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto o = out.row(r);
    for (std::size_t c = 0; c < o.size(); ++c) o[c] *= w[c];
  }
  Tape& t = x.tape();
  const std::size_t ix = x.id(), iw = row.id();
  return t.record(std::move(out), {x, row}, [ix, iw](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    const Matrix& xv = tp.value(ix);
    const Matrix& wv = tp.value(iw);
    if (tp.requires_grad(ix)) {
      Matrix& gx = tp.accumulate(ix);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gx(r, c) += g(r, c) * wv[c];
    }
    if (tp.requires_grad(iw)) {
      Matrix& gw = tp.accumulate(iw);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gw[c] += g(r, c) * xv(r, c);
    }
  });
}

Var add(Var a, Var b) {
  require(a.value().same_shape(b.value()), "add");
  Matrix out = a.value();
  add_inplace(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    if (tp.requires_grad(ia)) add_inplace(tp.accumulate(ia), g);
    if (tp.requires_grad(ib)) add_inplace(tp.accumulate(ib), g);
  });
}

Var sub(Var a, Var b) {
  require(a.value().same_shape(b.value()), "sub");
  Matrix out = a.value();
  const Matrix& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    if (tp.requires_grad(ia)) add_inplace(tp.accumulate(ia), g);
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.accumulate(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require(a.value().same_shape(b.value()), "mul");
  Matrix out = a.value();
  const Matrix& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.accumulate(ia);
      const Matrix& bv = tp.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.accumulate(ib);
      const Matrix& av = tp.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), [factor](double x) { return x * factor; }), {a},
                         [ia, factor](Tape& tp, std::size_t self) {
                           const Matrix& g = tp.adjoint(self);
                           Matrix& ga = tp.accumulate(ia);
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
                         });
}

Var mul_const(Var a, const Matrix& c) {
  require(a.value().same_shape(c), "mul_const");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, c](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c[i];
  });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var softplus(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) { return sigmoid(x); });
}

Var row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - m));
    for (double& v : o) v /= z;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var log_row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - m);
    const double lse = m + std::log(z);
    auto o = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double gs = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) gs += g(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += g(r, c) - std::exp(y(r, c)) * gs;
    }
  });
}

Var masked_row_softmax(Var a, const Matrix& mask) {
  const Matrix& x = a.value();
  require(x.same_shape(mask), "masked_row_softmax");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double m = -INFINITY;
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask(r, c) != 0.0) m = std::max(m, x(r, c));
    if (m == -INFINITY) continue;
    double z = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask(r, c) != 0.0) z += (out(r, c) = std::exp(x(r, c) - m));
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) /= z;
  }
  const std::size_t ia = a.id();
  // Masked entries have y == 0, so the dense softmax rule leaves them untouched.
  return a.tape().record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var row_minmax_normalize(Var a, double eps) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  std::vector<std::size_t> argmin(x.rows()), argmax(x.rows());
  std::vector<double> range(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    if (in.empty()) continue;
    argmin[r] = static_cast<std::size_t>(std::min_element(in.begin(), in.end()) - in.begin());
    argmax[r] = static_cast<std::size_t>(std::max_element(in.begin(), in.end()) - in.begin());
    const double lo = in[argmin[r]];
    const double rg = in[argmax[r]] - lo;
    if (rg < eps) continue;  // constant row -> 0
    range[r] = rg;
    auto o = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = (in[c] - lo) / rg;
    o[argmin[r]] = 0.0;
    o[argmax[r]] = 1.0;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a},
                         [ia, argmin = std::move(argmin), argmax = std::move(argmax),
                          range = std::move(range)](Tape& tp, std::size_t self) {
                           const Matrix& y = tp.value(self);
                           const Matrix& g = tp.adjoint(self);
                           Matrix& ga = tp.accumulate(ia);
                           for (std::size_t r = 0; r < y.rows(); ++r) {
                             if (range[r] == 0.0) continue;
                             const double inv = 1.0 / range[r];
                             double to_min = 0.0, to_max = 0.0;
                             for (std::size_t c = 0; c < y.cols(); ++c) {
                               ga(r, c) += g(r, c) * inv;
                               to_min += g(r, c) * (y(r, c) - 1.0) * inv;
                               to_max -= g(r, c) * y(r, c) * inv;
                             }
                             ga(r, argmin[r]) += to_min;
                             ga(r, argmax[r]) += to_max;
                           }
                         });
}

Var dropout(Var a, double p, RngStream& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  const Matrix& x = a.value();
  Matrix mask(x.rows(), x.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() >= p ? keep_scale : 0.0;
  return mul_const(a, mask);
}

bool is_degenerate_batch(const Matrix& x) {
  if (x.rows() <= 1) return true;
  const auto first = x.row(0);
  for (std::size_t r = 1; r < x.rows(); ++r) {
    const auto row = x.row(r);
    if (!std::equal(row.begin(), row.end(), first.begin())) return false;
  }
  return true;
}

Var batchnorm_1d(Var x, BatchNormState& state, bool training) {
  const Matrix& in = x.value();
  const std::size_t B = in.rows(), C = in.cols();
  require(state.running_mean.rows() == 1 && state.running_mean.cols() == C, "batchnorm_1d");
  const std::size_t ix = x.id();

  if (!training || is_degenerate_batch(in)) {
    Matrix inv_std(1, C);
    for (std::size_t c = 0; c < C; ++c) inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
    Matrix out(B, C);
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t c = 0; c < C; ++c) out(r, c) = (in(r, c) - state.running_mean[c]) * inv_std[c];
    return x.tape().record(std::move(out), {x}, [ix, inv_std](Tape& tp, std::size_t self) {
      const Matrix& g = tp.adjoint(self);
      Matrix& gx = tp.accumulate(ix);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gx(r, c) += g(r, c) * inv_std[c];
    });
  }

  Matrix mu(1, C), var(1, C), inv_std(1, C);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < C; ++c) mu[c] += in(r, c);
  for (std::size_t c = 0; c < C; ++c) mu[c] /= static_cast<double>(B);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const double d = in(r, c) - mu[c];
      var[c] += d * d;
    }
  for (std::size_t c = 0; c < C; ++c) {
    var[c] /= static_cast<double>(B);
    inv_std[c] = 1.0 / std::sqrt(var[c] + state.eps);
  }
  Matrix out(B, C);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < C; ++c) out(r, c) = (in(r, c) - mu[c]) * inv_std[c];

  const double m = state.momentum;
  const double unbias = static_cast<double>(B) / static_cast<double>(B - 1);
  for (std::size_t c = 0; c < C; ++c) {
    state.running_mean[c] = (1.0 - m) * state.running_mean[c] + m * mu[c];
    state.running_var[c] = (1.0 - m) * state.running_var[c] + m * var[c] * unbias;
  }

  return x.tape().record(std::move(out), {x}, [ix, inv_std](Tape& tp, std::size_t self) {
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.adjoint(self);
    Matrix& gx = tp.accumulate(ix);
    const std::size_t rows = y.rows(), cols = y.cols();
    const double n = static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      double g_mean = 0.0, gy_mean = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        g_mean += g(r, c);
        gy_mean += g(r, c) * y(r, c);
      }
      g_mean /= n;
      gy_mean /= n;
      for (std::size_t r = 0; r < rows; ++r)
        gx(r, c) += inv_std[c] * (g(r, c) - g_mean - y(r, c) * gy_mean);
    }
  });
}

Var sum(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(Matrix::scalar(a.value().sum()), {a}, [ia](Tape& tp, std::size_t self) {
    const double g = tp.adjoint(self)[0];
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var row_sum(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double v : x.row(r)) out[r] += v;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Matrix& g = tp.adjoint(self);
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (double& v : ga.row(r)) v += g[r];
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  const std::size_t ia = a.id();
  return a.tape().record(Matrix::scalar(a.value().sum() / n), {a}, [ia, n](Tape& tp, std::size_t self) {
    const double g = tp.adjoint(self)[0] / n;
    Matrix& ga = tp.accumulate(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

}  // namespace topicaux::num
