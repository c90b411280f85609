#include "mmalign/ops.h"

#include <algorithm>
#include <cmath>

namespace mmalign::ops {
namespace {

Tape* TapeOf(const Var& a) {
  if (!a.valid()) throw Error(ErrorKind::kUsage, "op on an unbound variable");
  return a.tape();
}

Tape* TapeOf(const Var& a, const Var& b) {
  Tape* t = TapeOf(a);
  if (TapeOf(b) != t) {
    throw Error(ErrorKind::kUsage, "op mixes variables from two tapes");
  }
  return t;
}

// Index of the node the next Record() call will create.
int NextId(const Tape* t) { return t->size(); }

struct Broadcast {
  Shape out;
  std::vector<int64_t> stride_a;
  std::vector<int64_t> stride_b;
  bool same = false;
};

std::vector<int64_t> Strides(const Shape& shape, const Shape& out) {
  // Right-align `shape` against `out`; broadcast dims get stride 0.
  const int rank = static_cast<int>(out.size());
  const int offset = rank - static_cast<int>(shape.size());
  std::vector<int64_t> strides(rank, 0);
  int64_t s = 1;
  for (int i = rank - 1; i >= offset; --i) {
    const int d = shape[i - offset];
    strides[i] = (d == 1 && out[i] != 1) ? 0 : s;
    s *= d;
  }
  return strides;
}

Broadcast MakeBroadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast bc;
  if (a == b) {
    bc.out = a;
    bc.same = true;
    return bc;
  }
  const int rank = static_cast<int>(std::max(a.size(), b.size()));
  bc.out.assign(rank, 1);
  for (int i = 0; i < rank; ++i) {
    const int ia = i - (rank - static_cast<int>(a.size()));
    const int ib = i - (rank - static_cast<int>(b.size()));
    const int da = ia >= 0 ? a[ia] : 1;
    const int db = ib >= 0 ? b[ib] : 1;
    if (da != db && da != 1 && db != 1) throw ShapeError(op, a, b);
    bc.out[i] = std::max(da, db);
  }
  bc.stride_a = Strides(a, bc.out);
  bc.stride_b = Strides(b, bc.out);
  return bc;
}

// Calls f(k, ia, ib) for every flat output index k with the matching flat
// indices into both operands.
template <typename F>
void ForEach(const Broadcast& bc, F&& f) {
  const int64_t n = ShapeSize(bc.out);
  if (bc.same) {
    for (int64_t k = 0; k < n; ++k) f(k, k, k);
    return;
  }
  const int rank = static_cast<int>(bc.out.size());
  std::vector<int> idx(rank, 0);
  int64_t ia = 0, ib = 0;
  for (int64_t k = 0; k < n; ++k) {
    f(k, ia, ib);
    for (int d = rank - 1; d >= 0; --d) {
      if (++idx[d] < bc.out[d]) {
        ia += bc.stride_a[d];
        ib += bc.stride_b[d];
        break;
      }
      ia -= bc.stride_a[d] * (bc.out[d] - 1);
      ib -= bc.stride_b[d] * (bc.out[d] - 1);
      idx[d] = 0;
    }
  }
}

void RequireRank2(const char* op, const Var& a) {
  if (a.value().rank() != 2) {
    throw Error(ErrorKind::kShape, std::string(op) + ": expected rank 2, got " +
                                       ShapeString(a.shape()));
  }
}

template <typename Fwd, typename Bwd>
Var Unary(const char* op, Var a, Fwd fwd, Bwd bwd) {
  Tape* t = TapeOf(a);
  const Tensor& x = a.value();
  Tensor y(x.shape(), std::vector<Scalar>(x.size()));
  for (int64_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const int out = NextId(t);
  return t->Record(op, std::move(y), {a},
                   [t, a, out, bwd](const Tensor& d, std::vector<Tensor>& g) {
                     const Tensor& x = a.value();
                     const Tensor& y = t->value(out);
                     Tensor gx(x.shape());
                     for (int64_t i = 0; i < x.size(); ++i) {
                       gx[i] = bwd(x[i], y[i], d[i]);
                     }
                     g[0] = std::move(gx);
                   });
}

}  // namespace

Var MatMul(Var a, Var b) {
  Tape* t = TapeOf(a, b);
  RequireRank2("matmul", a);
  RequireRank2("matmul", b);
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  if (x.dim(1) != w.dim(0)) throw ShapeError("matmul", x.shape(), w.shape());
  const int n = x.dim(0), k = x.dim(1), m = w.dim(1);
  Tensor y({n, m});
  for (int i = 0; i < n; ++i) {
    Scalar* yr = &y[int64_t(i) * m];
    for (int p = 0; p < k; ++p) {
      const Scalar xv = x[int64_t(i) * k + p];
      if (xv == 0) continue;
      const Scalar* wr = &w.data()[int64_t(p) * m];
      for (int j = 0; j < m; ++j) yr[j] += xv * wr[j];
    }
  }
  return t->Record(
      "matmul", std::move(y), {a, b},
      [a, b, n, k, m](const Tensor& d, std::vector<Tensor>& g) {
        const Tensor& x = a.value();
        const Tensor& w = b.value();
        if (a.requires_grad()) {
          // dx = d w^T
          Tensor gx({n, k});
          for (int i = 0; i < n; ++i) {
            for (int p = 0; p < k; ++p) {
              Scalar s = 0;
              const Scalar* dr = &d.data()[int64_t(i) * m];
              const Scalar* wr = &w.data()[int64_t(p) * m];
              for (int j = 0; j < m; ++j) s += dr[j] * wr[j];
              gx[int64_t(i) * k + p] = s;
            }
          }
          g[0] = std::move(gx);
        }
        if (b.requires_grad()) {
          // dw = x^T d
          Tensor gw({k, m});
          for (int i = 0; i < n; ++i) {
            const Scalar* dr = &d.data()[int64_t(i) * m];
            for (int p = 0; p < k; ++p) {
              const Scalar xv = x[int64_t(i) * k + p];
              if (xv == 0) continue;
              Scalar* gr = &gw[int64_t(p) * m];
              for (int j = 0; j < m; ++j) gr[j] += xv * dr[j];
            }
          }
          g[1] = std::move(gw);
        }
      });
}

Var Transpose(Var a) {
  Tape* t = TapeOf(a);
  RequireRank2("transpose", a);
  const Tensor& x = a.value();
  const int n = x.dim(0), m = x.dim(1);
  Tensor y({m, n});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) y.at(j, i) = x.at(i, j);
  }
  return t->Record("transpose", std::move(y), {a},
                   [n, m](const Tensor& d, std::vector<Tensor>& g) {
                     Tensor gx({n, m});
                     for (int i = 0; i < n; ++i) {
                       for (int j = 0; j < m; ++j) gx.at(i, j) = d.at(j, i);
                     }
                     g[0] = std::move(gx);
                   });
}

Var Add(Var a, Var b) {
  Tape* t = TapeOf(a, b);
  Broadcast bc = MakeBroadcast("add", a.shape(), b.shape());
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  Tensor y(bc.out);
  ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) { y[k] = x[ia] + w[ib]; });
  return t->Record("add", std::move(y), {a, b},
                   [a, b, bc](const Tensor& d, std::vector<Tensor>& g) {
                     Tensor ga(a.shape()), gb(b.shape());
                     ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) {
                       ga[ia] += d[k];
                       gb[ib] += d[k];
                     });
                     g[0] = std::move(ga);
                     g[1] = std::move(gb);
                   });
}

Var Sub(Var a, Var b) {
  Tape* t = TapeOf(a, b);
  Broadcast bc = MakeBroadcast("sub", a.shape(), b.shape());
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  Tensor y(bc.out);
  ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) { y[k] = x[ia] - w[ib]; });
  return t->Record("sub", std::move(y), {a, b},
                   [a, b, bc](const Tensor& d, std::vector<Tensor>& g) {
                     Tensor ga(a.shape()), gb(b.shape());
                     ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) {
                       ga[ia] += d[k];
                       gb[ib] -= d[k];
                     });
                     g[0] = std::move(ga);
                     g[1] = std::move(gb);
                   });
}

Var Mul(Var a, Var b) {
  Tape* t = TapeOf(a, b);
  Broadcast bc = MakeBroadcast("mul", a.shape(), b.shape());
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  Tensor y(bc.out);
  ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) { y[k] = x[ia] * w[ib]; });
  return t->Record("mul", std::move(y), {a, b},
                   [a, b, bc](const Tensor& d, std::vector<Tensor>& g) {
                     const Tensor& x = a.value();
                     const Tensor& w = b.value();
                     Tensor ga(a.shape()), gb(b.shape());
                     ForEach(bc, [&](int64_t k, int64_t ia, int64_t ib) {
                       ga[ia] += d[k] * w[ib];
                       gb[ib] += d[k] * x[ia];
                     });
                     g[0] = std::move(ga);
                     g[1] = std::move(gb);
                   });
}

Var Scale(Var a, Scalar s) {
  return Unary(
      "scale", a, [s](Scalar x) { return s * x; },
      [s](Scalar, Scalar, Scalar d) { return s * d; });
}

Var Exp(Var a) {
  return Unary(
      "exp", a, [](Scalar x) { return std::exp(x); },
      [](Scalar, Scalar y, Scalar d) { return d * y; });
}

Var Log(Var a) {
  for (Scalar v : a.value().data()) {
    if (!(v > 0)) {
      throw NumericalError("log: non-positive input " + std::to_string(v) +
                           " in tensor of shape " + ShapeString(a.shape()));
    }
  }
  return Unary(
      "log", a, [](Scalar x) { return std::log(x); },
      [](Scalar x, Scalar, Scalar d) { return d / x; });
}

Var Relu(Var a) {
  return Unary(
      "relu", a, [](Scalar x) { return x > 0 ? x : Scalar(0); },
      [](Scalar x, Scalar, Scalar d) { return x > 0 ? d : Scalar(0); });
}

Var LeakyRelu(Var a, Scalar slope) {
  return Unary(
      "leaky_relu", a, [slope](Scalar x) { return x > 0 ? x : slope * x; },
      [slope](Scalar x, Scalar, Scalar d) { return x > 0 ? d : slope * d; });
}

Var Elu(Var a) {
  return Unary(
      "elu", a, [](Scalar x) { return x > 0 ? x : std::expm1(x); },
      [](Scalar x, Scalar y, Scalar d) { return x > 0 ? d : d * (y + 1); });
}

Var ClampMin(Var a, Scalar lo) {
  return Unary(
      "clamp_min", a, [lo](Scalar x) { return x > lo ? x : lo; },
      [lo](Scalar x, Scalar, Scalar d) { return x > lo ? d : Scalar(0); });
}

Var Concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kShape, "concat: no inputs");
  Tape* t = TapeOf(parts[0]);
  const Shape& first = parts[0].shape();
  if (first.empty()) throw Error(ErrorKind::kShape, "concat: rank-0 input");
  Shape outer(first.begin(), first.end() - 1);
  std::vector<int> widths;
  int total = 0;
  for (const Var& p : parts) {
    TapeOf(p, parts[0]);
    const Shape& s = p.shape();
    if (s.size() != first.size() ||
        !std::equal(outer.begin(), outer.end(), s.begin())) {
      throw ShapeError("concat", first, s);
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = outer;
  out_shape.push_back(total);
  Tensor y(out_shape);
  const int64_t rows = y.outer_size();
  int offset = 0;
  for (size_t p = 0; p < parts.size(); ++p) {
    const Tensor& x = parts[p].value();
    for (int64_t r = 0; r < rows; ++r) {
      std::copy_n(&x.data()[r * widths[p]], widths[p],
                  &y[r * total + offset]);
    }
    offset += widths[p];
  }
  return t->Record(
      "concat", std::move(y), parts,
      [parts, widths, total, rows](const Tensor& d, std::vector<Tensor>& g) {
        int offset = 0;
        for (size_t p = 0; p < parts.size(); ++p) {
          Tensor gp(parts[p].shape());
          for (int64_t r = 0; r < rows; ++r) {
            std::copy_n(&d.data()[r * total + offset], widths[p],
                        &gp[r * widths[p]]);
          }
          offset += widths[p];
          g[p] = std::move(gp);
        }
      });
}

Var Slice(Var a, int begin, int end) {
  Tape* t = TapeOf(a);
  const Shape& s = a.shape();
  if (s.empty() || begin < 0 || end > s.back() || begin >= end) {
    throw Error(ErrorKind::kShape, "slice: range [" + std::to_string(begin) +
                                       ", " + std::to_string(end) +
                                       ") invalid for " + ShapeString(s));
  }
  const int width = end - begin;
  const int full = s.back();
  Shape out_shape = s;
  out_shape.back() = width;
  Tensor y(out_shape);
  const int64_t rows = y.outer_size();
  const Tensor& x = a.value();
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(&x.data()[r * full + begin], width, &y[r * width]);
  }
  return t->Record("slice", std::move(y), {a},
                   [a, begin, width, full, rows](const Tensor& d,
                                                 std::vector<Tensor>& g) {
                     Tensor gx(a.shape());
                     for (int64_t r = 0; r < rows; ++r) {
                       std::copy_n(&d.data()[r * width], width,
                                   &gx[r * full + begin]);
                     }
                     g[0] = std::move(gx);
                   });
}

Var GatherRows(Var a, const std::vector<int>& rows) {
  Tape* t = TapeOf(a);
  RequireRank2("gather_rows", a);
  const Tensor& x = a.value();
  const int n = x.dim(0), m = x.dim(1);
  if (rows.empty()) throw Error(ErrorKind::kShape, "gather_rows: no rows");
  for (int r : rows) {
    if (r < 0 || r >= n) {
      throw Error(ErrorKind::kShape, "gather_rows: row " + std::to_string(r) +
                                         " out of range for " +
                                         ShapeString(x.shape()));
    }
  }
  Tensor y({static_cast<int>(rows.size()), m});
  for (size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(&x.data()[int64_t(rows[i]) * m], m, &y[int64_t(i) * m]);
  }
  return t->Record("gather_rows", std::move(y), {a},
                   [a, rows, m](const Tensor& d, std::vector<Tensor>& g) {
                     Tensor gx(a.shape());
                     for (size_t i = 0; i < rows.size(); ++i) {
                       Scalar* dst = &gx[int64_t(rows[i]) * m];
                       const Scalar* src = &d.data()[int64_t(i) * m];
                       for (int j = 0; j < m; ++j) dst[j] += src[j];
                     }
                     g[0] = std::move(gx);
                   });
}

Var Softmax(Var a) {
  Tape* t = TapeOf(a);
  const Tensor& x = a.value();
  if (x.rank() == 0) throw Error(ErrorKind::kShape, "softmax: rank-0 input");
  const int n = x.last_dim();
  Tensor y(x.shape());
  for (int64_t r = 0; r < x.outer_size(); ++r) {
    const Scalar* xr = &x.data()[r * n];
    Scalar* yr = &y[r * n];
    const Scalar mx = *std::max_element(xr, xr + n);
    Scalar z = 0;
    for (int j = 0; j < n; ++j) z += (yr[j] = std::exp(xr[j] - mx));
    for (int j = 0; j < n; ++j) yr[j] /= z;
  }
  const int out = NextId(t);
  return t->Record("softmax", std::move(y), {a},
                   [t, out, n](const Tensor& d, std::vector<Tensor>& g) {
                     const Tensor& y = t->value(out);
                     Tensor gx(y.shape());
                     for (int64_t r = 0; r < y.outer_size(); ++r) {
                       const Scalar* yr = &y.data()[r * n];
                       const Scalar* dr = &d.data()[r * n];
                       Scalar dot = 0;
                       for (int j = 0; j < n; ++j) dot += yr[j] * dr[j];
                       for (int j = 0; j < n; ++j) {
                         gx[r * n + j] = yr[j] * (dr[j] - dot);
                       }
                     }
                     g[0] = std::move(gx);
                   });
}

Var LogSoftmax(Var a) {
  Tape* t = TapeOf(a);
  const Tensor& x = a.value();
  if (x.rank() == 0) throw Error(ErrorKind::kShape, "log_softmax: rank-0 input");
  const int n = x.last_dim();
  Tensor y(x.shape());
  for (int64_t r = 0; r < x.outer_size(); ++r) {
    const Scalar* xr = &x.data()[r * n];
    const Scalar mx = *std::max_element(xr, xr + n);
    Scalar z = 0;
    for (int j = 0; j < n; ++j) z += std::exp(xr[j] - mx);
    const Scalar lse = mx + std::log(z);
    for (int j = 0; j < n; ++j) y[r * n + j] = xr[j] - lse;
  }
  const int out = NextId(t);
  return t->Record("log_softmax", std::move(y), {a},
                   [t, out, n](const Tensor& d, std::vector<Tensor>& g) {
                     const Tensor& y = t->value(out);
                     Tensor gx(y.shape());
                     for (int64_t r = 0; r < y.outer_size(); ++r) {
                       const Scalar* yr = &y.data()[r * n];
                       const Scalar* dr = &d.data()[r * n];
                       Scalar total = 0;
                       for (int j = 0; j < n; ++j) total += dr[j];
                       for (int j = 0; j < n; ++j) {
                         gx[r * n + j] = dr[j] - std::exp(yr[j]) * total;
                       }
                     }
                     g[0] = std::move(gx);
                   });
}

Var LayerNorm(Var x, Var gain, Var bias, Scalar eps) {
  Tape* t = TapeOf(x, gain);
  TapeOf(x, bias);
  const Tensor& xv = x.value();
  if (xv.rank() == 0) throw Error(ErrorKind::kShape, "layer_norm: rank-0 input");
  const int n = xv.last_dim();
  if (gain.value().size() != n) {
    throw ShapeError("layer_norm gain", xv.shape(), gain.shape());
  }
  if (bias.value().size() != n) {
    throw ShapeError("layer_norm bias", xv.shape(), bias.shape());
  }
  const int64_t rows = xv.outer_size();
  Tensor y(xv.shape());
  // Normalized input and per-row inverse std, kept for the backward pass.
  Tensor xhat(xv.shape());
  std::vector<Scalar> inv_std(rows);
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (int64_t r = 0; r < rows; ++r) {
    const Scalar* xr = &xv.data()[r * n];
    Scalar mean = 0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    Scalar var = 0;
    for (int j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= n;
    inv_std[r] = Scalar(1) / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) {
      const Scalar h = (xr[j] - mean) * inv_std[r];
      xhat[r * n + j] = h;
      y[r * n + j] = gv[j] * h + bv[j];
    }
  }
  return t->Record(
      "layer_norm", std::move(y), {x, gain, bias},
      [gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std), n,
       rows](const Tensor& d, std::vector<Tensor>& g) {
        const Tensor& gv = gain.value();
        Tensor gx(xhat.shape());
        Tensor gg(gain.shape()), gb(bias.shape());
        for (int64_t r = 0; r < rows; ++r) {
          const Scalar* dr = &d.data()[r * n];
          const Scalar* hr = &xhat.data()[r * n];
          Scalar mean_dh = 0, mean_dh_h = 0;
          for (int j = 0; j < n; ++j) {
            const Scalar dh = dr[j] * gv[j];
            mean_dh += dh;
            mean_dh_h += dh * hr[j];
            gg[j] += dr[j] * hr[j];
            gb[j] += dr[j];
          }
          mean_dh /= n;
          mean_dh_h /= n;
          for (int j = 0; j < n; ++j) {
            const Scalar dh = dr[j] * gv[j];
            gx[r * n + j] = inv_std[r] * (dh - mean_dh - hr[j] * mean_dh_h);
          }
        }
        g[0] = std::move(gx);
        g[1] = std::move(gg);
        g[2] = std::move(gb);
      });
}

Var L2Normalize(Var a, int* zero_rows) {
  Tape* t = TapeOf(a);
  const Tensor& x = a.value();
  if (x.rank() == 0) throw Error(ErrorKind::kShape, "l2_normalize: rank-0 input");
  const int n = x.last_dim();
  const int64_t rows = x.outer_size();
  Tensor y(x.shape());
  std::vector<Scalar> norms(rows);
  int zeros = 0;
  for (int64_t r = 0; r < rows; ++r) {
    const Scalar* xr = &x.data()[r * n];
    Scalar s = 0;
    for (int j = 0; j < n; ++j) s += xr[j] * xr[j];
    norms[r] = std::sqrt(s);
    if (norms[r] == 0) {
      ++zeros;
      continue;
    }
    for (int j = 0; j < n; ++j) y[r * n + j] = xr[j] / norms[r];
  }
  if (zero_rows != nullptr) *zero_rows = zeros;
  const int out = NextId(t);
  return t->Record(
      "l2_normalize", std::move(y), {a},
      [t, out, n, rows, norms = std::move(norms)](const Tensor& d,
                                                 std::vector<Tensor>& g) {
        const Tensor& y = t->value(out);
        Tensor gx(y.shape());
        for (int64_t r = 0; r < rows; ++r) {
          if (norms[r] == 0) continue;
          const Scalar* yr = &y.data()[r * n];
          const Scalar* dr = &d.data()[r * n];
          Scalar dot = 0;
          for (int j = 0; j < n; ++j) dot += yr[j] * dr[j];
          for (int j = 0; j < n; ++j) {
            gx[r * n + j] = (dr[j] - yr[j] * dot) / norms[r];
          }
        }
        g[0] = std::move(gx);
      });
}

Var Sum(Var a) {
  Tape* t = TapeOf(a);
  Scalar s = 0;
  for (Scalar v : a.value().data()) s += v;
  return t->Record("sum", Tensor::Scalar0(s), {a},
                   [a](const Tensor& d, std::vector<Tensor>& g) {
                     g[0] = Tensor::Full(a.shape(), d.item());
                   });
}

Var Mean(Var a) {
  Tape* t = TapeOf(a);
  const int64_t n = a.value().size();
  Scalar s = 0;
  for (Scalar v : a.value().data()) s += v;
  return t->Record("mean", Tensor::Scalar0(s / n), {a},
                   [a, n](const Tensor& d, std::vector<Tensor>& g) {
                     g[0] = Tensor::Full(a.shape(), d.item() / n);
                   });
}

Var SumLastAxis(Var a) {
  Tape* t = TapeOf(a);
  const Tensor& x = a.value();
  if (x.rank() == 0) throw Error(ErrorKind::kShape, "sum_last_axis: rank-0 input");
  const int n = x.last_dim();
  Shape out_shape = x.shape();
  out_shape.back() = 1;
  Tensor y(out_shape);
  for (int64_t r = 0; r < x.outer_size(); ++r) {
    Scalar s = 0;
    for (int j = 0; j < n; ++j) s += x[r * n + j];
    y[r] = s;
  }
  return t->Record("sum_last_axis", std::move(y), {a},
                   [a, n](const Tensor& d, std::vector<Tensor>& g) {
                     Tensor gx(a.shape());
                     for (int64_t i = 0; i < gx.size(); ++i) gx[i] = d[i / n];
                     g[0] = std::move(gx);
                   });
}

}  // namespace mmalign::ops
