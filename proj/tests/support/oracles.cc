#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmalign::testing {

Mat ToMat(const Tensor& t) {
  Mat m(t.dim(0), Vec(t.dim(1)));
  for (int i = 0; i < t.dim(0); ++i) {
    for (int j = 0; j < t.dim(1); ++j) m[i][j] = t.at(i, j);
  }
  return m;
}

Vec ToVec(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

double MaxAbsDiff(const Mat& a, const Mat& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < a[i].size(); ++j) {
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    }
  }
  return worst;
}

double MaxAbsDiff(const Tensor& a, const Mat& b) { return MaxAbsDiff(ToMat(a), b); }

namespace {

Vec RowTimes(const Vec& x, const Mat& w) {
  Vec out(w.empty() ? 0 : w[0].size(), 0.0);
  for (size_t k = 0; k < x.size(); ++k) {
    for (size_t j = 0; j < out.size(); ++j) out[j] += x[k] * w[k][j];
  }
  return out;
}

double Dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Vec LayerNormRow(const Vec& x, const Vec& gain, const Vec& bias) {
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  Vec out(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    out[j] = gain[j] * (x[j] - mean) / std::sqrt(var + 1e-5) + bias[j];
  }
  return out;
}

Vec SoftmaxVec(const Vec& s) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : s) mx = std::max(mx, v);
  Vec out(s.size());
  double z = 0;
  for (size_t j = 0; j < s.size(); ++j) z += out[j] = std::exp(s[j] - mx);
  for (double& v : out) v /= z;
  return out;
}

// One GAT head: out_i = sum_j alpha_ij W x_j over neighbours j.
Mat GatHeadOracle(const Mat& w, const Vec& a_src, const Vec& a_dst,
                  double slope, const std::vector<std::vector<int>>& nbrs,
                  const Mat& x) {
  const size_t n = x.size();
  Mat wx(n);
  for (size_t i = 0; i < n; ++i) wx[i] = RowTimes(x[i], w);
  Mat out(n, Vec(w[0].size(), 0.0));
  for (size_t i = 0; i < n; ++i) {
    Vec e;
    for (int j : nbrs[i]) {
      const double s = Dot(wx[i], a_src) + Dot(wx[j], a_dst);
      e.push_back(s > 0 ? s : slope * s);
    }
    const Vec alpha = SoftmaxVec(e);
    for (size_t t = 0; t < nbrs[i].size(); ++t) {
      for (size_t c = 0; c < out[i].size(); ++c) {
        out[i][c] += alpha[t] * wx[nbrs[i][t]][c];
      }
    }
  }
  return out;
}

}  // namespace

Mat GatOracle(const GatWeights& p, const std::vector<std::vector<int>>& nbrs,
              const Mat& x) {
  Mat h = x;
  for (auto& row : h) {
    for (size_t c = 0; c < row.size(); ++c) row[c] *= p.diag[c];
  }
  const Mat a = GatHeadOracle(p.w[0][0], p.a_src[0][0], p.a_dst[0][0], p.slope, nbrs, h);
  const Mat b = GatHeadOracle(p.w[0][1], p.a_src[0][1], p.a_dst[0][1], p.slope, nbrs, h);
  Mat l1(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    for (double v : a[i]) l1[i].push_back(v);
    for (double v : b[i]) l1[i].push_back(v);
    for (double& v : l1[i]) v = v > 0 ? v : std::exp(v) - 1;
  }
  const Mat c = GatHeadOracle(p.w[1][0], p.a_src[1][0], p.a_dst[1][0], p.slope, nbrs, l1);
  const Mat d = GatHeadOracle(p.w[1][1], p.a_src[1][1], p.a_dst[1][1], p.slope, nbrs, l1);
  Mat out = c;
  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t k = 0; k < out[i].size(); ++k) out[i][k] = 0.5 * (c[i][k] + d[i][k]);
  }
  return out;
}

MhcaOracleOut MhcaOracle(const MhcaWeights& p, const std::vector<Mat>& h) {
  const size_t num_m = h.size();
  const size_t entities = h[0].size();
  const size_t heads = p.q.size();
  const size_t d_h = p.q[0][0].size();
  MhcaOracleOut out;
  out.attended.assign(num_m, Mat(entities));
  out.beta.assign(entities, std::vector<Mat>(heads));
  for (size_t e = 0; e < entities; ++e) {
    std::vector<Vec> joined(num_m);
    for (size_t i = 0; i < heads; ++i) {
      std::vector<Vec> q(num_m), k(num_m), v(num_m);
      for (size_t m = 0; m < num_m; ++m) {
        q[m] = RowTimes(h[m][e], p.q[i]);
        k[m] = RowTimes(h[m][e], p.k[i]);
        v[m] = RowTimes(h[m][e], p.v[i]);
      }
      Mat beta(num_m);
      for (size_t m = 0; m < num_m; ++m) {
        Vec s(num_m);
        for (size_t j = 0; j < num_m; ++j) {
          s[j] = Dot(q[m], k[j]) / std::sqrt(static_cast<double>(d_h));
        }
        beta[m] = SoftmaxVec(s);
        Vec head(d_h, 0.0);
        for (size_t j = 0; j < num_m; ++j) {
          for (size_t c = 0; c < d_h; ++c) head[c] += beta[m][j] * v[j][c];
        }
        joined[m].insert(joined[m].end(), head.begin(), head.end());
      }
      out.beta[e][i] = beta;
    }
    for (size_t m = 0; m < num_m; ++m) {
      Vec r = RowTimes(joined[m], p.o);
      for (size_t c = 0; c < r.size(); ++c) r[c] += h[m][e][c];
      out.attended[m][e] = LayerNormRow(r, p.gain, p.bias);
    }
  }
  return out;
}

Mat FfnOracle(const Mat& w1, const Vec& b1, const Mat& w2, const Vec& b2,
              const Vec& gain, const Vec& bias, const Mat& x) {
  Mat out(x.size());
  for (size_t e = 0; e < x.size(); ++e) {
    Vec hidden = RowTimes(x[e], w1);
    for (size_t c = 0; c < hidden.size(); ++c) {
      hidden[c] = std::max(0.0, hidden[c] + b1[c]);
    }
    Vec r = RowTimes(hidden, w2);
    for (size_t c = 0; c < r.size(); ++c) r[c] += b2[c] + x[e][c];
    out[e] = LayerNormRow(r, gain, bias);
  }
  return out;
}

Mat MetaWeightsOracle(const std::vector<std::vector<Mat>>& beta) {
  Mat out;
  for (const auto& per_entity : beta) {
    const size_t heads = per_entity.size();
    const size_t num_m = per_entity[0].size();
    Vec s(num_m, 0.0);
    for (size_t m = 0; m < num_m; ++m) {
      for (size_t j = 0; j < num_m; ++j) {
        for (size_t i = 0; i < heads; ++i) s[m] += per_entity[i][j][m];
      }
      s[m] /= std::sqrt(static_cast<double>(num_m * heads));
    }
    out.push_back(SoftmaxVec(s));
  }
  return out;
}

double ContrastiveOracle(const Mat& emb,
                         const std::vector<std::pair<int, int>>& batch,
                         const std::vector<std::vector<int>>& neg_fwd,
                         const std::vector<std::vector<int>>& neg_bwd,
                         double tau, bool normalize) {
  auto row = [&](int r) {
    Vec v = emb[r];
    if (normalize) {
      const double n = std::sqrt(Dot(v, v));
      if (n > 0) {
        for (double& x : v) x /= n;
      }
    }
    return v;
  };
  auto log_p = [&](int anchor, int positive, const std::vector<int>& negs) {
    const Vec a = row(anchor);
    const double pos = std::exp(Dot(a, row(positive)) / tau);
    double denom = pos;
    for (int n : negs) denom += std::exp(Dot(a, row(n)) / tau);
    return std::log(std::max(pos / denom, 1e-12));
  };
  double total = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto [a, b] = batch[i];
    total += -0.5 * (log_p(a, b, neg_fwd[i]) + log_p(b, a, neg_bwd[i]));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<int> RankOracle(const Mat& source, const Mat& target,
                            const std::vector<std::pair<int, int>>& test,
                            const std::vector<int>& candidates) {
  auto cosine = [](const Vec& a, const Vec& b) {
    const double na = std::sqrt(Dot(a, a)), nb = std::sqrt(Dot(b, b));
    if (na == 0 || nb == 0) return 0.0;
    return Dot(a, b) / (na * nb);
  };
  std::vector<int> ranks;
  for (const auto& [s, t] : test) {
    std::vector<std::pair<double, int>> order;
    for (int c : candidates) order.emplace_back(-cosine(source[s], target[c]), c);
    std::sort(order.begin(), order.end());
    for (size_t pos = 0; pos < order.size(); ++pos) {
      if (order[pos].second == t) ranks.push_back(static_cast<int>(pos) + 1);
    }
  }
  return ranks;
}

}  // namespace mmalign::testing
