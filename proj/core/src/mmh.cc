#include "mmalign/mmh.h"

#include <cmath>

#include "mmalign/ops.h"

namespace mmalign {

using namespace ops;

MhcaResult MhcaForward(const MhcaParams& params, const std::vector<Var>& h) {
  const int num_modalities = static_cast<int>(h.size());
  const int heads = params.num_heads();
  if (num_modalities < 1) throw UsageError("mhca: no modalities");
  if (heads < 1) throw UsageError("mhca: no heads");
  const Shape& s0 = h[0].shape();
  if (s0.size() != 2) throw ShapeError("mhca", s0, params.output.shape());
  const int d = s0[1];
  if (params.output.shape() != Shape{d, d}) {
    throw ShapeError("mhca output projection", s0, params.output.shape());
  }
  for (const Var& hm : h) {
    if (hm.shape() != s0) throw ShapeError("mhca modality", s0, hm.shape());
  }
  const int d_head = params.query[0].shape()[1];
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(d_head));

  MhcaResult result;
  result.beta.resize(heads);
  // head_outputs[m][i]
  std::vector<std::vector<Var>> head_outputs(num_modalities);
  for (int i = 0; i < heads; ++i) {
    std::vector<Var> q, k, v;
    for (const Var& hm : h) {
      q.push_back(MatMul(hm, params.query[i]));
      k.push_back(MatMul(hm, params.key[i]));
      v.push_back(MatMul(hm, params.value[i]));
    }
    for (int m = 0; m < num_modalities; ++m) {
      std::vector<Var> scores;
      for (int j = 0; j < num_modalities; ++j) {
        scores.push_back(SumLastAxis(Mul(q[m], k[j])));
      }
      Var beta = Softmax(Scale(Concat(scores), scale));
      result.beta[i].push_back(beta);
      Var out = Mul(Slice(beta, 0, 1), v[0]);
      for (int j = 1; j < num_modalities; ++j) {
        out = Add(out, Mul(Slice(beta, j, j + 1), v[j]));
      }
      head_outputs[m].push_back(out);
    }
  }
  for (int m = 0; m < num_modalities; ++m) {
    Var joined = heads == 1 ? head_outputs[m][0] : Concat(head_outputs[m]);
    Var projected = MatMul(joined, params.output);
    result.attended.push_back(
        LayerNorm(Add(projected, h[m]), params.ln_gain, params.ln_bias));
  }
  return result;
}

Var FfnForward(const FfnParams& params, Var attended) {
  if (!params.enabled) throw UsageError("ffn_forward called while disabled");
  Var hidden = Relu(Add(MatMul(attended, params.w1), params.b1));
  Var out = Add(MatMul(hidden, params.w2), params.b2);
  return LayerNorm(Add(out, attended), params.ln_gain, params.ln_bias);
}

Var MetaWeights(const std::vector<std::vector<Var>>& beta) {
  const int heads = static_cast<int>(beta.size());
  if (heads == 0 || beta[0].empty()) throw UsageError("meta_weights: empty beta");
  const int num_modalities = static_cast<int>(beta[0].size());
  for (const auto& per_head : beta) {
    if (static_cast<int>(per_head.size()) != num_modalities) {
      throw UsageError("meta_weights: ragged beta");
    }
    for (const Var& b : per_head) {
      const Tensor& t = b.value();
      if (t.rank() != 2 || t.dim(1) != num_modalities) {
        throw ShapeError("meta_weights", t.shape(),
                         {t.rank() > 0 ? t.dim(0) : 0, num_modalities});
      }
      for (int64_t r = 0; r < t.outer_size(); ++r) {
        Scalar s = 0;
        for (Scalar x : t.row(static_cast<int>(r))) {
          if (x < 0) throw NumericalError("meta_weights: negative beta entry");
          s += x;
        }
        if (std::abs(s - 1) > 1e-6) {
          throw NumericalError("meta_weights: beta row sums to " +
                               std::to_string(s));
        }
      }
    }
  }
  // Column sums over every query modality and head: attention received.
  Var received;
  for (const auto& per_head : beta) {
    for (const Var& b : per_head) {
      received = received.valid() ? Add(received, b) : b;
    }
  }
  const Scalar norm = std::sqrt(Scalar(num_modalities * heads));
  return Softmax(Scale(received, Scalar(1) / norm));
}

Fusion Fuse(Var weights, const std::vector<Var>& h,
            const std::vector<Var>& attended) {
  const int num_modalities = static_cast<int>(h.size());
  if (weights.shape().size() != 2 || weights.shape()[1] != num_modalities ||
      static_cast<int>(attended.size()) != num_modalities) {
    throw UsageError("fuse: weights cover " +
                     std::to_string(weights.shape().back()) +
                     " modalities, embeddings cover " +
                     std::to_string(num_modalities) + " and " +
                     std::to_string(attended.size()));
  }
  std::vector<Var> early, late;
  for (int m = 0; m < num_modalities; ++m) {
    Var w = Slice(weights, m, m + 1);
    early.push_back(Mul(w, h[m]));
    late.push_back(Mul(w, attended[m]));
  }
  return {Concat(early), Concat(late)};
}

}  // namespace mmalign
