#include "fixtures.h"

namespace mmalign::testing {

MhcaFixture RandomMhca(Tape& tape, Rng& rng, int d, int heads) {
  MhcaFixture f;
  const int d_h = d / heads;
  for (int i = 0; i < heads; ++i) {
    Tensor q = rng.NormalTensor({d, d_h}, 0.7);
    Tensor k = rng.NormalTensor({d, d_h}, 0.7);
    Tensor v = rng.NormalTensor({d, d_h}, 0.7);
    f.params.query.push_back(tape.Leaf(q));
    f.params.key.push_back(tape.Leaf(k));
    f.params.value.push_back(tape.Leaf(v));
    f.weights.q.push_back(ToMat(q));
    f.weights.k.push_back(ToMat(k));
    f.weights.v.push_back(ToMat(v));
  }
  Tensor o = rng.NormalTensor({d, d}, 0.5);
  Tensor g = rng.UniformTensor({d}, 1.0);
  for (Scalar& x : g.mutable_data()) x += 1;
  Tensor b = rng.NormalTensor({d}, 0.3);
  f.params.output = tape.Leaf(o);
  f.params.ln_gain = tape.Leaf(g);
  f.params.ln_bias = tape.Leaf(b);
  f.weights.o = ToMat(o);
  f.weights.gain = ToVec(g);
  f.weights.bias = ToVec(b);
  return f;
}

FfnFixture RandomFfn(Tape& tape, Rng& rng, int d, int d_in) {
  FfnFixture f;
  Tensor w1 = rng.NormalTensor({d, d_in}, 0.6), b1 = rng.NormalTensor({1, d_in}, 0.3);
  Tensor w2 = rng.NormalTensor({d_in, d}, 0.6), b2 = rng.NormalTensor({1, d}, 0.3);
  Tensor g = rng.UniformTensor({d}, 1.0), b = rng.NormalTensor({d}, 0.3);
  for (Scalar& x : g.mutable_data()) x += 1;
  f.params = {tape.Leaf(w1), tape.Leaf(b1), tape.Leaf(w2), tape.Leaf(b2),
              tape.Leaf(g), tape.Leaf(b), true};
  f.w1 = ToMat(w1);
  f.w2 = ToMat(w2);
  f.b1 = ToVec(b1);
  f.b2 = ToVec(b2);
  f.gain = ToVec(g);
  f.bias = ToVec(b);
  return f;
}

std::vector<Var> RandomModalities(Tape& tape, Rng& rng, int entities, int d,
                                  int num_modalities) {
  std::vector<Var> h;
  for (int m = 0; m < num_modalities; ++m) {
    h.push_back(tape.Leaf(rng.NormalTensor({entities, d}, 1.0)));
  }
  return h;
}

std::vector<std::vector<Mat>> BetaByEntity(
    const std::vector<std::vector<Var>>& beta) {
  const int heads = static_cast<int>(beta.size());
  const int num_m = static_cast<int>(beta[0].size());
  const int entities = beta[0][0].value().dim(0);
  std::vector<std::vector<Mat>> out(entities, std::vector<Mat>(heads, Mat(num_m, Vec(num_m))));
  for (int i = 0; i < heads; ++i) {
    for (int m = 0; m < num_m; ++m) {
      const Tensor& b = beta[i][m].value();
      for (int e = 0; e < entities; ++e) {
        for (int j = 0; j < num_m; ++j) out[e][i][m][j] = b.at(e, j);
      }
    }
  }
  return out;
}

}  // namespace mmalign::testing
