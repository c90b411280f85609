#ifndef MMALIGN_TESTS_ORACLES_H_
#define MMALIGN_TESTS_ORACLES_H_

// Straight-line scalar-loop reimplementations used as test oracles. They
// share no code with the library beyond the Tensor container.

#include <utility>
#include <vector>

#include "mmalign/tensor.h"

namespace mmalign::testing {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Mat ToMat(const Tensor& t);
Vec ToVec(const Tensor& t);
double MaxAbsDiff(const Mat& a, const Mat& b);
double MaxAbsDiff(const Tensor& a, const Mat& b);

struct GatWeights {
  Vec diag;
  Mat w[2][2];  // [layer][head], d_in x d_out
  Vec a_src[2][2];
  Vec a_dst[2][2];
  double slope = 0.2;
};

// Neighbour lists include self-loops.
Mat GatOracle(const GatWeights& p, const std::vector<std::vector<int>>& nbrs,
              const Mat& x);

struct MhcaWeights {
  std::vector<Mat> q, k, v;  // per head, d x d_h
  Mat o;                     // d x d
  Vec gain, bias;
};

struct MhcaOracleOut {
  std::vector<Mat> attended;             // per modality, entities x d
  std::vector<std::vector<Mat>> beta;    // [entity][head] -> |M| x |M|
};

MhcaOracleOut MhcaOracle(const MhcaWeights& p, const std::vector<Mat>& h);

Mat FfnOracle(const Mat& w1, const Vec& b1, const Mat& w2, const Vec& b2,
              const Vec& gain, const Vec& bias, const Mat& x);

// beta[entity][head] is |M| x |M| (query, key); returns entities x |M|.
Mat MetaWeightsOracle(const std::vector<std::vector<Mat>>& beta);

// Mean over pairs of -(log p_fwd + log p_bwd) / 2 with explicit negative
// rows per pair and direction.
double ContrastiveOracle(const Mat& emb, const std::vector<std::pair<int, int>>& batch,
                         const std::vector<std::vector<int>>& neg_fwd,
                         const std::vector<std::vector<int>>& neg_bwd,
                         double tau, bool normalize);

// Ranks by fully sorting (similarity desc, index asc) over the candidates.
std::vector<int> RankOracle(const Mat& source, const Mat& target,
                            const std::vector<std::pair<int, int>>& test,
                            const std::vector<int>& candidates);

}  // namespace mmalign::testing

#endif  // MMALIGN_TESTS_ORACLES_H_
