#include "mmalign/similarity.h"

#include <cmath>
#include <numeric>

namespace mmalign {

Tensor NormalizeRows(const Tensor& x) {
  Tensor out = x;
  for (int64_t r = 0; r < x.outer_size(); ++r) {
    auto row = out.mutable_row(static_cast<int>(r));
    Scalar s = 0;
    for (Scalar v : row) s += v * v;
    if (s == 0) continue;
    const Scalar inv = Scalar(1) / std::sqrt(s);
    for (Scalar& v : row) v *= inv;
  }
  return out;
}

Tensor CosineSimilarity(const Tensor& x, const std::vector<int>& rows,
                        const Tensor& y, const std::vector<int>& cols) {
  if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(1)) {
    throw ShapeError("cosine_similarity", x.shape(), y.shape());
  }
  const Tensor xn = NormalizeRows(x);
  const Tensor yn = NormalizeRows(y);
  const int d = x.dim(1);
  Tensor out({static_cast<int>(rows.size()), static_cast<int>(cols.size())});
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto a = xn.row(rows[i]);
    for (size_t j = 0; j < cols.size(); ++j) {
      const auto b = yn.row(cols[j]);
      Scalar s = 0;
      for (int k = 0; k < d; ++k) s += a[k] * b[k];
      out.at(static_cast<int>(i), static_cast<int>(j)) = s;
    }
  }
  return out;
}

std::vector<int> Range(int begin, int end) {
  std::vector<int> v(std::max(0, end - begin));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

}  // namespace mmalign
