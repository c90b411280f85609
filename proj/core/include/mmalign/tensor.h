#ifndef MMALIGN_TENSOR_H_
#define MMALIGN_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "mmalign/error.h"

namespace mmalign {

#ifdef MMALIGN_FLOAT32
using Scalar = float;
#else
using Scalar = double;
#endif

using Shape = std::vector<int>;

std::string ShapeString(const Shape& shape);
int64_t ShapeSize(const Shape& shape);

// Shape mismatch error naming the op and both operand shapes.
Error ShapeError(const std::string& op, const Shape& a, const Shape& b);

// Dense row-major tensor. A rank-0 tensor (empty shape) holds one scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Scalar> data);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor Full(Shape shape, Scalar value);
  static Tensor Scalar0(Scalar value) { return Tensor({}, {value}); }
  static Tensor Matrix(int rows, int cols, std::vector<Scalar> data) {
    return Tensor({rows, cols}, std::move(data));
  }
  static Tensor Identity(int n);
  // Builds a matrix from nested rows; all rows must have equal length.
  static Tensor FromRows(
      std::initializer_list<std::initializer_list<Scalar>> rows);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty() && shape_.empty(); }

  // Size of the last axis (1 for rank 0) and the number of such rows.
  int last_dim() const { return shape_.empty() ? 1 : shape_.back(); }
  int64_t outer_size() const { return size() / last_dim(); }

  std::span<const Scalar> data() const { return data_; }
  std::span<Scalar> mutable_data() { return data_; }
  const std::vector<Scalar>& vec() const { return data_; }

  Scalar operator[](int64_t i) const { return data_[i]; }
  Scalar& operator[](int64_t i) { return data_[i]; }
  Scalar at(int i, int j) const { return data_[int64_t(i) * shape_[1] + j]; }
  Scalar& at(int i, int j) { return data_[int64_t(i) * shape_[1] + j]; }
  std::span<const Scalar> row(int i) const;
  std::span<Scalar> mutable_row(int i);

  Scalar item() const;
  bool AllFinite() const;

  Tensor Reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<Scalar> data_;
};

}  // namespace mmalign

#endif  // MMALIGN_TENSOR_H_
