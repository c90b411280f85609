#include "mmalign/tensor.h"

#include <cmath>
#include <sstream>

namespace mmalign {

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << ", ";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

int64_t ShapeSize(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

Error ShapeError(const std::string& op, const Shape& a, const Shape& b) {
  return Error(ErrorKind::kShape, op + ": shape mismatch " + ShapeString(a) +
                                      " vs " + ShapeString(b));
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (int d : shape_) {
    if (d <= 0) {
      throw Error(ErrorKind::kShape,
                  "tensor: non-positive dimension in " + ShapeString(shape_));
    }
  }
  data_.assign(ShapeSize(shape_), Scalar(0));
}

Tensor::Tensor(Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (int d : shape_) {
    if (d <= 0) {
      throw Error(ErrorKind::kShape,
                  "tensor: non-positive dimension in " + ShapeString(shape_));
    }
  }
  if (ShapeSize(shape_) != static_cast<int64_t>(data_.size())) {
    throw Error(ErrorKind::kShape, "tensor: shape " + ShapeString(shape_) +
                                       " does not hold " +
                                       std::to_string(data_.size()) +
                                       " values");
  }
}

Tensor Tensor::Full(Shape shape, Scalar value) {
  Tensor t(std::move(shape));
  for (auto& v : t.data_) v = value;
  return t;
}

Tensor Tensor::Identity(int n) {
  Tensor t({n, n});
  for (int i = 0; i < n; ++i) t.at(i, i) = 1;
  return t;
}

Tensor Tensor::FromRows(
    std::initializer_list<std::initializer_list<Scalar>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
  std::vector<Scalar> data;
  data.reserve(int64_t(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw Error(ErrorKind::kShape, "FromRows: ragged rows");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw Error(ErrorKind::kShape, "dim: axis out of range for " +
                                       ShapeString(shape_));
  }
  return shape_[axis];
}

std::span<const Scalar> Tensor::row(int i) const {
  const int64_t n = last_dim();
  return std::span<const Scalar>(data_).subspan(i * n, n);
}

std::span<Scalar> Tensor::mutable_row(int i) {
  const int64_t n = last_dim();
  return std::span<Scalar>(data_).subspan(i * n, n);
}

Scalar Tensor::item() const {
  if (data_.size() != 1) {
    throw Error(ErrorKind::kShape,
                "item: tensor of shape " + ShapeString(shape_) +
                    " is not a scalar");
  }
  return data_[0];
}

bool Tensor::AllFinite() const {
  for (Scalar v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeSize(shape) != size()) throw ShapeError("reshape", shape_, shape);
  return Tensor(std::move(shape), data_);
}

}  // namespace mmalign
