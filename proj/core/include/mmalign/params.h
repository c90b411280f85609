#ifndef MMALIGN_PARAMS_H_
#define MMALIGN_PARAMS_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmalign/autodiff.h"
#include "mmalign/tensor.h"

namespace mmalign {

// Named learnable tensors in insertion order.
class ParameterStore {
 public:
  void Add(const std::string& name, Tensor value);
  bool Has(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor& Get(const std::string& name) const;
  Tensor& Mutable(const std::string& name);

  const std::vector<std::string>& names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }
  int64_t num_scalars() const;

  bool operator==(const ParameterStore& other) const {
    return names_ == other.names_ && values_ == other.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::map<std::string, int> index_;
};

// Binds every parameter of a store as a leaf on a tape; gradient tracking
// can be switched off for inference.
class BoundParameters {
 public:
  BoundParameters(Tape& tape, const ParameterStore& store,
                  bool requires_grad = true);

  Var operator[](const std::string& name) const;
  const std::map<std::string, Var>& vars() const { return vars_; }

 private:
  std::map<std::string, Var> vars_;
};

// Flat little-endian float64 dump plus a JSON manifest (name, shape, offset)
// and a CRC-32 of the payload.
void SaveParameters(const ParameterStore& store,
                    const std::filesystem::path& dump,
                    const std::filesystem::path& manifest);
ParameterStore LoadParameters(const std::filesystem::path& dump,
                              const std::filesystem::path& manifest);

}  // namespace mmalign

#endif  // MMALIGN_PARAMS_H_
