#ifndef MMALIGN_ERROR_H_
#define MMALIGN_ERROR_H_

#include <stdexcept>
#include <string>

namespace mmalign {

// Error categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kUsage,      // bad flag, bad config value
  kData,       // missing file, malformed line, dangling reference
  kShape,      // tensor shape mismatch
  kNumerical,  // NaN/Inf, log of non-positive, diverged loss
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error UsageError(const std::string& message) {
  return Error(ErrorKind::kUsage, message);
}
inline Error DataError(const std::string& message) {
  return Error(ErrorKind::kData, message);
}
inline Error NumericalError(const std::string& message) {
  return Error(ErrorKind::kNumerical, message);
}

}  // namespace mmalign

#endif  // MMALIGN_ERROR_H_
