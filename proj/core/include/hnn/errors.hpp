#pragma once

#include <stdexcept>
#include <string>

namespace hnn {

/// Malformed or inconsistent dataset input.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value showed up inside a forward or backward pass.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& op)
      : std::runtime_error("numerical overflow in " + op), op_(op) {}

  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

}  // namespace hnn
