#pragma once

#include <stdexcept>

namespace sadm {

/// Raised for inputs that violate a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sadm
