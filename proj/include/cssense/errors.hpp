#pragma once

#include <stdexcept>

namespace cssense {

/// Raised when a linear system stays singular after ridge stabilisation.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cssense
