#pragma once

#include <stdexcept>
#include <string>

namespace hidalgo {

/// Raised when the data violate a model assumption (coincident points,
/// degenerate ratio vectors). Precondition violations on arguments use
/// std::invalid_argument instead.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hidalgo
