#pragma once

#include <stdexcept>
#include <string>

namespace ltr {

// Error taxonomy mirrored by the CLI exit codes: usage=1, io=2, validation=3.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ltr
