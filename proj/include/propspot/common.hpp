#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace propspot {

using Vec = std::vector<double>;

// Error taxonomy mapped to CLI exit codes: ParseError/ValidationError -> 1,
// IoError -> 3. Usage errors are handled by the CLI parser itself.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace propspot
