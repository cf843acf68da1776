#pragma once

#include <stdexcept>
#include <string>

namespace tssto {

// Rejected input: bad dimensions, bad parameters, malformed or missing files.
// The CLI maps this to exit code 2; unexpected runtime failures map to 3.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tssto
