#pragma once
// Error taxonomy shared by the library and the CLI exit-code mapping:
//   input_error  -> exit 2 (bad input data / schema)
//   numeric_error-> exit 3 (non-finite values, degenerate statistics)
//   config_error -> exit 4 (bad configuration, unknown keys/flags)

#include <stdexcept>
#include <string>

namespace agrignn {

class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace agrignn
