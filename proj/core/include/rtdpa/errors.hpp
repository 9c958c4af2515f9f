#pragma once

#include <stdexcept>
#include <string>

namespace rtdpa {

/// Bad user input: files, schemas, configs, CSV cells. The CLI maps this
/// to exit code 2; anything else escaping to main is an internal failure (1).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rtdpa
