// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kgspec
{

// Invalid model description or run configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
  ConfigError(const std::string &pointer, const std::string &what)
    : std::runtime_error(pointer.empty() ? what : pointer + ": " + what)
  {
  }
};

// A numerical stage could not produce a result (eigensolver failure, integrator
// step underflow, ill-conditioned projection). Exit code 1.
class NumericalError : public std::runtime_error
{
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace kgspec
