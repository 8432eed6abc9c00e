#pragma once

#include <stdexcept>
#include <string>

namespace dfl {

/// A caller-supplied parameter violates an operation's precondition.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// The request exceeds an enumeration or evaluation cap.
class CapacityError : public std::length_error {
public:
  explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

/// A symbolic input does not have the structure an operation requires.
class StructuralError : public std::logic_error {
public:
  explicit StructuralError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace dfl
