#pragma once

#include <stdexcept>
#include <string>

namespace menurank {

// Base of everything the library throws on a violated contract or bad input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class InvalidDishError : public Error {
 public:
  using Error::Error;
};

class EmptyMenuError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class KeyError : public Error {
 public:
  using Error::Error;
};

class UnknownDishError : public Error {
 public:
  using Error::Error;
};

class InsufficientLexiconError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class CompatibilityError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace menurank
