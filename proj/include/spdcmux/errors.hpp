#pragma once

#include <stdexcept>
#include <string>

namespace spdcmux {

// Parameter outside the domain of an operation (bad mean, index, multiple...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Instance larger than an exhaustive routine is willing to handle.
class refusal_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Iterative method ran out of budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root search could not bracket or isolate a crossing.
class search_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid configuration document.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spdcmux
