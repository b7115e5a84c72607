#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "hetnet/types.hpp"

namespace hetnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or config. `field()` names the offending key.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error("parse error at '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A value violates a documented invariant (dimensions, positivity, coverage).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Some user has zero rate, so the log utility is undefined.
class StarvedUser : public Error {
 public:
  explicit StarvedUser(std::size_t user)
      : Error("user " + std::to_string(user) + " has zero rate"), user_(user) {}
  std::size_t user() const { return user_; }

 private:
  std::size_t user_;
};

/// Initial point or pinned-off set that violates the problem constraints.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// The dual projection solver hit its iteration cap.
class DualNonConvergence : public Error {
 public:
  DualNonConvergence(DualPoint last, double residual, int band = -1)
      : Error(message(residual, band)), last_(std::move(last)), residual_(residual), band_(band) {}

  const DualPoint& last_iterate() const { return last_; }
  double residual() const { return residual_; }
  int band() const { return band_; }

  DualNonConvergence with_band(int band) const { return {last_, residual_, band}; }

 private:
  static std::string message(double residual, int band) {
    std::string m = "dual projection did not converge (residual " + std::to_string(residual) + ")";
    if (band >= 0) m += " in band " + std::to_string(band);
    return m;
  }

  DualPoint last_;
  double residual_;
  int band_;
};

}  // namespace hetnet
