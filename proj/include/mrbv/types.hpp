#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mrbv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// One-sided evaluation of a time-dependent quantity. Raw is the
/// right-continuous canonical version; Left/Right are the one-sided limits
/// (with the end-point conventions g+(T) = lim t->T- and g-(0) = lim t->0+).
enum class Side { Left, Right, Raw };

/// Thrown when a time-stepping linear solve fails; carries the step index.
class SolveError : public std::runtime_error {
 public:
  SolveError(std::string what, Index step)
      : std::runtime_error(std::move(what)), step_(step) {}
  Index step() const { return step_; }

 private:
  Index step_;
};

/// Thrown on malformed experiment configs; names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace mrbv
