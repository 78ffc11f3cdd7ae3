#pragma once

#include <stdexcept>
#include <string>

namespace modlab {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidRadii : Error {
  explicit InvalidRadii(const std::string& what) : Error(what) {}
};

struct UnsupportedDimension : Error {
  explicit UnsupportedDimension(const std::string& what) : Error(what) {}
};

struct NonFiniteIntegrand : Error {
  explicit NonFiniteIntegrand(const std::string& what) : Error(what) {}
};

struct EvaluationDomain : Error {
  explicit EvaluationDomain(const std::string& what) : Error(what) {}
};

struct NotAdmissible : Error {
  explicit NotAdmissible(const std::string& what) : Error(what) {}
};

struct NearSingularity : Error {
  explicit NearSingularity(const std::string& what) : Error(what) {}
};

struct ParameterRange : Error {
  explicit ParameterRange(const std::string& what) : Error(what) {}
};

struct QuadratureFailure : Error {
  explicit QuadratureFailure(const std::string& what) : Error(what) {}
};

struct PsiNotIntegrable : Error {
  explicit PsiNotIntegrable(const std::string& what) : Error(what) {}
};

// Config errors carry a JSON-pointer-style path to the offending field.
struct ConfigError : Error {
  std::string field;
  ConfigError(std::string field_path, const std::string& what)
      : Error(what), field(std::move(field_path)) {}
};

struct NumericalError : Error {
  std::string field;
  NumericalError(std::string field_path, const std::string& what)
      : Error(what), field(std::move(field_path)) {}
};

}  // namespace modlab
