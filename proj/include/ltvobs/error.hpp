#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltv {

// Root of every error raised by the toolkit. `code()` is the stable name
// that ends up in JSON reports.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error("SyntaxError", what + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, const std::string& name)
      : Error("UnknownIdentifier",
              "unknown identifier '" + name + "' at byte " + std::to_string(offset)),
        offset_(offset),
        name_(name) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

// Raised while evaluating an expression. `entry()` is the row-major index
// inside the owning matrix, or npos for a bare scalar expression.
class EvalError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit EvalError(const std::string& cause, std::size_t entry = npos)
      : Error("EvalError", entry == npos ? cause
                                         : "entry " + std::to_string(entry) + ": " + cause),
        entry_(entry),
        cause_(cause) {}
  std::size_t entry() const noexcept { return entry_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::size_t entry_;
  std::string cause_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class IntegrationFailure : public Error {
 public:
  IntegrationFailure(double time, const std::string& what)
      : Error("IntegrationFailure", what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class InfeasibleFit : public Error {
 public:
  explicit InfeasibleFit(const std::string& what) : Error("InfeasibleFit", what) {}
};

class DegenerateGrid : public Error {
 public:
  explicit DegenerateGrid(const std::string& what) : Error("DegenerateGrid", what) {}
};

class NotObservableOnGrid : public Error {
 public:
  NotObservableOnGrid(double t, const std::string& what)
      : Error("NotObservableOnGrid", what), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

class NotControllableOnGrid : public Error {
 public:
  NotControllableOnGrid(double t, const std::string& what)
      : Error("NotControllableOnGrid", what), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

// A theorem hypothesis failed for the fitted constants. `condition()` names
// which one (e.g. "conditionGED").
class HypothesisUnmet : public Error {
 public:
  HypothesisUnmet(std::string condition, const std::string& what)
      : Error("HypothesisUnmet", what), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class NonFiniteDerivative : public Error {
 public:
  explicit NonFiniteDerivative(const std::string& what) : Error("NonFiniteDerivative", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace ltv
