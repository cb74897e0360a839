#pragma once

#include <stdexcept>
#include <string>

namespace mcflow {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCFLOW_DECLARE_ERROR(Name)             \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name) + ": " + what) {} \
  }

// geometry
MCFLOW_DECLARE_ERROR(InvalidImmersion);
MCFLOW_DECLARE_ERROR(DegenerateElement);
MCFLOW_DECLARE_ERROR(NeighborhoodRankDeficient);
MCFLOW_DECLARE_ERROR(FitUnderdetermined);
MCFLOW_DECLARE_ERROR(FitIllConditioned);
MCFLOW_DECLARE_ERROR(UnsupportedDimension);

// analytic
MCFLOW_DECLARE_ERROR(PastSingularity);
MCFLOW_DECLARE_ERROR(NegativeTestFunction);
MCFLOW_DECLARE_ERROR(InvalidArgument);

// flow
MCFLOW_DECLARE_ERROR(StepRejected);
MCFLOW_DECLARE_ERROR(SolverFailure);
MCFLOW_DECLARE_ERROR(MaxStepsExceeded);

// monitors / rescale
MCFLOW_DECLARE_ERROR(WindowNotCovered);
MCFLOW_DECLARE_ERROR(ZeroMeanCurvature);

// io
MCFLOW_DECLARE_ERROR(UnknownQuantity);
MCFLOW_DECLARE_ERROR(IoError);

#undef MCFLOW_DECLARE_ERROR

/// Malformed JSON; carries the 1-based line/column of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("ParseError at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed config that breaks a constraint; `field` is the JSON path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error("ValidationError [" + field + "]: " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace mcflow
