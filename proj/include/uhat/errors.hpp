#pragma once

#include <stdexcept>
#include <string>

namespace uhat {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SortError : Error {
  using Error::Error;
};

struct UnsupportedTheory : Error {
  using Error::Error;
};

struct UnknownOp : Error {
  explicit UnknownOp(const std::string& op) : Error("unknown operator: " + op), op(op) {}
  std::string op;
};

struct CapacityExceeded : Error {
  using Error::Error;
};

struct SemanticError : Error {
  using Error::Error;
};

struct StuckError : Error {
  using Error::Error;
};

struct ErasureMismatch : Error {
  using Error::Error;
};

struct InternalError : Error {
  using Error::Error;
};

// Carries the name of the typing rule whose premise failed.
struct BasicTypeError : Error {
  BasicTypeError(std::string rule, const std::string& msg)
      : Error(rule + ": " + msg), rule(std::move(rule)) {}
  std::string rule;
};

struct WellFormednessError : Error {
  WellFormednessError(std::string rule, const std::string& msg)
      : Error(rule + ": " + msg), rule(std::move(rule)) {}
  std::string rule;
};

struct SpecializationRejected : Error {
  SpecializationRejected(std::string premise, const std::string& msg)
      : Error(premise + ": " + msg), premise(std::move(premise)) {}
  std::string premise;
};

struct SynthesisFailed : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(int line, int col, const std::string& msg)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line), col(col), detail(msg) {}
  int line;
  int col;
  std::string detail;
};

}  // namespace uhat
