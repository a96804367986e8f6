#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sundman {

/// Base of every error raised by the library; `kind()` is the class name as
/// reported in JSON error objects.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::string kind)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t offset, std::vector<std::string> expected)
      : Error(msg, "SyntaxError"), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownFunction : public Error {
 public:
  UnknownFunction(const std::string& name, std::size_t offset)
      : Error("unknown function '" + name + "' at offset " + std::to_string(offset),
              "UnknownFunction"),
        name_(name),
        offset_(offset) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class CannotDifferentiate : public Error {
 public:
  explicit CannotDifferentiate(const std::string& msg) : Error(msg, "CannotDifferentiate") {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg, "DomainError") {}
};

class NonFinite : public Error {
 public:
  explicit NonFinite(const std::string& msg) : Error(msg, "NonFinite") {}
};

class AllPointsSingular : public Error {
 public:
  explicit AllPointsSingular(const std::string& msg) : Error(msg, "AllPointsSingular") {}
};

class NoClosedFormQ : public Error {
 public:
  explicit NoClosedFormQ(const std::string& msg) : Error(msg, "NoClosedFormQ") {}
};

class NoAuxiliaryFound : public Error {
 public:
  explicit NoAuxiliaryFound(const std::string& msg) : Error(msg, "NoAuxiliaryFound") {}
};

class NotReducible : public Error {
 public:
  explicit NotReducible(const std::string& msg) : Error(msg, "NotReducible") {}
};

class DegenerateTransform : public Error {
 public:
  explicit DegenerateTransform(const std::string& msg) : Error(msg, "DegenerateTransform") {}
};

class ImplicitSolveFailure : public Error {
 public:
  explicit ImplicitSolveFailure(const std::string& msg) : Error(msg, "ImplicitSolveFailure") {}
};

class NonMonotoneT : public Error {
 public:
  explicit NonMonotoneT(const std::string& msg) : Error(msg, "NonMonotoneT") {}
};

class NonConstant : public Error {
 public:
  explicit NonConstant(const std::string& msg) : Error(msg, "NonConstant") {}
};

class IntegrationFailure : public Error {
 public:
  explicit IntegrationFailure(const std::string& msg) : Error(msg, "IntegrationFailure") {}
};

class SingularEncounter : public Error {
 public:
  SingularEncounter(const std::string& msg, std::size_t last_good)
      : Error(msg, "SingularEncounter"), last_good_(last_good) {}
  std::size_t last_good() const noexcept { return last_good_; }

 private:
  std::size_t last_good_;
};

/// Malformed problem file or command-line value.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(msg, "InvalidInput") {}
};

/// A pipeline stage failed inside a higher-level driver.
class StageFailure : public Error {
 public:
  StageFailure(const std::string& stage, const std::string& cause_kind, const std::string& msg)
      : Error(stage + ": " + msg, "StageFailure"), stage_(stage), cause_kind_(cause_kind) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& cause_kind() const noexcept { return cause_kind_; }

 private:
  std::string stage_, cause_kind_;
};

}  // namespace sundman
