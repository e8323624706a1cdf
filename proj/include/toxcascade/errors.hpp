#pragma once

#include <stdexcept>
#include <string>

namespace toxcascade {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("duplicate id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class CompileError : public Error {
 public:
  CompileError(std::string rule_id, const std::string& what)
      : Error("rule '" + rule_id + "': " + what), rule_id_(std::move(rule_id)) {}
  const std::string& rule_id() const { return rule_id_; }

 private:
  std::string rule_id_;
};

class SingleClassData : public Error {
 public:
  using Error::Error;
};

class UncalibratedModel : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class SingleClassInput : public Error {
 public:
  using Error::Error;
};

class InsufficientLabels : public Error {
 public:
  using Error::Error;
};

class CorpusTooSmall : public Error {
 public:
  using Error::Error;
};

class EmptyLedger : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

}  // namespace toxcascade
