#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ingestion.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, const std::string& why)
      : Error("malformed record at line " + std::to_string(line_no) + ": " + why),
        line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id)
      : Error("duplicate submission id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus contains no submissions") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Embedding / labeling backends.
class RemoteUnavailable : public Error {
 public:
  RemoteUnavailable(std::string backend, const std::string& why)
      : Error("remote backend '" + backend + "' unavailable: " + why),
        backend_(std::move(backend)) {}
  const std::string& backend() const noexcept { return backend_; }

 private:
  std::string backend_;
};

class DimMismatch : public Error {
 public:
  DimMismatch(std::size_t expected, std::size_t got)
      : Error("embedding dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

class UnparseableResponse : public Error {
 public:
  using Error::Error;
};

// Alignment.
class NoCorrectSolutions : public Error {
 public:
  NoCorrectSolutions() : Error("no passing submission with at least one line") {}
};

// View model / filters.
class UnknownVariant : public Error {
 public:
  explicit UnknownVariant(const std::string& id) : Error("unknown variant: " + id) {}
};

class UnknownErrorKind : public Error {
 public:
  explicit UnknownErrorKind(const std::string& kind) : Error("unknown error kind: " + kind) {}
};

class EmptyStack : public Error {
 public:
  EmptyStack() : Error("filter stack is empty") {}
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace semflow
