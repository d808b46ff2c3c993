#pragma once

#include <stdexcept>
#include <string>

namespace docstruct {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Corpus loading.
class NoDocumentsError : public Error {
 public:
  using Error::Error;
};

class FileReadError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

// Embedding provider.
class ProviderUnavailableError : public Error {
 public:
  using Error::Error;
};

class ProviderProtocolError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Graph / communities.
class GraphTooSmallError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class OracleTooLargeError : public Error {
 public:
  using Error::Error;
};

// ToC selection.
class NotEnoughCommunitiesError : public Error {
 public:
  using Error::Error;
};

// Evaluation.
class CannotSampleError : public Error {
 public:
  using Error::Error;
};

class AnnotationError : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// Synthetic collection generator.
class SynthSpecError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised while running a pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace docstruct
