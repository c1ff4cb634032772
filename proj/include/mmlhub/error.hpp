#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmlhub {

enum class ErrorCode {
  InvalidArgument,
  InvalidName,
  MalformedEnvironment,
  UnterminatedBlock,
  UnknownAnchor,
  UnknownArticle,
  CyclicDependency,
  NotADag,
  UnknownNode,
  UserBlocked,
  UnknownRevision,
  StripMismatch,
  EmptyCorpus,
  RankTooLarge,
  ConvergenceFailure,
  Unauthorized,
  Forbidden,
  FrozenArticle,
  NoCorpus,
  CorruptData,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parser failure tied to a 1-based source line.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line), detail_(message) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Dependency cycle; the witness starts and ends with the same node.
class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle);

  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

}  // namespace mmlhub
