#include "mmlhub/error.hpp"

namespace mmlhub {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::MalformedEnvironment: return "MalformedEnvironment";
    case ErrorCode::UnterminatedBlock: return "UnterminatedBlock";
    case ErrorCode::UnknownAnchor: return "UnknownAnchor";
    case ErrorCode::UnknownArticle: return "UnknownArticle";
    case ErrorCode::CyclicDependency: return "CyclicDependency";
    case ErrorCode::NotADag: return "NotADag";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UserBlocked: return "UserBlocked";
    case ErrorCode::UnknownRevision: return "UnknownRevision";
    case ErrorCode::StripMismatch: return "StripMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::FrozenArticle: return "FrozenArticle";
    case ErrorCode::NoCorpus: return "NoCorpus";
    case ErrorCode::CorruptData: return "CorruptData";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {
std::string describe_cycle(const std::vector<std::string>& cycle) {
  std::string out = "cyclic dependency: ";
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i > 0) out += " -> ";
    out += cycle[i];
  }
  return out;
}
}  // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : Error(ErrorCode::CyclicDependency, describe_cycle(cycle)), cycle_(std::move(cycle)) {}

}  // namespace mmlhub
