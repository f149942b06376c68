#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metaonce {

enum class ErrorKind {
  ParseError,
  ValidationError,
  DuplicateConcept,
  UnknownParent,
  UnknownConcept,
  UnknownRelationType,
  DuplicateScene,
  UnknownScene,
  UnknownEntity,
  ConceptMismatch,
  DuplicateEdge,
  NonMemberEndpoint,
  RelationNotAllowedInScene,
  EdgeNotFound,
  StorageError,
  CorruptLog,
  PreconditionViolation,
  EmptySelection,
  UnknownVertex,
  NegativeWeight,
  InvalidThreshold,
  InvalidArgument,
  InvalidSession,
  UnknownQuery,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::DuplicateConcept: return "DuplicateConcept";
    case ErrorKind::UnknownParent: return "UnknownParent";
    case ErrorKind::UnknownConcept: return "UnknownConcept";
    case ErrorKind::UnknownRelationType: return "UnknownRelationType";
    case ErrorKind::DuplicateScene: return "DuplicateScene";
    case ErrorKind::UnknownScene: return "UnknownScene";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::ConceptMismatch: return "ConceptMismatch";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NonMemberEndpoint: return "NonMemberEndpoint";
    case ErrorKind::RelationNotAllowedInScene: return "RelationNotAllowedInScene";
    case ErrorKind::EdgeNotFound: return "EdgeNotFound";
    case ErrorKind::StorageError: return "StorageError";
    case ErrorKind::CorruptLog: return "CorruptLog";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::InvalidThreshold: return "InvalidThreshold";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidSession: return "InvalidSession";
    case ErrorKind::UnknownQuery: return "UnknownQuery";
  }
  return "Unknown";
}

/// Every recoverable failure in the engine is reported as an Error carrying a
/// machine-readable kind. Rule rejections are not errors; they are Decisions.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace metaonce
