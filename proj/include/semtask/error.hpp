#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semtask {

enum class ErrorCode {
  // taxonomy
  MalformedInput,
  CycleDetected,
  MultipleRoots,
  UnknownParent,
  LeafWithoutInstances,
  UnknownClass,
  UnknownNode,
  // semantics / sampler
  SingletonClassSet,
  InvalidConfig,
  InsufficientInstances,
  NotEnoughUniqueTasks,
  // evalkit
  DimensionMismatch,
  DuplicateInstance,
  NonFiniteVector,
  MissingInstance,
  LabelMismatch,
  WindowTooLarge,
  // environment
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status for an error: 2 for invalid input, 3 for
/// resource or degenerate-data failures.
int exit_status(ErrorCode code) noexcept;

/// Every failure raised by the library. `entities()` names the offending
/// ids (cycle members, duplicate instance, task id, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::vector<std::string> entities = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& entities() const noexcept { return entities_; }
  /// what() without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::vector<std::string> entities_;
};

}  // namespace semtask
