#include "semtask/error.hpp"

namespace semtask {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::LeafWithoutInstances: return "LeafWithoutInstances";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::SingletonClassSet: return "SingletonClassSet";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InsufficientInstances: return "InsufficientInstances";
    case ErrorCode::NotEnoughUniqueTasks: return "NotEnoughUniqueTasks";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateInstance: return "DuplicateInstance";
    case ErrorCode::NonFiniteVector: return "NonFiniteVector";
    case ErrorCode::MissingInstance: return "MissingInstance";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotEnoughUniqueTasks:
    case ErrorCode::IoError:
      return 3;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, std::string message, std::vector<std::string> entities)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(std::move(message)),
      entities_(std::move(entities)) {}

}  // namespace semtask
