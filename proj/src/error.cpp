#include "hwdmd/error.hpp"

namespace hwdmd {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace hwdmd
