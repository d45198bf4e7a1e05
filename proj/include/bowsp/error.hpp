#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bowsp {

/// Every failure carries a short machine-readable code (e.g. "incomplete-plan")
/// next to the human readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)), detail_(detail) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

}  // namespace bowsp
