#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tailidx {

enum class Errc {
  InvalidParams,
  NormalizationDivergent,
  InvalidBase,
  DepthExceeded,
  StagesExceeded,
  NoTailBound,
  FiniteSupport,
  ScheduleTooShort,
  InvalidV,
  TooLarge,
  ParseError,
  NonFinite,
  Io,
};

std::string_view to_string(Errc code);

// Errors caused by the caller's input, as opposed to a computation that
// could not be carried out (depth limits, missing tail bounds, NaN).
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace tailidx
