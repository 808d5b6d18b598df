#include "tailidx/error.hpp"

namespace tailidx {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NormalizationDivergent: return "NormalizationDivergent";
    case Errc::InvalidBase: return "InvalidBase";
    case Errc::DepthExceeded: return "DepthExceeded";
    case Errc::StagesExceeded: return "StagesExceeded";
    case Errc::NoTailBound: return "NoTailBound";
    case Errc::FiniteSupport: return "FiniteSupport";
    case Errc::ScheduleTooShort: return "ScheduleTooShort";
    case Errc::InvalidV: return "InvalidV";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ParseError: return "ParseError";
    case Errc::NonFinite: return "NonFinite";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) {
  switch (code) {
    case Errc::DepthExceeded:
    case Errc::NoTailBound:
    case Errc::NonFinite:
    case Errc::Io:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace tailidx
