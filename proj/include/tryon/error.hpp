#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tryon {

enum class Errc {
  invalid_argument,
  degenerate_input,
  corrupt_asset,
  invalid_asset,
  insufficient_data,
  numerical_failure,
  cannot_fit,
  parse_error,
  unsupported_feature,
  not_glb,
  corrupt_file,
  io_error,
  ingest_error,
  not_found,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::corrupt_asset: return "corrupt-asset";
    case Errc::invalid_asset: return "invalid-asset";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::cannot_fit: return "cannot-fit";
    case Errc::parse_error: return "parse-error";
    case Errc::unsupported_feature: return "unsupported-feature";
    case Errc::not_glb: return "not-glb";
    case Errc::corrupt_file: return "corrupt-file";
    case Errc::io_error: return "io-error";
    case Errc::ingest_error: return "ingest-error";
    case Errc::not_found: return "not-found";
  }
  return "unknown";
}

// All library failures are reported through this one exception type; the
// code identifies the error kind, the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tryon
