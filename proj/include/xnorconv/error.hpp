#pragma once

#include <stdexcept>
#include <string>

namespace xnorconv {

enum class Errc {
  bad_magic,
  dimension_overflow,
  truncated_payload,
  trailing_data,
  io_failure,
  non_finite_value,
  size_mismatch,
  invalid_argument,
  inconsistent_overlap,
  geometry_mismatch,
  channel_mismatch,
  dimension_mismatch,
  verification_failed,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::bad_magic: return "bad magic";
    case Errc::dimension_overflow: return "dimension overflow";
    case Errc::truncated_payload: return "truncated payload";
    case Errc::trailing_data: return "trailing data";
    case Errc::io_failure: return "i/o failure";
    case Errc::non_finite_value: return "non-finite value";
    case Errc::size_mismatch: return "size mismatch";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::inconsistent_overlap: return "inconsistent overlap";
    case Errc::geometry_mismatch: return "geometry mismatch";
    case Errc::channel_mismatch: return "channel mismatch";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::verification_failed: return "verification failed";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on the kind of failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace xnorconv
