#pragma once

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace lcert {

inline constexpr const char* kVersion = "0.1.0";

/// Base error type for all validation and numeric failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure (divergence, non-convergence) as opposed to bad input;
/// the CLI maps these to a distinct exit code.
struct NumericError : Error {
  using Error::Error;
};

/// printf-style string formatting (libstdc++ 11 has no std::format).
inline std::string strfmt(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list args2;
  va_copy(args2, args);
  int n = std::vsnprintf(nullptr, 0, fmt, args);
  va_end(args);
  std::string out(n > 0 ? static_cast<size_t>(n) : 0, '\0');
  if (n > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
  va_end(args2);
  return out;
}

template <typename... Args>
[[noreturn]] inline void fail(const char* fmt, Args... args) {
  throw Error(strfmt(fmt, args...));
}

template <typename... Args>
[[noreturn]] inline void fail_numeric(const char* fmt, Args... args) {
  throw NumericError(strfmt(fmt, args...));
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace lcert
