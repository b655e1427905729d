#pragma once
#include <stdexcept>
#include <string>

namespace ft {

enum class errc {
  invalid_argument,
  non_finite,
  rank_deficient,
  not_positive_definite,
  infeasible,
  iteration_limit,
  unknown_kind,
  length_mismatch,
  insufficient_sweep,
  representation_mismatch,
  diverged,
  parse_error,
  header_mismatch,
  config_error,
  io_error,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc c, const std::string& msg) { throw Error(c, msg); }

// warning-grade conditions: flags on results, never exceptions
using Flags = unsigned;
inline constexpr Flags flag_saturated = 1u << 0;
inline constexpr Flags flag_null_space = 1u << 1;
inline constexpr Flags flag_ridge_applied = 1u << 2;
inline constexpr Flags flag_rank_deficient_data = 1u << 3;

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::non_finite: return "NonFinite";
    case errc::rank_deficient: return "RankDeficient";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::infeasible: return "Infeasible";
    case errc::iteration_limit: return "IterationLimit";
    case errc::unknown_kind: return "UnknownKind";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::insufficient_sweep: return "InsufficientSweep";
    case errc::representation_mismatch: return "RepresentationMismatch";
    case errc::diverged: return "Diverged";
    case errc::parse_error: return "ParseError";
    case errc::header_mismatch: return "HeaderMismatch";
    case errc::config_error: return "ConfigError";
    case errc::io_error: return "IoError";
  }
  return "Error";
}

}  // namespace ft
