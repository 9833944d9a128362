#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anc {

enum class ErrorKind {
  Data,          // non-finite or malformed sample data
  Domain,        // argument outside its mathematical domain
  Dimension,     // grid / vector size mismatch
  Instability,   // recursive filter output left the finite-magnitude guard
  Divergence,    // adaptive weights left the divergence guard
  Conditioning,  // singular or ill-conditioned normal equations
  UndefinedBound,
  Config,
  Io,
  Format,        // malformed file contents (WAV, weight files)
  Unsupported,   // well-formed but unsupported file variant
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an adaptive filter's weights become non-finite or exceed the guard.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t sample_index)
      : Error(ErrorKind::Divergence, what), sample_index_(sample_index) {}
  std::size_t sample_index() const noexcept { return sample_index_; }

 private:
  std::size_t sample_index_;
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::size_t sample_index)
      : Error(ErrorKind::Instability, what), sample_index_(sample_index) {}
  std::size_t sample_index() const noexcept { return sample_index_; }

 private:
  std::size_t sample_index_;
};

// Magnitude beyond which any filter sample is treated as divergent.
inline constexpr double kSampleGuard = 1e12;
// Magnitude beyond which an adaptive weight is treated as divergent.
inline constexpr double kWeightGuard = 1e6;

}  // namespace anc
