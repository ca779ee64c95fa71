#ifndef PEM_ERRORS_HPP
#define PEM_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateMixing : public Error {
 public:
  using Error::Error;
};

/// The normalized off-diagonal matrix has an eigenvalue too close to -1.
class SpectrumAtSingularity : public Error {
 public:
  using Error::Error;
};

class TooLargeForExactAlignment : public Error {
 public:
  using Error::Error;
};

/// Non-finite activity in the fast loop. `tau` is the inner iteration;
/// `sample` is the streaming index when known (-1 otherwise).
class NumericalDivergence : public Error {
 public:
  NumericalDivergence(int tau, std::int64_t sample = -1)
      : Error(make_message(tau, sample)), tau_(tau), sample_(sample) {}

  int tau() const noexcept { return tau_; }
  std::int64_t sample() const noexcept { return sample_; }

 private:
  static std::string make_message(int tau, std::int64_t sample) {
    std::string msg = "non-finite activity at inner iteration " + std::to_string(tau);
    if (sample >= 0) msg += " of sample " + std::to_string(sample);
    return msg;
  }

  int tau_;
  std::int64_t sample_;
};

/// Experiment file parse or validation failure; `line` is 1-based, 0 if unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace pem

#endif  // PEM_ERRORS_HPP
