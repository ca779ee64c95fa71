#ifndef PEM_RNG_HPP
#define PEM_RNG_HPP

#include <cstdint>
#include <optional>
#include <random>

namespace pem {

/// Independent random streams derived from one experiment seed. Data
/// generation, noise and initialization never share a stream.
enum class Stream : std::uint64_t {
  Sources = 1,
  Mixing = 2,
  Noise = 3,
  Init = 4,
  Auxiliary = 5,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic generator: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) seeded with splitmix64(seed, stream). All transforms to
/// real distributions are implemented here, since the std:: distributions
/// are implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  double exponential();
  /// +1 or -1 with equal probability.
  double sign();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace pem

#endif  // PEM_RNG_HPP
