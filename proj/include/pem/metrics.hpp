#ifndef PEM_METRICS_HPP
#define PEM_METRICS_HPP

#include <vector>

#include "pem/core_math.hpp"
#include "pem/domains.hpp"

namespace pem {

/// Output row perm[i] (times signs[i]) is matched to source i.
struct Alignment {
  std::vector<int> perm;
  std::vector<int> signs;
};

struct AlignResult {
  Alignment alignment;
  Matrix Y_aligned;
};

/// Exhaustive search over permutations and signs maximizing total mSNR.
/// Signs are fixed to +1 on nonnegative domains. Ties keep the
/// lexicographically smallest permutation, then the all-plus sign pattern.
AlignResult align(const Matrix& S, const Matrix& Y, SourceDomain domain);

struct MsnrResult {
  Vector per_source;
  double mean = 0.0;
};

/// Per-source 10 log10(||s_i||^2 / ||s_i - y_i||^2), capped at 300 dB when
/// the residual power falls below 1e-30 of the signal power.
MsnrResult msnr_db(const Matrix& S, const Matrix& Y_aligned);

inline constexpr double kMsnrCapDb = 300.0;

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// mean +/- t_{(1+level)/2, N-1} * sd / sqrt(N), sd with N-1 denominator.
ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level = 0.95);

}  // namespace pem

#endif  // PEM_METRICS_HPP
