#include "pem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pem {

namespace {

double snr_db(double signal, double residual) {
  if (residual < 1e-30 * signal) return kMsnrCapDb;
  return 10.0 * std::log10(signal / residual);
}

void check_pair(const Matrix& S, const Matrix& Y) {
  if (S.rows() != Y.rows() || S.cols() != Y.cols())
    throw InvalidInput("sources and outputs must have the same shape");
  if (S.rows() < 1 || S.cols() < 1) throw InvalidInput("empty source matrix");
}

}  // namespace

AlignResult align(const Matrix& S, const Matrix& Y, SourceDomain domain) {
  check_pair(S, Y);
  const int n = static_cast<int>(S.rows());
  if (n > 8) throw TooLargeForExactAlignment("exact alignment supports at most 8 sources");
  const bool flip = !is_nonnegative(domain);

  // table[(i * n + j) * 2 + s]: source i against output j, s = 1 for a sign flip.
  std::vector<double> table(static_cast<std::size_t>(n * n * 2));
  for (int i = 0; i < n; ++i) {
    const double signal = S.row(i).squaredNorm();
    if (!(signal > 0.0)) throw InvalidInput("source row has zero norm");
    for (int j = 0; j < n; ++j) {
      table[(i * n + j) * 2] = snr_db(signal, (S.row(i) - Y.row(j)).squaredNorm());
      table[(i * n + j) * 2 + 1] = snr_db(signal, (S.row(i) + Y.row(j)).squaredNorm());
    }
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  const unsigned masks = flip ? (1u << n) : 1u;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_perm = perm;
  unsigned best_mask = 0;
  do {
    for (unsigned mask = 0; mask < masks; ++mask) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += table[(i * n + perm[i]) * 2 + ((mask >> i) & 1u)];
      if (total > best) {
        best = total;
        best_perm = perm;
        best_mask = mask;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  AlignResult out;
  out.alignment.perm = best_perm;
  out.alignment.signs.resize(static_cast<std::size_t>(n));
  out.Y_aligned.resize(n, Y.cols());
  for (int i = 0; i < n; ++i) {
    const int sign = ((best_mask >> i) & 1u) ? -1 : 1;
    out.alignment.signs[i] = sign;
    out.Y_aligned.row(i) = sign * Y.row(best_perm[i]);
  }
  return out;
}

MsnrResult msnr_db(const Matrix& S, const Matrix& Y_aligned) {
  check_pair(S, Y_aligned);
  MsnrResult out;
  out.per_source.resize(S.rows());
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double signal = S.row(i).squaredNorm();
    if (!(signal > 0.0)) throw InvalidInput("source row has zero norm");
    out.per_source(i) = snr_db(signal, (S.row(i) - Y_aligned.row(i)).squaredNorm());
  }
  out.mean = out.per_source.mean();
  return out;
}

ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level) {
  if (samples.size() < 2) throw InvalidInput("confidence interval needs at least 2 samples");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("confidence level must lie in (0,1)");
  const double N = static_cast<double>(samples.size());
  ConfidenceInterval ci;
  ci.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / N;
  double ss = 0.0;
  for (double v : samples) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / (N - 1.0));
  ci.half_width = student_t_quantile((1.0 + level) / 2.0, N - 1.0) * sd / std::sqrt(N);
  return ci;
}

}  // namespace pem
