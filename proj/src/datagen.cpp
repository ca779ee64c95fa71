#include "pem/datagen.hpp"

#include <string>

namespace pem {

std::string_view to_string(MixingDistribution d) noexcept {
  switch (d) {
    case MixingDistribution::Gaussian: return "gaussian";
    case MixingDistribution::Uniform: return "uniform";
    case MixingDistribution::Laplace: return "laplace";
    case MixingDistribution::Rademacher: return "rademacher";
    case MixingDistribution::StudentT5: return "student_t5";
  }
  return "unknown";
}

MixingDistribution parse_mixing_distribution(std::string_view name) {
  for (auto d : {MixingDistribution::Gaussian, MixingDistribution::Uniform,
                 MixingDistribution::Laplace, MixingDistribution::Rademacher,
                 MixingDistribution::StudentT5})
    if (to_string(d) == name) return d;
  throw InvalidInput("unknown mixing distribution '" + std::string(name) + "'");
}

namespace {

void check_shape(int n, int T) {
  if (n < 2) throw InvalidInput("number of sources must be >= 2");
  if (T < 1) throw InvalidInput("number of samples must be >= 1");
}

// Flat Dirichlet on n coordinates via normalized exponentials.
void flat_dirichlet(Rng& rng, Eigen::Ref<Vector> out) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = rng.exponential();
    total += out(i);
  }
  out /= total;
}

double chi_square(Rng& rng, int nu) {
  double g = 0.0;
  for (int k = 0; k < nu; ++k) {
    const double z = rng.normal();
    g += z * z;
  }
  return g;
}

}  // namespace

SourceBatch sample_uniform_source(SourceDomain domain, int n, int T, std::uint64_t seed) {
  check_shape(n, T);
  Rng rng(seed, Stream::Sources);
  SourceBatch batch{Matrix(n, T), domain, 0.0, seed};
  Vector col(n);
  for (int t = 0; t < T; ++t) {
    switch (domain) {
      case SourceDomain::Antisparse:
        for (int i = 0; i < n; ++i) col(i) = 2.0 * rng.uniform() - 1.0;
        break;
      case SourceDomain::NonnegAntisparse:
        for (int i = 0; i < n; ++i) col(i) = rng.uniform();
        break;
      case SourceDomain::Simplex:
        flat_dirichlet(rng, col);
        break;
      case SourceDomain::Sparse:
      case SourceDomain::NonnegSparse: {
        // Uniform point of the face sum = 1, scaled by a radius with
        // density proportional to r^(n-1).
        flat_dirichlet(rng, col);
        col *= std::pow(rng.uniform(), 1.0 / n);
        if (domain == SourceDomain::Sparse)
          for (int i = 0; i < n; ++i) col(i) *= rng.sign();
        break;
      }
    }
    batch.S.col(t) = col;
  }
  return batch;
}

SourceBatch sample_copula_t_source(SourceDomain domain, int n, int T, double rho, int nu,
                                   std::uint64_t seed) {
  check_shape(n, T);
  if (!is_box(domain)) throw DomainMismatch("copula-t sources are defined for box domains only");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("copula-t rho must lie in [0,1)");
  if (nu < 1) throw InvalidInput("copula-t nu must be a positive integer");

  Matrix R = Matrix::Constant(n, n, rho);
  R.diagonal().setOnes();
  const Matrix L = cholesky_lower(R);

  Rng rng(seed, Stream::Sources);
  SourceBatch batch{Matrix(n, T), domain, rho, seed};
  Vector z(n);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    const Vector corr = L * z;
    const double scale = std::sqrt(nu / chi_square(rng, nu));
    for (int i = 0; i < n; ++i) {
      const double u = student_t_cdf(corr(i) * scale, nu);
      batch.S(i, t) = domain == SourceDomain::Antisparse ? 2.0 * u - 1.0 : u;
    }
  }
  return batch;
}

double sample_mixing_entry(MixingDistribution dist, Rng& rng) {
  switch (dist) {
    case MixingDistribution::Gaussian:
      return rng.normal();
    case MixingDistribution::Uniform:
      return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case MixingDistribution::Laplace: {
      // Inverse CDF with scale 1/sqrt(2).
      const double u = rng.uniform_open() - 0.5;
      const double b = 1.0 / std::sqrt(2.0);
      return u < 0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
    }
    case MixingDistribution::Rademacher:
      return rng.sign();
    case MixingDistribution::StudentT5: {
      const double z = rng.normal();
      const double g = chi_square(rng, 5);
      return std::sqrt(3.0 / 5.0) * z / std::sqrt(g / 5.0);
    }
  }
  return 0.0;
}

bool has_full_column_rank(const Matrix& A) {
  try {
    cholesky_lower(Matrix(A.transpose() * A), 1e-10);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

Matrix gen_mixing(int m, int n, MixingDistribution dist, std::uint64_t seed) {
  if (n < 2 || m < n) throw InvalidInput("mixing matrix needs m >= n >= 2");
  Rng rng(seed, Stream::Mixing);
  Matrix A(m, n);
  for (int attempt = 0; attempt < 10; ++attempt) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) A(i, j) = sample_mixing_entry(dist, rng);
    if (has_full_column_rank(A)) return A;
  }
  throw DegenerateMixing("mixing matrix rank deficient after 10 attempts");
}

NoisyMixture mix_with_noise(const Matrix& A, const SourceBatch& sources,
                            std::optional<double> snr_in_db, std::uint64_t seed) {
  if (A.cols() != sources.S.rows()) throw InvalidInput("mixing matrix and sources disagree on n");
  NoisyMixture out{A * sources.S, 0.0};
  if (!snr_in_db) return out;
  const double m = static_cast<double>(out.X.rows());
  const double T = static_cast<double>(out.X.cols());
  const double signal_power = out.X.squaredNorm() / (m * T);
  out.sigma2 = signal_power / std::pow(10.0, *snr_in_db / 10.0);
  const double sigma = std::sqrt(out.sigma2);
  Rng rng(seed, Stream::Noise);
  for (Eigen::Index t = 0; t < out.X.cols(); ++t)
    for (Eigen::Index i = 0; i < out.X.rows(); ++i) out.X(i, t) += sigma * rng.normal();
  return out;
}

Matrix take_first_rows(const Matrix& A, Eigen::Index rows) {
  if (rows < A.cols() || rows > A.rows())
    throw InvalidInput("row prefix must keep at least n and at most m rows");
  Matrix prefix = A.topRows(rows);
  if (!has_full_column_rank(prefix)) throw DegenerateMixing("row prefix is rank deficient");
  return prefix;
}

}  // namespace pem
