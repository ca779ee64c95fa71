#ifndef PEM_DATAGEN_HPP
#define PEM_DATAGEN_HPP

#include <cstdint>
#include <optional>
#include <string_view>

#include "pem/core_math.hpp"
#include "pem/domains.hpp"
#include "pem/rng.hpp"

namespace pem {

/// Laws for the entries of the mixing matrix, all centered with unit
/// variance: N(0,1), U(-sqrt3, sqrt3), Laplace(0, 1/sqrt2), Rademacher,
/// sqrt(3/5) * t_5.
enum class MixingDistribution { Gaussian, Uniform, Laplace, Rademacher, StudentT5 };

std::string_view to_string(MixingDistribution d) noexcept;
MixingDistribution parse_mixing_distribution(std::string_view name);

/// n x T ground-truth sources; every column lies in `domain`.
struct SourceBatch {
  Matrix S;
  SourceDomain domain = SourceDomain::Antisparse;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

/// I.i.d. columns uniform on the domain.
SourceBatch sample_uniform_source(SourceDomain domain, int n, int T, std::uint64_t seed);

/// Correlated sources with uniform marginals: latent multivariate t with
/// equicorrelation `rho` mapped through the t CDF. Box domains only.
SourceBatch sample_copula_t_source(SourceDomain domain, int n, int T, double rho, int nu,
                                   std::uint64_t seed);

/// One draw from a mixing-entry law.
double sample_mixing_entry(MixingDistribution dist, Rng& rng);

/// m x n mixing matrix with i.i.d. entries and full column rank (resampled
/// up to 10 times).
Matrix gen_mixing(int m, int n, MixingDistribution dist, std::uint64_t seed);

/// True when A'A has a Cholesky factorization with every pivot > 1e-10.
bool has_full_column_rank(const Matrix& A);

struct NoisyMixture {
  Matrix X;
  double sigma2 = 0.0;
};

/// X = A S + noise at the requested input SNR. The signal power is
/// ||A S||_F^2 / (m T); no SNR means no noise and X == A S exactly.
NoisyMixture mix_with_noise(const Matrix& A, const SourceBatch& sources,
                            std::optional<double> snr_in_db, std::uint64_t seed);

/// First `rows` rows of A (nested mixtures ablation). The prefix must still
/// have full column rank.
Matrix take_first_rows(const Matrix& A, Eigen::Index rows);

}  // namespace pem

#endif  // PEM_DATAGEN_HPP
