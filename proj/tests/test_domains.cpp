#include <doctest.h>

#include "pem/domains.hpp"
#include "test_support.hpp"

using namespace pem;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

constexpr SourceDomain kAll[] = {SourceDomain::Antisparse, SourceDomain::NonnegAntisparse,
                                 SourceDomain::Sparse, SourceDomain::NonnegSparse,
                                 SourceDomain::Simplex};

}  // namespace

TEST_CASE("domain names round-trip") {
  for (auto d : kAll) CHECK(parse_domain(to_string(d)) == d);
  CHECK(to_string(SourceDomain::NonnegAntisparse) == "nn_antisparse");
  CHECK_THROWS_AS(parse_domain("box"), InvalidInput);
}

TEST_CASE("threshold unit membership") {
  CHECK_FALSE(requires_threshold_unit(SourceDomain::Antisparse));
  CHECK_FALSE(requires_threshold_unit(SourceDomain::NonnegAntisparse));
  CHECK(requires_threshold_unit(SourceDomain::Sparse));
  CHECK(requires_threshold_unit(SourceDomain::NonnegSparse));
  CHECK(requires_threshold_unit(SourceDomain::Simplex));
}

TEST_CASE("apply_nonlinearity examples") {
  CHECK(apply_nonlinearity(SourceDomain::Antisparse, v2(1.5, -0.3), 7.0) == v2(1.0, -0.3));
  const Vector s = apply_nonlinearity(SourceDomain::Sparse, v2(0.7, -0.1), 0.2);
  CHECK(s(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s(1) == 0.0);
  const Vector p = apply_nonlinearity(SourceDomain::Simplex, v2(0.4, 0.1), -0.1);
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(apply_nonlinearity(SourceDomain::NonnegAntisparse, v2(-0.5, 1.5), 0.0) == v2(0.0, 1.0));
  CHECK(apply_nonlinearity(SourceDomain::NonnegSparse, v2(0.5, -0.5), 0.25) == v2(0.25, 0.0));
}

TEST_CASE("box nonlinearities are idempotent") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = test::gaussian(gen, 5, 1, 2.0);
    for (auto d : {SourceDomain::Antisparse, SourceDomain::NonnegAntisparse}) {
      const Vector once = apply_nonlinearity(d, u, 0.0);
      CHECK(apply_nonlinearity(d, once, 0.0) == once);
    }
  }
}

TEST_CASE("update_threshold examples") {
  Vector y = v2(0.5, -0.5);
  CHECK(update_threshold(SourceDomain::Sparse, 0.0, y, 0.3) == 0.0);
  y = v2(0.2, 0.3);
  CHECK(update_threshold(SourceDomain::NonnegSparse, 0.1, y, 0.5) == 0.0);
  CHECK(update_threshold(SourceDomain::Simplex, 0.1, y, 0.5) == doctest::Approx(-0.15).epsilon(1e-14));
  CHECK_THROWS_AS(update_threshold(SourceDomain::Antisparse, 0.0, y, 0.5), DomainMismatch);
  CHECK_THROWS_AS(update_threshold(SourceDomain::NonnegAntisparse, 0.0, y, 0.5), DomainMismatch);
}

TEST_CASE("euclidean_project examples") {
  Vector v(3);
  v << 0.5, 0.5, 0.5;
  const Vector p = euclidean_project(SourceDomain::Simplex, v);
  for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(euclidean_project(SourceDomain::Sparse, v2(2.0, 0.0)) == v2(1.0, 0.0));
  CHECK(euclidean_project(SourceDomain::Antisparse, v2(0.2, -0.4)) == v2(0.2, -0.4));
}

TEST_CASE("euclidean_project matches a grid-search minimizer") {
  std::mt19937_64 gen(22);
  const double h = 0.01;
  for (auto d : kAll) {
    for (int trial = 0; trial < 40; ++trial) {
      const Vector v = test::gaussian(gen, 2, 1, 1.2);
      double best = 1e300;
      Vector arg(2);
      auto consider = [&](double a, double b) {
        const Vector p = v2(a, b);
        if (!contains(d, p, 1e-9)) return;
        const double dist = (p - v).squaredNorm();
        if (dist < best) {
          best = dist;
          arg = p;
        }
      };
      if (d == SourceDomain::Simplex) {
        for (int i = 0; i <= 100; ++i) consider(i * h, 1.0 - i * h);
      } else {
        for (int i = -100; i <= 100; ++i)
          for (int j = -100; j <= 100; ++j) consider(i * h, j * h);
      }
      const Vector p = euclidean_project(d, v);
      CHECK(contains(d, p, 1e-12));
      CHECK((p - arg).cwiseAbs().maxCoeff() <= 0.02);
      CHECK((p - v).squaredNorm() <= best + 1e-12);
    }
  }
}

TEST_CASE("soft threshold is the l1 proximal map") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const double u = test::uniform(gen, -3, 3);
    const double lam = test::uniform(gen, 0, 1.5);
    double best = 1e300;
    double arg = 0;
    for (int k = -40000; k <= 40000; ++k) {
      const double p = k * 1e-4;
      const double f = 0.5 * (p - u) * (p - u) + lam * std::abs(p);
      if (f < best) {
        best = f;
        arg = p;
      }
    }
    CHECK(std::abs(soft_threshold(u, lam) - arg) <= 0.005);
  }
}

TEST_CASE("contains examples") {
  CHECK(contains(SourceDomain::Simplex, v2(0.3, 0.7), 1e-9));
  CHECK_FALSE(contains(SourceDomain::Sparse, v2(0.6, 0.6), 1e-9));
  CHECK(contains(SourceDomain::NonnegAntisparse, v2(1 + 1e-10, 0), 1e-9));
  CHECK_FALSE(contains(SourceDomain::NonnegSparse, v2(-0.1, 0.2), 1e-9));
  CHECK_FALSE(contains(SourceDomain::Antisparse, v2(std::nan(""), 0), 1e-9));
}

TEST_CASE("threshold dynamics converge to feasible points") {
  // Fixed-point iteration of the nonlinearity and the threshold on a fixed
  // pre-activation; on convergence the output lies in the domain.
  std::mt19937_64 gen(24);
  for (auto d : {SourceDomain::Sparse, SourceDomain::NonnegSparse, SourceDomain::Simplex}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector u = test::gaussian(gen, 4, 1, 0.8);
      double lam = 0.0;
      Vector y = apply_nonlinearity(d, u, lam);
      for (int it = 0; it < 20000; ++it) {
        lam = update_threshold(d, lam, y, 0.05);
        y = apply_nonlinearity(d, u, lam);
      }
      const double residual = d == SourceDomain::Sparse ? y.cwiseAbs().sum() - 1 : y.sum() - 1;
      const bool settled = d == SourceDomain::Simplex ? std::abs(residual) < 1e-4
                                                      : residual < 1e-4 && (lam == 0.0 || std::abs(residual) < 1e-4);
      CHECK(settled);
      CHECK(contains(d, y, 1e-4));
    }
  }
}
