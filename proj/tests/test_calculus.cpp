#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "otlab/calculus.hpp"
#include "otlab/transport.hpp"

using namespace otlab;

namespace {

Mat random_symmetric(std::mt19937& gen, int dim, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat a(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      a(i, j) = u(gen);
      a(j, i) = a(i, j);
    }
  return a;
}

Mat random_spd(std::mt19937& gen, int dim, double shift) {
  Mat a = random_symmetric(gen, dim, 1.0);
  Mat s = transpose(a) * a;
  for (int i = 0; i < dim; ++i) s(i, i) += shift;
  return s;
}

}  // namespace

TEST_CASE("hs_norm closed forms") {
  CHECK(hs_norm(Mat::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(hs_norm(Mat::diag({3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-15));
  Mat a(2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 2;
  a(1, 1) = 1;
  CHECK(hs_norm(a) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
}

TEST_CASE("op_norm closed forms and asymmetry error") {
  CHECK(op_norm(Mat::identity(2)) == doctest::Approx(1.0));
  CHECK(op_norm(Mat::diag({2.0, -3.0})) == doctest::Approx(3.0));
  Mat a(2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 2;
  // characteristic roots are 1 and 3
  CHECK(op_norm(a) == doctest::Approx(3.0).epsilon(1e-13));
  Mat bad(2);
  bad(0, 1) = 1e-6;
  CHECK_THROWS_AS(op_norm(bad), AsymmetryError);
}

TEST_CASE("positive_part") {
  const Mat d = positive_part(Mat::diag({2.0, -3.0}));
  CHECK(d(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(d(1, 1) == doctest::Approx(0.0).epsilon(1e-14));

  Mat offd(2);
  offd(0, 1) = 1.0;
  offd(1, 0) = 1.0;
  // eigenpairs (1, -1) with vectors (1, +-1)/sqrt(2)
  const Mat p = positive_part(offd);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(p(i, j) == doctest::Approx(0.5).epsilon(1e-13));

  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(trial % 2);
    const Mat spd = random_spd(gen, dim, 0.3);
    const Mat same = positive_part(spd);
    CHECK(hs_norm(same - spd) <= 1e-12 * (1.0 + hs_norm(spd)));

    const Mat a = random_symmetric(gen, dim, 2.0);
    const Mat plus = positive_part(a);
    const Mat minus = positive_part(-1.0 * a);
    // A+ + (-A)+ reconstructs |A| spectrally
    const SymSpectrum s = sym_eigen(a);
    Mat abs_a(dim);
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          abs_a(i, j) +=
              std::abs(s.eigenvalues[k]) * s.eigenvectors(i, k) * s.eigenvectors(j, k);
    CHECK(hs_norm(plus + minus - abs_a) <= 1e-11 * (1.0 + hs_norm(a)));

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = u(gen);
    CHECK(dot(plus * x, x) >= -1e-12);
  }
}

TEST_CASE("det2_fredholm") {
  CHECK(det2_fredholm(Mat::identity(2), 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(det2_fredholm(Mat::diag({2.0, 1.0}), 2) ==
        doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(det2_fredholm(Mat::diag({1.0, -0.5}), 2), SingularMatrixError);

  std::mt19937 gen(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 3;
    const Mat a = random_spd(gen, dim, 0.05);
    CHECK(det2_fredholm(a, dim) <= 1.0 + 1e-12);
    CHECK(log_det2_fredholm(a, dim) <= 1e-12);
  }
}

TEST_CASE("matrix_sqrt") {
  CHECK(hs_norm(matrix_sqrt(Mat::identity(3)) - Mat::identity(3)) < 1e-13);
  const Mat s = matrix_sqrt(Mat::diag({4.0, 9.0}));
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-13));

  Mat a(2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 2;
  const Mat b = matrix_sqrt(a);
  CHECK(hs_norm(b * b - a) <= 1e-10 * (1.0 + hs_norm(a)));
  CHECK_THROWS_AS(matrix_sqrt(Mat::diag({1.0, 1e-14})), SingularMatrixError);
}

TEST_CASE("sym_eigen reconstruction and orthonormality") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 80; ++trial) {
    const int dim = 1 + trial % 3;
    const Mat a = random_symmetric(gen, dim, 3.0);
    const SymSpectrum s = sym_eigen(a);
    Mat rec(dim);
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          rec(i, j) += s.eigenvalues[k] * s.eigenvectors(i, k) * s.eigenvectors(j, k);
    CHECK(hs_norm(rec - a) <= 1e-10 * (1.0 + hs_norm(a)));
    const Mat qtq = transpose(s.eigenvectors) * s.eigenvectors;
    CHECK(hs_norm(qtq - Mat::identity(dim)) <= 1e-12);
    for (int k = 0; k + 1 < dim; ++k) CHECK(s.eigenvalues[k] <= s.eigenvalues[k + 1] + 1e-14);
  }
}

TEST_CASE("norm sandwich: op <= hs <= sqrt(d) op") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 3;
    const Mat a = random_symmetric(gen, dim, 2.5);
    const double op = op_norm(a), hs = hs_norm(a);
    CHECK(op <= hs + 1e-12);
    CHECK(hs <= std::sqrt(static_cast<double>(dim)) * op + 1e-12);
    CHECK(spectral_norm(a) == doctest::Approx(op).epsilon(1e-11));
  }
}

TEST_CASE("trace representation of the third-order integrand") {
  // Tr[(A^-1 H)^2] == || A^-1/2 H A^-1/2 ||_HS^2 for SPD A, symmetric H.
  std::mt19937 gen(41);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 3;
    const Mat a = random_spd(gen, dim, 0.4);
    const Mat h = random_symmetric(gen, dim, 1.5);
    const Mat m = inverse(a) * h;
    const double route1 = trace(m * m);
    const Mat b = matrix_inv_sqrt(a);
    const double route2 = hs_norm(b * h * b) * hs_norm(b * h * b);
    CHECK(route1 == doctest::Approx(route2).epsilon(1e-10));
  }
}

TEST_CASE("fisher information of catalog measures") {
  const ProbabilityMeasure g1 = make_gaussian(Vec{0.0}, Mat::diag({1.0}));
  CHECK(fisher_information(g1, g1.rule) == doctest::Approx(1.0).epsilon(1e-10));

  const ProbabilityMeasure g4 = make_gaussian(Vec{0.0}, Mat::diag({4.0}));
  CHECK(fisher_information(g4, g4.rule) == doctest::Approx(0.25).epsilon(1e-8));

  Mat cov(2);
  cov(0, 0) = 2.0;
  cov(0, 1) = 1.0;
  cov(1, 0) = 1.0;
  cov(1, 1) = 2.0;
  const ProbabilityMeasure gc = make_gaussian(Vec{0.0, 0.0}, cov);
  CHECK(fisher_information(gc, gc.rule) ==
        doctest::Approx(trace(inverse(cov))).epsilon(1e-8));

  const ProbabilityMeasure pert = make_perturbed_gaussian(0.3);
  const double base = fisher_information(pert, pert.rule);
  const QuadratureRule fine = tensor_rule(1, 2 * pert.rule.order, pert.rule.radius);
  CHECK(fisher_information(pert, fine) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("relative fisher and entropy for shift densities") {
  const ProbabilityMeasure gamma1 = make_gaussian(Vec{0.0}, Mat::diag({1.0}));
  const RelativeDensity unit = make_gaussian_shift_density(Vec{0.0});
  CHECK(relative_fisher(unit, gamma1, gamma1.rule) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(relative_entropy(unit, gamma1, gamma1.rule) == doctest::Approx(0.0).epsilon(1e-12));

  const RelativeDensity shift1 = make_gaussian_shift_density(Vec{1.0});
  CHECK(relative_fisher(shift1, gamma1, gamma1.rule) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(relative_entropy(shift1, gamma1, gamma1.rule) == doctest::Approx(0.5).epsilon(1e-10));

  const ProbabilityMeasure gamma2 = make_gaussian(Vec{0.0, 0.0}, Mat::identity(2));
  const RelativeDensity shift2d = make_gaussian_shift_density(Vec{1.0, 1.0});
  CHECK(relative_fisher(shift2d, gamma2, gamma2.rule) == doctest::Approx(2.0).epsilon(1e-10));

  // relative entropy is nonnegative across the catalog of densities
  const ProbabilityMeasure pert = make_perturbed_gaussian(0.3);
  const QuadratureRule rule = tensor_rule(1, 400, std::max(pert.rule.radius, gamma1.rule.radius));
  const RelativeDensity ratio = density_ratio(pert, gamma1);
  CHECK(relative_entropy(ratio, gamma1, rule) >= -1e-12);
}

TEST_CASE("wasserstein2 closed forms") {
  const ProbabilityMeasure gamma1 = make_gaussian(Vec{0.0}, Mat::diag({1.0}));
  const TransportMap id = identity_map(1);
  CHECK(wasserstein2(gamma1, gamma1, id, gamma1.rule) == doctest::Approx(0.0).epsilon(1e-12));

  const ProbabilityMeasure shifted = make_gaussian(Vec{1.0}, Mat::diag({1.0}));
  const TransportMap to_center = brenier_gaussian(shifted, gamma1);
  const QuadratureRule rule = tensor_rule(1, 400, shifted.rule.radius);
  CHECK(wasserstein2(shifted, gamma1, to_center, rule) == doctest::Approx(1.0).epsilon(1e-10));

  const ProbabilityMeasure g4 = make_gaussian(Vec{0.0}, Mat::diag({4.0}));
  const TransportMap half = brenier_gaussian(g4, gamma1);
  CHECK(wasserstein2(g4, gamma1, half, g4.rule) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("directional lp norms") {
  const ProbabilityMeasure gamma1 = make_gaussian(Vec{0.0}, Mat::diag({1.0}));
  CHECK(directional_lp_norm([](const Vec&) { return -2.5; }, gamma1, 3.0, gamma1.rule) ==
        doctest::Approx(2.5).epsilon(1e-10));
  // E x^2 = 1
  CHECK(directional_lp_norm([](const Vec& x) { return x[0] * x[0]; }, gamma1, 1.0,
                            gamma1.rule) == doctest::Approx(1.0).epsilon(1e-10));
  // field x, p = 2: (E x^2)^(1/2) = 1
  CHECK(directional_lp_norm([](const Vec& x) { return x[0]; }, gamma1, 2.0, gamma1.rule) ==
        doctest::Approx(1.0).epsilon(1e-10));
  // field x^2, p = 2: (E x^4)^(1/2) = sqrt(3)
  CHECK(directional_lp_norm([](const Vec& x) { return x[0] * x[0]; }, gamma1, 2.0,
                            gamma1.rule) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  // non-integer p against the closed-form absolute moment
  // E |x|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi); the |x|^p cusp at zero limits
  // the quadrature to algebraic accuracy
  const double p = 1.5;
  const double expect =
      std::pow(std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(M_PI), 1.0 / p);
  CHECK(directional_lp_norm([](const Vec& x) { return x[0]; }, gamma1, p, gamma1.rule) ==
        doctest::Approx(expect).epsilon(1e-4));
  CHECK_THROWS_AS(
      directional_lp_norm([](const Vec&) { return 1.0; }, gamma1, 0.5, gamma1.rule),
      InvalidArgumentError);
}
