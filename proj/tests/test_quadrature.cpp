#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "otlab/quadrature.hpp"

using namespace otlab;

namespace {

// Independent oracle for Legendre roots: sign-change bisection on the
// recurrence-evaluated polynomial, no derivative information.
double legendre_value(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return n == 0 ? 1.0 : p1;
}

std::vector<double> bisection_roots(int n) {
  std::vector<double> roots;
  const int scan = 20000;
  double prev_x = -1.0, prev_v = legendre_value(n, -1.0);
  for (int i = 1; i <= scan; ++i) {
    const double x = -1.0 + 2.0 * i / scan;
    const double v = legendre_value(n, x);
    if (v == 0.0) {
      roots.push_back(x);
    } else if (prev_v * v < 0.0) {
      double a = prev_x, b = x;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (legendre_value(n, a) * legendre_value(n, m) <= 0.0)
          b = m;
        else
          a = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  return roots;
}

// Weights for the bisection roots from the moment system sum w_i x_i^k =
// int_{-1}^{1} x^k dx, solved by Gaussian elimination.
std::vector<double> moment_weights(const std::vector<double>& roots) {
  const int n = static_cast<int>(roots.size());
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j)
      a[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          std::pow(roots[static_cast<std::size_t>(j)], k);
    a[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] =
        (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
        piv = r;
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                       a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c <= n; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    w[static_cast<std::size_t>(r)] = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(n)] /
                                     a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  return w;
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace

TEST_CASE("order-2 rule matches the closed-form node table") {
  const QuadratureRule r = tensor_rule(1, 2, 1.0);
  REQUIRE(r.nodes.size() == 2);
  CHECK(r.nodes[0][0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(r.nodes[1][0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("order-3 rule matches the closed-form node table") {
  const QuadratureRule r = tensor_rule(1, 3, 1.0);
  CHECK(r.nodes[0][0] == doctest::Approx(-std::sqrt(3.0 / 5.0)).epsilon(1e-14));
  CHECK(std::abs(r.nodes[1][0]) < 1e-15);
  CHECK(r.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
  CHECK(r.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("order-5 rule agrees with bisection roots and moment-system weights") {
  std::vector<double> nodes, weights;
  gauss_legendre(5, nodes, weights);
  const std::vector<double> roots = bisection_roots(5);
  REQUIRE(roots.size() == 5);
  const std::vector<double> w = moment_weights(roots);
  for (int i = 0; i < 5; ++i) {
    CHECK(nodes[static_cast<std::size_t>(i)] ==
          doctest::Approx(roots[static_cast<std::size_t>(i)]).epsilon(1e-12));
    CHECK(weights[static_cast<std::size_t>(i)] ==
          doctest::Approx(w[static_cast<std::size_t>(i)]).epsilon(1e-11));
  }
}

TEST_CASE("structure: weights positive, node count = order^dim") {
  for (int dim = 1; dim <= 3; ++dim) {
    const int order = dim == 3 ? 5 : 9;
    const QuadratureRule r = tensor_rule(dim, order, 2.5);
    std::size_t expect = 1;
    for (int k = 0; k < dim; ++k) expect *= static_cast<std::size_t>(order);
    CHECK(r.nodes.size() == expect);
    CHECK(r.weights.size() == expect);
    for (double w : r.weights) CHECK(w > 0.0);
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(tensor_rule(0, 4, 1.0), UnsupportedDimensionError);
  CHECK_THROWS_AS(tensor_rule(4, 4, 1.0), UnsupportedDimensionError);
  CHECK_THROWS_AS(tensor_rule(1, 1, 1.0), InvalidArgumentError);
  CHECK_THROWS_AS(tensor_rule(1, 4, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(tensor_rule(1, 4, -2.0), InvalidArgumentError);
}

TEST_CASE("constant integrates to the box volume") {
  const QuadratureRule r = tensor_rule(1, 50, 10.0);
  const double v = integrate([](const Vec&) { return 1.0; }, r);
  CHECK(v == doctest::Approx(20.0).epsilon(1e-12));
  const QuadratureRule r2 = tensor_rule(2, 20, 3.0);
  CHECK(integrate([](const Vec&) { return 1.0; }, r2) == doctest::Approx(36.0).epsilon(1e-12));
}

TEST_CASE("monomial exactness up to degree 2n-1") {
  const double R = 1.7;
  for (int order = 2; order <= 8; ++order) {
    const QuadratureRule r = tensor_rule(1, order, R);
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      const double got = integrate(
          [deg](const Vec& x) {
            double v = 1.0;
            for (int k = 0; k < deg; ++k) v *= x[0];
            return v;
          },
          r);
      const double expect = (deg % 2 == 1) ? 0.0 : 2.0 * std::pow(R, deg + 1) / (deg + 1);
      if (expect == 0.0)
        CHECK(std::abs(got) < 1e-10 * std::pow(R, deg + 1));
      else
        CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("Gaussian mass against the error-function oracle") {
  const QuadratureRule r1 = tensor_rule(1, 400, 12.0);
  const double m1 = integrate([](const Vec& x) { return std_normal_pdf(x[0]); }, r1);
  CHECK(m1 == doctest::Approx(std::erf(12.0 / std::sqrt(2.0))).epsilon(1e-12));

  const QuadratureRule r2 = tensor_rule(2, 100, 8.0);
  const double m2 =
      integrate([](const Vec& x) { return std_normal_pdf(x[0]) * std_normal_pdf(x[1]); }, r2);
  const double erf1 = std::erf(8.0 / std::sqrt(2.0));
  CHECK(m2 == doctest::Approx(erf1 * erf1).epsilon(1e-10));
}

TEST_CASE("Gaussian second moment") {
  const QuadratureRule r = tensor_rule(1, 400, 12.0);
  const double m = integrate([](const Vec& x) { return x[0] * x[0] * std_normal_pdf(x[0]); }, r);
  CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero integrand") {
  const QuadratureRule r = tensor_rule(1, 16, 2.0);
  CHECK(integrate([](const Vec&) { return 0.0; }, r) == 0.0);
}

TEST_CASE("determinism: repeated integration is bit-identical") {
  const QuadratureRule r = tensor_rule(2, 60, 5.0);
  auto f = [](const Vec& x) {
    return std::sin(x[0]) * std::exp(-x[1] * x[1] / 3.0) + x[0] * x[1];
  };
  const double a = integrate(f, r);
  const double b = integrate(f, r);
  CHECK(a == b);
}

TEST_CASE("pairwise summation agrees with long-double reference") {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(100001);
  for (auto& x : v) x = u(gen) * std::pow(10.0, static_cast<int>(u(gen) * 8));
  long double ref = 0.0;
  for (double x : v) ref += static_cast<long double>(x);
  const double got = pairwise_sum(v);
  CHECK(std::abs(got - static_cast<double>(ref)) <=
        1e-9 * std::max(1.0, std::abs(static_cast<double>(ref))));
}

TEST_CASE("non-finite integrand raises and names the node") {
  const QuadratureRule r = tensor_rule(1, 8, 1.0);
  CHECK_THROWS_AS(integrate([](const Vec& x) { return x[0] > 0 ? 1.0 / 0.0 : 0.0; }, r),
                  NonFiniteIntegrandError);
  try {
    integrate([](const Vec&) { return std::nan(""); }, r);
    FAIL("expected NonFiniteIntegrandError");
  } catch (const NonFiniteIntegrandError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}
