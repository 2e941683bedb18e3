#include "otlab/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace otlab {

namespace {

// P_n(x) and P_n'(x) via the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Root i (counting from +1 side), standard cosine initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(order, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(order, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Mirror so the rule is exactly symmetric.
    nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    nodes[static_cast<std::size_t>(i)] = -x;
    weights[static_cast<std::size_t>(order - 1 - i)] = w;
    weights[static_cast<std::size_t>(i)] = w;
  }
  if (order % 2 == 1) nodes[static_cast<std::size_t>(order / 2)] = 0.0;
}

QuadratureRule tensor_rule(int dim, int order, double radius) {
  if (dim < 1 || dim > kMaxDim)
    throw UnsupportedDimensionError("tensor_rule: dim must be 1..3, got " + std::to_string(dim));
  if (order < 2) throw InvalidArgumentError("tensor_rule: order must be >= 2");
  if (!(radius > 0.0)) throw InvalidArgumentError("tensor_rule: radius must be positive");

  std::vector<double> x1, w1;
  gauss_legendre(order, x1, w1);
  for (auto& x : x1) x *= radius;
  for (auto& w : w1) w *= radius;

  QuadratureRule rule;
  rule.dim = dim;
  rule.order = order;
  rule.radius = radius;
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(order);
  rule.nodes.reserve(n);
  rule.weights.reserve(n);

  // First axis is the outer loop, so nodes sharing x1 are contiguous.
  if (dim == 1) {
    for (int i = 0; i < order; ++i) {
      Vec p(1);
      p[0] = x1[static_cast<std::size_t>(i)];
      rule.nodes.push_back(p);
      rule.weights.push_back(w1[static_cast<std::size_t>(i)]);
    }
  } else if (dim == 2) {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        Vec p(2);
        p[0] = x1[static_cast<std::size_t>(i)];
        p[1] = x1[static_cast<std::size_t>(j)];
        rule.nodes.push_back(p);
        rule.weights.push_back(w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)]);
      }
  } else {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j)
        for (int k = 0; k < order; ++k) {
          Vec p(3);
          p[0] = x1[static_cast<std::size_t>(i)];
          p[1] = x1[static_cast<std::size_t>(j)];
          p[2] = x1[static_cast<std::size_t>(k)];
          rule.nodes.push_back(p);
          rule.weights.push_back(w1[static_cast<std::size_t>(i)] *
                                 w1[static_cast<std::size_t>(j)] *
                                 w1[static_cast<std::size_t>(k)]);
        }
  }
  return rule;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = n / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

double integrate(const std::function<double(const Vec&)>& f, const QuadratureRule& rule) {
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrate: non-finite integrand at node (";
      for (int k = 0; k < rule.dim; ++k) os << (k ? ", " : "") << rule.nodes[i][k];
      os << ")";
      throw NonFiniteIntegrandError(os.str());
    }
    terms[i] = rule.weights[i] * v;
  }
  return pairwise_sum(terms);
}

}  // namespace otlab
