#pragma once

#include <functional>
#include <span>
#include <vector>

#include "otlab/linalg.hpp"

namespace otlab {

//! Tensor-product Gauss-Legendre rule on the box [-radius, radius]^dim.
//!
//! Immutable after construction; safe to share across threads. Every integral
//! in the library runs through one of these rules.
struct QuadratureRule {
  int dim = 0;
  int order = 0;       // nodes per axis
  double radius = 0.0;  // half-width of the box
  std::vector<Vec> nodes;
  std::vector<double> weights;  // all strictly positive, node count = order^dim
};

QuadratureRule tensor_rule(int dim, int order, double radius);

//! Gauss-Legendre nodes/weights on [-1, 1] (Newton on the Legendre recurrence,
//! symmetrized pairs). Exposed for tests.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

//! Deterministic fixed-order pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

//! Sum of w_i * f(x_i) with pairwise reduction. Throws NonFiniteIntegrandError
//! if f is NaN/Inf at some node.
double integrate(const std::function<double(const Vec&)>& f, const QuadratureRule& rule);

}  // namespace otlab
