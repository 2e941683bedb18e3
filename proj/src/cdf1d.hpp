#pragma once

#include <functional>
#include <vector>

#include "otlab/errors.hpp"

namespace otlab {

//! Cumulative integrals of a positive 1D density on [lo, hi]: a uniform grid
//! with per-interval Gauss-Legendre(16) panels, accumulated separately from
//! both ends so that quantiles keep relative precision deep in either tail.
//! An optional companion integrand (used for the conditional-CDF derivatives
//! of triangular maps) is accumulated on the same panels.
class Cdf1d {
 public:
  Cdf1d(std::function<double(double)> density, double lo, double hi, int grid,
        std::function<double(double)> companion = nullptr);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double total() const { return lower_.back(); }

  double density(double x) const { return density_(x); }
  double cdf(double x) const;       // integral from lo to x
  double survival(double x) const;  // integral from x to hi

  double companion_cdf(double x) const;
  double companion_total() const { return clower_.back(); }

  //! Solve cdf(y) = u (u measured from the bottom).
  double quantile(double u) const;
  //! Solve survival(y) = s (s measured from the top).
  double quantile_upper(double s) const;

  //! Quantile coupling: the target point y with F_target(y)/target.total()
  //! equal to cdf(x)/total(), evaluated through whichever tail keeps relative
  //! precision.
  double map_to(const Cdf1d& target, double x) const;

 private:
  double panel(const std::function<double(double)>& f, double a, double b) const;
  int locate(double x) const;

  std::function<double(double)> density_;
  std::function<double(double)> companion_;
  double lo_ = 0.0, hi_ = 0.0, h_ = 0.0;
  int grid_ = 0;
  std::vector<double> xs_, lower_, upper_;
  std::vector<double> clower_;
};

}  // namespace otlab
