#pragma once

#include <cstddef>
#include <functional>

namespace bregsel {

enum class QuadratureRule
{
  adaptive_simpson
};

//! Integration window and accuracy target for a one-dimensional integral.
struct QuadratureSpec
{
  double lower = 0.0;
  double upper = 1.0;
  QuadratureRule rule = QuadratureRule::adaptive_simpson;
  double abs_tol = 1e-10;
  int max_depth = 40;
  //! Number of equal panels the window is cut into before adapting.
  int initial_panels = 32;

  //! Throws DomainError unless lower < upper, abs_tol > 0, max_depth > 0.
  void validate() const;
};

struct QuadratureResult
{
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

//! Globally adaptive Simpson quadrature.
//!
//! Panels are kept in a priority queue keyed by their local error estimate
//! |S(left) + S(right) - S(whole)| / 15, and the worst panel is bisected until
//! the summed estimate drops below `abs_tol`. Jump discontinuities therefore
//! converge: their panel error shrinks linearly with the panel width.
//! Throws ConvergenceError (carrying the partial value) when the worst panel
//! has already been bisected `max_depth` times.
QuadratureResult integrate(const std::function<double(double)>& f, const QuadratureSpec& spec);

} // namespace bregsel
