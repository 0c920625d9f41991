#include "bregsel/quadrature.hpp"

#include "bregsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace bregsel {

void
QuadratureSpec::validate() const
{
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
    throw DomainError("quadrature window must satisfy lower < upper");
  }
  if (!(abs_tol > 0.0)) {
    throw DomainError("quadrature abs_tol must be positive");
  }
  if (max_depth <= 0 || initial_panels <= 0) {
    throw DomainError("quadrature max_depth and initial_panels must be positive");
  }
}

namespace {

// bounds memory for integrands that never settle
constexpr std::size_t kMaxPanels = std::size_t{ 1 } << 20;

struct Panel
{
  double a, b;
  // integrand at a, a+w/4, a+w/2, a+3w/4, b
  double f0, f1, f2, f3, f4;
  double whole; // Simpson on [a, b]
  double halves; // Simpson on [a, m] + [m, b]
  double error;
  int depth;

  double value() const { return halves + (halves - whole) / 15.0; }
};

Panel
make_panel(double a, double b, double f0, double f1, double f2, double f3, double f4, int depth)
{
  const double w = b - a;
  Panel p{ a, b, f0, f1, f2, f3, f4, 0.0, 0.0, 0.0, depth };
  p.whole = w / 6.0 * (f0 + 4.0 * f2 + f4);
  p.halves = w / 12.0 * (f0 + 4.0 * f1 + 2.0 * f2 + 4.0 * f3 + f4);
  p.error = std::abs(p.halves - p.whole) / 15.0;
  return p;
}

struct ByError
{
  bool operator()(const Panel& x, const Panel& y) const
  {
    if (x.error != y.error) {
      return x.error < y.error;
    }
    return x.a > y.a;
  }
};

double
checked(const std::function<double(double)>& f, double x)
{
  const double v = f(x);
  if (std::isnan(v)) {
    throw DomainError("integrand returned NaN at x = " + std::to_string(x));
  }
  return v;
}

} // namespace

QuadratureResult
integrate(const std::function<double(double)>& f, const QuadratureSpec& spec)
{
  spec.validate();

  QuadratureResult result;
  std::priority_queue<Panel, std::vector<Panel>, ByError> queue;

  const int panels = spec.initial_panels;
  const double width = (spec.upper - spec.lower) / panels;
  double f_left = checked(f, spec.lower);
  result.evaluations = 1;
  for (int i = 0; i < panels; ++i) {
    const double a = spec.lower + i * width;
    const double b = (i + 1 == panels) ? spec.upper : spec.lower + (i + 1) * width;
    const double w = b - a;
    const double f1 = checked(f, a + 0.25 * w);
    const double f2 = checked(f, a + 0.5 * w);
    const double f3 = checked(f, a + 0.75 * w);
    const double f4 = checked(f, b);
    result.evaluations += 4;
    queue.push(make_panel(a, b, f_left, f1, f2, f3, f4, 0));
    f_left = f4;
  }

  auto total_error = [&queue]() {
    // priority_queue hides its container; copy is cheap relative to integrand cost
    auto copy = queue;
    double s = 0.0;
    while (!copy.empty()) {
      s += copy.top().error;
      copy.pop();
    }
    return s;
  };

  auto give_up = [&queue](const char* why, double error) {
    double partial = 0.0;
    std::vector<Panel> all;
    while (!queue.empty()) {
      all.push_back(queue.top());
      queue.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : all) {
      partial += p.value();
    }
    throw ConvergenceError(why, partial, error);
  };

  double running = total_error();
  while (running > spec.abs_tol) {
    const Panel worst = queue.top();
    if (worst.depth >= spec.max_depth || queue.size() >= kMaxPanels) {
      // recompute exactly before giving up; the running sum can drift
      running = total_error();
      if (running <= spec.abs_tol) {
        break;
      }
      give_up(worst.depth >= spec.max_depth
                ? "adaptive Simpson did not reach abs_tol within max_depth"
                : "adaptive Simpson exhausted its panel budget",
              running);
    }
    queue.pop();
    running -= worst.error;

    const double m = 0.5 * (worst.a + worst.b);
    const double wl = m - worst.a;
    const double wr = worst.b - m;
    const double fl1 = checked(f, worst.a + 0.25 * wl);
    const double fl3 = checked(f, worst.a + 0.75 * wl);
    const double fr1 = checked(f, m + 0.25 * wr);
    const double fr3 = checked(f, m + 0.75 * wr);
    result.evaluations += 4;

    const Panel left = make_panel(worst.a, m, worst.f0, fl1, worst.f1, fl3, worst.f2, worst.depth + 1);
    const Panel right = make_panel(m, worst.b, worst.f2, fr1, worst.f3, fr3, worst.f4, worst.depth + 1);
    running += left.error + right.error;
    queue.push(left);
    queue.push(right);

    if (running <= spec.abs_tol) {
      running = total_error();
    }
  }

  std::vector<Panel> all;
  all.reserve(queue.size());
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : all) {
    result.value += p.value();
    result.error_estimate += p.error;
  }
  return result;
}

} // namespace bregsel
