#include "bregsel/sample.hpp"

#include "bregsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bregsel {

Sample::Sample(std::vector<double> values, std::string label)
  : values_(std::move(values))
  , label_(std::move(label))
{
  if (values_.size() < 2) {
    throw SizeError("sample needs at least 2 observations, got " +
                    std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("sample value at index " + std::to_string(i) +
                        " is not finite");
    }
  }
}

double
Sample::mean() const
{
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

double
Sample::variance() const
{
  const double m = mean();
  double ss = 0.0;
  for (double v : values_) {
    ss += (v - m) * (v - m);
  }
  return ss / static_cast<double>(values_.size());
}

double
Sample::sd() const
{
  const double n = static_cast<double>(values_.size());
  return std::sqrt(variance() * n / (n - 1.0));
}

double
Sample::min() const
{
  return *std::min_element(values_.begin(), values_.end());
}

double
Sample::max() const
{
  return *std::max_element(values_.begin(), values_.end());
}

bool
Sample::all_positive() const
{
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

Sample
Sample::prefix(std::size_t k) const
{
  k = std::min(k, values_.size());
  return Sample(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(k)),
                label_);
}

} // namespace bregsel
