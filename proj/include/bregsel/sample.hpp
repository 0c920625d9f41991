#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bregsel {

//! An ordered set of real observations. Holds at least two finite values.
class Sample
{
public:
  explicit Sample(std::vector<double> values, std::string label = {});

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::string& label() const noexcept { return label_; }

  double operator[](std::size_t i) const { return values_[i]; }

  double mean() const;
  //! Variance with the 1/n divisor.
  double variance() const;
  //! Standard deviation with the 1/(n-1) divisor.
  double sd() const;
  double min() const;
  double max() const;

  bool all_positive() const;

  //! The first `k` observations, in order.
  Sample prefix(std::size_t k) const;

private:
  std::vector<double> values_;
  std::string label_;
};

} // namespace bregsel
