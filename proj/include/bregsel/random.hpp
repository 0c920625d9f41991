#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bregsel {

//! Mixes a master seed with a list of keys into an independent stream seed.
//! Same inputs always produce the same seed on every platform.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

//! Portable random stream: the engine is std::mt19937_64 and the variate
//! transforms are implemented here so draws are bit-identical across
//! standard libraries.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  std::uint64_t next_u64() { return engine_(); }

  //! Uniform on the open interval (0, 1).
  double uniform();

  //! Standard normal (Box-Muller, pairs cached).
  double normal();

  //! Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  //! Seed for a child stream; consumes one draw.
  std::uint64_t split() { return derive_seed(next_u64(), {}); }

private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

} // namespace bregsel
