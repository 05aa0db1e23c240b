#pragma once

#include "bscusum/rng.hpp"

namespace bscusum {

/// A source of i.i.d. draws from an in-control distribution. Implementations
/// are immutable; all randomness comes from the caller's generator, so one
/// sampler can be shared by many threads.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual double draw(Rng& rng) const = 0;
};

}  // namespace bscusum
