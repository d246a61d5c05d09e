#pragma once
#include <cstdint>

#include "hierform/errors.hpp"

namespace hierform {

struct SamplerConfig {
  int chains = 4;
  int iter = 2000;
  int warmup = 1000;
  double adapt_delta = 0.8;
  int max_treedepth = 10;
  int thin = 1;
  std::uint64_t seed = 0;
  int cores = 1;
  double init_range = 2.0;  // inits uniform(-r, r) on the unconstrained scale

  void check() const {
    if (chains < 1) throw ValidationError("chains must be >= 1");
    if (warmup < 0 || iter <= warmup)
      throw ValidationError("iter must exceed warmup (warmup < iter)");
    if (!(adapt_delta > 0.0 && adapt_delta < 1.0))
      throw ValidationError("adapt_delta must be in (0, 1)");
    if (max_treedepth < 1) throw ValidationError("max_treedepth must be >= 1");
    if (thin < 1) throw ValidationError("thin must be >= 1");
    if (cores < 1) throw ValidationError("cores must be >= 1");
    if (!(init_range > 0.0)) throw ValidationError("init range must be positive");
  }
};

}  // namespace hierform
