#pragma once

#include "mesoc/lcp.hpp"

#include <cstdint>

namespace mesoc {

/// An LCP with a known solution: r := s* - T z* for a sampled pair
/// (z*, s*) in C(L) of the generic case (u* != 0, v* = -lambda u*).
struct PlantedInstance {
  LcpInstance instance;
  ConePoint z_star;
  ConePoint s_star;
  double lambda = 0.0;
};

/// T has a positive definite symmetric part, so the planted solution is the
/// unique one. Deterministic in (dims, seed).
PlantedInstance generate_planted(const ConeDims& dims, std::uint64_t seed);

}  // namespace mesoc
