#pragma once

#include "mmreid/core.hpp"
#include "mmreid/mbsos.hpp"

namespace mmreid::reference {

// Serial, deliberately naive counterparts of the OpenMP kernels. They share
// no code with the parallel versions; tests and the benchmark compare the
// two implementations for bit equality.

DistanceMap pairwise_distances_naive(const EmbeddingSet& rows, const EmbeddingSet& cols);

// Plain i/j/t triple loop with strict-less updates, t ascending.
OptimizedDistanceMap bridge_optimize_naive(const DistanceMap& qg, const DistanceMap& gg);

}  // namespace mmreid::reference
