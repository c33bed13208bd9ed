#pragma once

// Cantor-Kantorovich distances between labeled Markov chains: finite-horizon
// trace distributions, TV and Kantorovich kernels, certified truncated sums,
// continuity-bound calculators, approximate-bisimulation checking and the
// product-distribution encoder used as an end-to-end oracle.

#include "ckdist/errors.hpp"
#include "ckdist/lmc.hpp"
#include "ckdist/trace.hpp"
#include "ckdist/distances.hpp"
#include "ckdist/transport.hpp"
#include "ckdist/bounds.hpp"
#include "ckdist/bisim.hpp"
#include "ckdist/product.hpp"
