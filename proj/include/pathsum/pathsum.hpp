#pragma once

// Exact marginals of Gaussian Markov random fields: covariance entries as
// finite signed sums over the simple paths and simple cycles of the model
// graph, for scalar and block-partitioned information matrices of arbitrary
// topology, with message-passing and determinant-based evaluators for
// cross-checking.

#include "pathsum/cli.hpp"
#include "pathsum/engine.hpp"
#include "pathsum/enumerate.hpp"
#include "pathsum/errors.hpp"
#include "pathsum/gabp.hpp"
#include "pathsum/graph.hpp"
#include "pathsum/mmio.hpp"
#include "pathsum/model.hpp"
#include "pathsum/subset.hpp"
#include "pathsum/validation.hpp"
