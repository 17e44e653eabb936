#pragma once

// Umbrella header: Monte Carlo estimation of active subspaces from
// gradient samples, bootstrap variability, theoretical sample-count
// bounds, and the desk-scale benchmark problems.

#include "actsub/bench.hpp"
#include "actsub/bootstrap.hpp"
#include "actsub/bounds.hpp"
#include "actsub/elliptic.hpp"
#include "actsub/estimator.hpp"
#include "actsub/io.hpp"
#include "actsub/linalg.hpp"
#include "actsub/model_factory.hpp"
#include "actsub/models.hpp"
#include "actsub/parallel.hpp"
#include "actsub/rng.hpp"
#include "actsub/sampling.hpp"
