// Apache License, Version 2.0, refer to LICENSE.txt

// Greedy exact-ICL co-clustering of bipartite networks with Bernoulli,
// categorical, Poisson or Gaussian ties.

#pragma once

#include "adjacency.hpp"
#include "block_models.hpp"
#include "cell_access.hpp"
#include "config.hpp"
#include "greedy.hpp"
#include "heatmap.hpp"
#include "icl.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "partition.hpp"
#include "report.hpp"
#include "simulation.hpp"
#include "study.hpp"
