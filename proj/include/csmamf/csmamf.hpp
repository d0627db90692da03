#pragma once

// Umbrella header: mean-field analysis and exact simulation of unsaturated
// random-access (CSMA) networks with class-level interference graphs.

#include "csmamf/commands.hpp"
#include "csmamf/config.hpp"
#include "csmamf/errors.hpp"
#include "csmamf/graph.hpp"
#include "csmamf/meanfield.hpp"
#include "csmamf/metrics.hpp"
#include "csmamf/params.hpp"
#include "csmamf/population.hpp"
#include "csmamf/rng.hpp"
#include "csmamf/simulator.hpp"
#include "csmamf/stationary.hpp"
