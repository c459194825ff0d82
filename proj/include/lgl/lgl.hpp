#pragma once

// Umbrella header.

#include "lgl/analysis.hpp"
#include "lgl/error.hpp"
#include "lgl/experiment.hpp"
#include "lgl/graph.hpp"
#include "lgl/io.hpp"
#include "lgl/lifting.hpp"
#include "lgl/random.hpp"
#include "lgl/shrinkage.hpp"
#include "lgl/simulation.hpp"
