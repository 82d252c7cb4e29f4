#pragma once

// Umbrella header.

#include "shc/cluster_index.hpp"
#include "shc/data.hpp"
#include "shc/engine.hpp"
#include "shc/error.hpp"
#include "shc/expression.hpp"
#include "shc/hclust.hpp"
#include "shc/matrix_io.hpp"
#include "shc/null_model.hpp"
#include "shc/parallel.hpp"
#include "shc/report_io.hpp"
#include "shc/rng.hpp"
#include "shc/sim.hpp"
