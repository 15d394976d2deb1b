#pragma once

// Umbrella header for the projection-consensus linear solver library.

#include "projcons/analysis.hpp"
#include "projcons/async_engine.hpp"
#include "projcons/block_matrix.hpp"
#include "projcons/errors.hpp"
#include "projcons/experiment.hpp"
#include "projcons/graph.hpp"
#include "projcons/linalg.hpp"
#include "projcons/lsq.hpp"
#include "projcons/problem.hpp"
#include "projcons/rng.hpp"
#include "projcons/schedule.hpp"
#include "projcons/sync_engine.hpp"
#include "projcons/trace.hpp"
#include "projcons/tracking.hpp"
