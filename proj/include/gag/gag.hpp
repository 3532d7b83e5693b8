#pragma once

// Umbrella header for the streaming session-based recommender:
// session graphs, the global-attributed graph model with exact gradients,
// the distance-weighted reservoir, and the prequential evaluation harness.

#include "gag/adam.hpp"
#include "gag/backward.hpp"
#include "gag/baselines.hpp"
#include "gag/checkpoint.hpp"
#include "gag/distance.hpp"
#include "gag/error.hpp"
#include "gag/forward.hpp"
#include "gag/ingest.hpp"
#include "gag/mat.hpp"
#include "gag/metrics.hpp"
#include "gag/model.hpp"
#include "gag/report.hpp"
#include "gag/reservoir.hpp"
#include "gag/rng.hpp"
#include "gag/session.hpp"
#include "gag/session_graph.hpp"
#include "gag/split.hpp"
#include "gag/stream.hpp"
#include "gag/synth.hpp"
#include "gag/trainer.hpp"
#include "gag/update_set.hpp"
