#pragma once

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/model.hpp"
#include "stitchsmc/core/parallel.hpp"
#include "stitchsmc/core/particle_filter.hpp"
#include "stitchsmc/core/resample.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"
#include "stitchsmc/eval/bench.hpp"
#include "stitchsmc/eval/metrics.hpp"
#include "stitchsmc/mapmatch/model.hpp"
#include "stitchsmc/mapmatch/params.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"
#include "stitchsmc/mapmatch/runner.hpp"
#include "stitchsmc/mapmatch/synth.hpp"
#include "stitchsmc/mapmatch/trace.hpp"
#include "stitchsmc/mapmatch/trajectory_io.hpp"
#include "stitchsmc/mapmatch/viterbi.hpp"
#include "stitchsmc/road/geometry.hpp"
#include "stitchsmc/road/network.hpp"
#include "stitchsmc/road/routes.hpp"
#include "stitchsmc/stitch/backward_sim.hpp"
#include "stitchsmc/stitch/smoothers.hpp"
#include "stitchsmc/stitch/stitching.hpp"
