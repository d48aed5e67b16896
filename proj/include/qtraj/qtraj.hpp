#pragma once

// Umbrella header for the qtraj library: geometric phases of discrete
// quantum trajectories (Pancharatnam phases of pure trajectories, Uhlmann
// holonomies of mixed ones), Kraus channel algebra, trajectory enumeration
// and sampling, interferometric phase estimation and trajectory-averaged
// phases.

#include "qtraj/channels.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/interferometry.hpp"
#include "qtraj/operators.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/phases.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/scenario.hpp"
#include "qtraj/tolerances.hpp"
#include "qtraj/trajectories.hpp"
#include "qtraj/version.hpp"
