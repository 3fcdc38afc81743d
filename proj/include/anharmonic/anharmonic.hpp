#pragma once

// Umbrella header: the full branch/spectrum pipeline, the perturbation
// laboratory, and the CLI plumbing.

#include "anharmonic/units.hpp"
#include "anharmonic/spec.hpp"
#include "anharmonic/energy.hpp"
#include "anharmonic/stationarity.hpp"
#include "anharmonic/oracle.hpp"
#include "anharmonic/spectrum.hpp"
#include "anharmonic/sensitivity.hpp"
#include "anharmonic/sweep.hpp"
#include "anharmonic/config.hpp"
#include "anharmonic/serialize.hpp"
#include "anharmonic/cli.hpp"
