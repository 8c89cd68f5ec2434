#pragma once

// Umbrella header for the OOFSK multichannel error-performance library.

#include "oofsk/analytic.hpp"
#include "oofsk/channel.hpp"
#include "oofsk/detector.hpp"
#include "oofsk/manifest.hpp"
#include "oofsk/quadrature.hpp"
#include "oofsk/rng.hpp"
#include "oofsk/specfun.hpp"
#include "oofsk/sweep.hpp"
#include "oofsk/types.hpp"
