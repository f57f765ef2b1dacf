#pragma once

// Umbrella header for the whole library.

#include "qplab/acceptance.hpp"
#include "qplab/avalanche.hpp"
#include "qplab/cocycle.hpp"
#include "qplab/config.hpp"
#include "qplab/empirics.hpp"
#include "qplab/errors.hpp"
#include "qplab/harness.hpp"
#include "qplab/linalg.hpp"
#include "qplab/models.hpp"
#include "qplab/parallel.hpp"
#include "qplab/reduction.hpp"
#include "qplab/rng.hpp"
#include "qplab/torus.hpp"
#include "qplab/trig.hpp"
#include "qplab/version.hpp"
