#pragma once

#include "stablelike/core.hpp"
#include "stablelike/csv.hpp"
#include "stablelike/fractal.hpp"
#include "stablelike/harness.hpp"
#include "stablelike/jumps.hpp"
#include "stablelike/quadrature.hpp"
#include "stablelike/rng.hpp"
#include "stablelike/sde.hpp"
#include "stablelike/stats.hpp"
#include "stablelike/symbol.hpp"
