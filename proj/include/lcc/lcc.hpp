#pragma once

// Umbrella header.

#include "lcc/error.hpp"
#include "lcc/numeric.hpp"
#include "lcc/core.hpp"
#include "lcc/wiring.hpp"
#include "lcc/cost.hpp"
#include "lcc/evaluation.hpp"
#include "lcc/csd.hpp"
#include "lcc/decompose.hpp"
#include "lcc/random.hpp"
#include "lcc/serialize.hpp"
#include "lcc/sweep.hpp"
