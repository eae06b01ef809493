#pragma once

// Umbrella header: equivalent stochastic representations of the same jump or
// diffusion process, plus the cross-representation comparison machinery.

#include "stoclab/common.hpp"
#include "stoclab/compare.hpp"
#include "stoclab/config.hpp"
#include "stoclab/csv.hpp"
#include "stoclab/dyson.hpp"
#include "stoclab/fock.hpp"
#include "stoclab/fpe.hpp"
#include "stoclab/langevin.hpp"
#include "stoclab/master.hpp"
#include "stoclab/moments.hpp"
#include "stoclab/parallel.hpp"
#include "stoclab/polynomial.hpp"
#include "stoclab/rate_loop.hpp"
#include "stoclab/rng.hpp"
#include "stoclab/runner.hpp"
#include "stoclab/sde.hpp"
#include "stoclab/ssa.hpp"
#include "stoclab/time_grid.hpp"
