#pragma once

// Umbrella header: chains and grading functions, the relative-divergence
// functional, the maximum-relative-divergence solvers, and the
// conditional-probability construction built on top of them.

#include "mrd/chain.hpp"
#include "mrd/conditional_probability.hpp"
#include "mrd/divergence.hpp"
#include "mrd/errors.hpp"
#include "mrd/solver.hpp"
