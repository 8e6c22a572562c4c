#ifndef FUSEOPT_FUSEOPT_HPP
#define FUSEOPT_FUSEOPT_HPP

// Umbrella header: the whole library.

#include "fuseopt/adam.hpp"
#include "fuseopt/dataset.hpp"
#include "fuseopt/errors.hpp"
#include "fuseopt/fuse.hpp"
#include "fuseopt/gradient_check.hpp"
#include "fuseopt/harness.hpp"
#include "fuseopt/lbfgs.hpp"
#include "fuseopt/logistic.hpp"
#include "fuseopt/objective.hpp"
#include "fuseopt/point.hpp"
#include "fuseopt/rng.hpp"
#include "fuseopt/sgd.hpp"
#include "fuseopt/test_functions.hpp"
#include "fuseopt/trace.hpp"

#endif  // FUSEOPT_FUSEOPT_HPP
