#ifndef KAWAHARA_KAWAHARA_HPP
#define KAWAHARA_KAWAHARA_HPP

#include "kawahara/banded.hpp"
#include "kawahara/control.hpp"
#include "kawahara/errors.hpp"
#include "kawahara/grid.hpp"
#include "kawahara/io.hpp"
#include "kawahara/manufactured.hpp"
#include "kawahara/observables.hpp"
#include "kawahara/property_suite.hpp"
#include "kawahara/quadrature.hpp"
#include "kawahara/scenario.hpp"
#include "kawahara/solver.hpp"
#include "kawahara/test_function.hpp"

#endif
