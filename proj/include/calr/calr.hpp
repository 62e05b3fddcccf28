#pragma once

#include "calr/errors.hpp"
#include "calr/transform_value.hpp"
#include "calr/quadrature.hpp"
#include "calr/roots.hpp"
#include "calr/slab.hpp"
#include "calr/source.hpp"
#include "calr/grid_io.hpp"
#include "calr/potential.hpp"
#include "calr/dissipation.hpp"
#include "calr/bounds.hpp"
#include "calr/run_config.hpp"
#include "calr/sweep.hpp"
#include "calr/verify.hpp"
