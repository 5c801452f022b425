#pragma once

#include "heatreach/geometry.hpp"
#include "heatreach/io.hpp"
#include "heatreach/layer_potentials.hpp"
#include "heatreach/onedim_controls.hpp"
#include "heatreach/parallel.hpp"
#include "heatreach/quadrature.hpp"
#include "heatreach/reference_solver.hpp"
#include "heatreach/special_functions.hpp"
#include "heatreach/types.hpp"
#include "heatreach/verification.hpp"
#include "heatreach/wick_synthesis.hpp"
