#pragma once

/// @file
/// @brief Umbrella header.

#include "errors.hpp"
#include "interp_matrix.hpp"
#include "interp_quat.hpp"
#include "liegroup.hpp"
#include "minaccel/assemble.hpp"
#include "minaccel/lm.hpp"
#include "minaccel/problem.hpp"
#include "minaccel/quadrature.hpp"
#include "minaccel/solve.hpp"
#include "partition.hpp"
#include "polar.hpp"
#include "quaternion.hpp"
#include "types.hpp"
