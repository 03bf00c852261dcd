#pragma once

#include "pandora/approx.hpp"
#include "pandora/builtin.hpp"
#include "pandora/distribution.hpp"
#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/instance_io.hpp"
#include "pandora/learning.hpp"
#include "pandora/line_solver.hpp"
#include "pandora/oracle.hpp"
#include "pandora/piecewise_linear.hpp"
#include "pandora/rational.hpp"
#include "pandora/rng.hpp"
#include "pandora/strategy.hpp"
#include "pandora/tree_solver.hpp"
