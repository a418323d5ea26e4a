#pragma once

#include "puzznic/bench.hpp"
#include "puzznic/encoder.hpp"
#include "puzznic/engine.hpp"
#include "puzznic/error.hpp"
#include "puzznic/grid.hpp"
#include "puzznic/level_io.hpp"
#include "puzznic/pddl.hpp"
#include "puzznic/planner.hpp"
#include "puzznic/sat/dimacs.hpp"
#include "puzznic/sat/solver.hpp"
#include "puzznic/sat_planner.hpp"
