// Umbrella header.
#pragma once

#include "nfp/analysis.hpp"
#include "nfp/config.hpp"
#include "nfp/csv_io.hpp"
#include "nfp/equilibrium.hpp"
#include "nfp/functionals.hpp"
#include "nfp/grid.hpp"
#include "nfp/inequalities.hpp"
#include "nfp/problem.hpp"
#include "nfp/solver.hpp"
