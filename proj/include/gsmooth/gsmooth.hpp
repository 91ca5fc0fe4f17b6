#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/penalty.hpp"
#include "gsmooth/neighborhood.hpp"
#include "gsmooth/weights.hpp"
#include "gsmooth/system.hpp"
#include "gsmooth/linsolve.hpp"
#include "gsmooth/solver.hpp"
#include "gsmooth/metrics.hpp"
#include "gsmooth/apps.hpp"
#include "gsmooth/io.hpp"
#include "gsmooth/bench.hpp"
