#pragma once

#include "epecs/commitment.hpp"
#include "epecs/engine.hpp"
#include "epecs/error.hpp"
#include "epecs/forecast.hpp"
#include "epecs/grid.hpp"
#include "epecs/lp.hpp"
#include "epecs/metrics.hpp"
#include "epecs/milp.hpp"
#include "epecs/mini.hpp"
#include "epecs/piecewise.hpp"
#include "epecs/profile.hpp"
#include "epecs/rtuc.hpp"
#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"
#include "epecs/scuc.hpp"
#include "epecs/sced.hpp"
