#pragma once

#include "rbd/analysis.hpp"
#include "rbd/analytic.hpp"
#include "rbd/dsl.hpp"
#include "rbd/model.hpp"
#include "rbd/montecarlo.hpp"
