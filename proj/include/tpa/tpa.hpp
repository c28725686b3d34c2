#pragma once

#include "bounds.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "io.hpp"
#include "models/exp_interval.hpp"
#include "models/ising.hpp"
#include "models/posterior.hpp"
#include "omnithermal.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "stats.hpp"
