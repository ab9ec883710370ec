#pragma once

// Umbrella header for the single-track state-prediction toolkit.

#include "singletrack/angles.hpp"
#include "singletrack/config.hpp"
#include "singletrack/csv.hpp"
#include "singletrack/ekf.hpp"
#include "singletrack/errors.hpp"
#include "singletrack/metrics.hpp"
#include "singletrack/models.hpp"
#include "singletrack/param_id.hpp"
#include "singletrack/runner.hpp"
#include "singletrack/sim.hpp"
#include "singletrack/types.hpp"
