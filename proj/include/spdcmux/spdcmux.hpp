#pragma once

#include "spdcmux/config.hpp"
#include "spdcmux/csv.hpp"
#include "spdcmux/emission.hpp"
#include "spdcmux/errors.hpp"
#include "spdcmux/oracle.hpp"
#include "spdcmux/rng.hpp"
#include "spdcmux/scheduler.hpp"
#include "spdcmux/simulator.hpp"
#include "spdcmux/sweep.hpp"
#include "spdcmux/topology.hpp"
