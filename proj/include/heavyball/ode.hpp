#pragma once

#include "heavyball/ode/config.hpp"
#include "heavyball/ode/dormand_prince.hpp"
#include "heavyball/ode/events.hpp"
#include "heavyball/ode/quadrature.hpp"
#include "heavyball/ode/trajectory.hpp"
#include "heavyball/ode/types.hpp"
