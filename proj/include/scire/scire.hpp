#pragma once

#include "scire/errors.hpp"
#include "scire/models.hpp"
#include "scire/oracle.hpp"
#include "scire/random.hpp"
#include "scire/rde.hpp"
#include "scire/schedule.hpp"
#include "scire/solver.hpp"
#include "scire/trajectory.hpp"
#include "scire/vector.hpp"
