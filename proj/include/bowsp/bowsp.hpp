#pragma once

#include "apps.hpp"
#include "epsfront.hpp"
#include "error.hpp"
#include "gen.hpp"
#include "instance_io.hpp"
#include "matching.hpp"
#include "mipbridge.hpp"
#include "pareto.hpp"
#include "pbb.hpp"
#include "resdec.hpp"
#include "schema.hpp"
#include "step_set.hpp"
