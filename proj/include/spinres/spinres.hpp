#pragma once

#include "spinres/backends.hpp"
#include "spinres/bench.hpp"
#include "spinres/config.hpp"
#include "spinres/errors.hpp"
#include "spinres/integrator.hpp"
#include "spinres/io.hpp"
#include "spinres/model.hpp"
#include "spinres/params.hpp"
#include "spinres/rng.hpp"
#include "spinres/state.hpp"
#include "spinres/topology.hpp"
