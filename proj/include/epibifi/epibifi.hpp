#pragma once

#include "bifi.hpp"
#include "collocation.hpp"
#include "epidemic.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "relaxation_stepper.hpp"
#include "scenarios.hpp"
#include "solver_diffusion.hpp"
#include "solver_hf.hpp"
#include "solver_lf.hpp"
#include "state.hpp"
#include "time_loop.hpp"
#include "transport.hpp"
#include "velocity.hpp"
