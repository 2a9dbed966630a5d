#pragma once

#include "polyflow/core.hpp"
#include "polyflow/demos.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/flow_tracer.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/geometry.hpp"
#include "polyflow/json_io.hpp"
#include "polyflow/lambda_series.hpp"
#include "polyflow/ode.hpp"
#include "polyflow/power_series.hpp"
#include "polyflow/verify.hpp"
#include "polyflow/yamabe.hpp"
