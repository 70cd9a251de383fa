#pragma once

#include "hyperflock/conditions.hpp"
#include "hyperflock/config.hpp"
#include "hyperflock/errors.hpp"
#include "hyperflock/experiments.hpp"
#include "hyperflock/flow.hpp"
#include "hyperflock/graph.hpp"
#include "hyperflock/io.hpp"
#include "hyperflock/sampling.hpp"
#include "hyperflock/stability.hpp"
#include "hyperflock/surface.hpp"
