#pragma once

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/spd.hpp"
#include "karcher/objective.hpp"
#include "karcher/solvers.hpp"
#include "karcher/oracle.hpp"
#include "karcher/bench.hpp"
#include "karcher/io.hpp"
#include "karcher/check.hpp"
