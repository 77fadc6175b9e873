// Umbrella header: the whole library.
#pragma once

#include "dcmndp/bench.hpp"
#include "dcmndp/instance.hpp"
#include "dcmndp/oracle.hpp"
#include "dcmndp/shortest_paths.hpp"
#include "dcmndp/solver.hpp"
#include "dcmndp/subproblems.hpp"
