#pragma once

// Umbrella header.

#include "locplex/complexity.hpp"
#include "locplex/economics.hpp"
#include "locplex/harness.hpp"
#include "locplex/io.hpp"
#include "locplex/restructuring.hpp"
#include "locplex/solvers.hpp"
#include "locplex/types.hpp"
