#include <benchmark/benchmark.h>

#include "ocflow/stokes.hpp"
