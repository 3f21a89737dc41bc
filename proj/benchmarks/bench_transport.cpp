#include <benchmark/benchmark.h>

#include "ocflow/transport.hpp"
