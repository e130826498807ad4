#pragma once

#include "mixsem/data.hpp"
#include "mixsem/dimension.hpp"
#include "mixsem/error.hpp"
#include "mixsem/graph.hpp"
#include "mixsem/likelihood.hpp"
#include "mixsem/model.hpp"
#include "mixsem/parallel.hpp"
#include "mixsem/random.hpp"
#include "mixsem/search.hpp"

#define MIXSEM_VERSION "0.1.0"
