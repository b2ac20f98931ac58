#pragma once

#include "symtyler/error.hpp"
#include "symtyler/linalg.hpp"
#include "symtyler/matgroup.hpp"
#include "symtyler/structure.hpp"
#include "symtyler/sampling.hpp"
#include "symtyler/estimation.hpp"
#include "symtyler/analysis.hpp"
#include "symtyler/serialization.hpp"
