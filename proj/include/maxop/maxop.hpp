#pragma once
// Umbrella header: the whole library in one include.

#include "extreal.hpp"
#include "rng.hpp"
#include "parallel.hpp"
#include "grid.hpp"
#include "basis.hpp"
#include "means.hpp"
#include "operators.hpp"
#include "weights.hpp"
#include "twoweight.hpp"
#include "gallery.hpp"
#include "experiments.hpp"
