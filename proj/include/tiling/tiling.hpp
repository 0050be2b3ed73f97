#pragma once

// Umbrella header for the tiling library.

#include "tiling/vec.hpp"
#include "tiling/errors.hpp"
#include "tiling/manifold.hpp"
#include "tiling/mesh.hpp"
#include "tiling/geometry.hpp"
#include "tiling/metrics.hpp"
#include "tiling/generators.hpp"
#include "tiling/deregularize.hpp"
#include "tiling/monohedral.hpp"
#include "tiling/io.hpp"
