// Umbrella header.

#pragma once

#include "trifocal/calibration.hpp"
#include "trifocal/canonical.hpp"
#include "trifocal/constraints.hpp"
#include "trifocal/linalg.hpp"
#include "trifocal/random.hpp"
#include "trifocal/scene.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/trifocal_essential.hpp"
#include "trifocal/two_view.hpp"
#include "trifocal/types.hpp"
