#pragma once

#include "aether3d/error.hpp"
#include "aether3d/geometry.hpp"
#include "aether3d/parallel.hpp"
#include "aether3d/lattice.hpp"
#include "aether3d/spectrum.hpp"
#include "aether3d/channel.hpp"
#include "aether3d/grid.hpp"
#include "aether3d/density.hpp"
#include "aether3d/association.hpp"
#include "aether3d/io.hpp"
#include "aether3d/scenario.hpp"
#include "aether3d/experiment.hpp"
#include "aether3d/oracle.hpp"
