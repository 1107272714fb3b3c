#pragma once

#include "topokit/assignment.hpp"
#include "topokit/distance.hpp"
#include "topokit/errors.hpp"
#include "topokit/experiments.hpp"
#include "topokit/filtration.hpp"
#include "topokit/ingest.hpp"
#include "topokit/io.hpp"
#include "topokit/persistence.hpp"
#include "topokit/pointcloud.hpp"
#include "topokit/rng.hpp"
#include "topokit/svg.hpp"
#include "topokit/topo_opt.hpp"
