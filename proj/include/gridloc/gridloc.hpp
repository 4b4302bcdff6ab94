#pragma once

#include "gridloc/conv_odometry.hpp"
#include "gridloc/errors.hpp"
#include "gridloc/evaluation.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/heatmap.hpp"
#include "gridloc/io.hpp"
#include "gridloc/likelihood_volume.hpp"
#include "gridloc/motion_model.hpp"
#include "gridloc/parallel.hpp"
#include "gridloc/pose.hpp"
#include "gridloc/run_config.hpp"
#include "gridloc/sensor_model.hpp"
#include "gridloc/simulator.hpp"
