#pragma once

#include "thermocap/config.hpp"
#include "thermocap/diagnostics.hpp"
#include "thermocap/elliptic.hpp"
#include "thermocap/error.hpp"
#include "thermocap/grid.hpp"
#include "thermocap/initial_data.hpp"
#include "thermocap/io.hpp"
#include "thermocap/krylov.hpp"
#include "thermocap/physics.hpp"
#include "thermocap/run.hpp"
#include "thermocap/scheme.hpp"
