#pragma once

#include "conservafuse/admissible.hpp"
#include "conservafuse/audit.hpp"
#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/fusion.hpp"
#include "conservafuse/json_io.hpp"
#include "conservafuse/minimal_volume.hpp"
#include "conservafuse/optimizer.hpp"
#include "conservafuse/sci_curve.hpp"
#include "conservafuse/spd.hpp"
#include "conservafuse/tolerances.hpp"
