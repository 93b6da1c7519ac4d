#pragma once

#include "tandem/config.hpp"
#include "tandem/controller.hpp"
#include "tandem/errors.hpp"
#include "tandem/image.hpp"
#include "tandem/metrics.hpp"
#include "tandem/ncc.hpp"
#include "tandem/pose2.hpp"
#include "tandem/route.hpp"
#include "tandem/sim.hpp"
#include "tandem/trials.hpp"
