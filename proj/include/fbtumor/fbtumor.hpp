#pragma once

// Umbrella header: the whole solver stack in one include.

#include "fbtumor/errors.hpp"
#include "fbtumor/rate_function.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/numerics.hpp"
#include "fbtumor/ode.hpp"
#include "fbtumor/profile.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/stationary.hpp"
#include "fbtumor/evolution.hpp"
#include "fbtumor/io.hpp"
#include "fbtumor/cli.hpp"
