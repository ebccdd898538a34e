#pragma once

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/attack.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/sweep.hpp"
#include "cvqkd/config.hpp"
#include "cvqkd/figures.hpp"
