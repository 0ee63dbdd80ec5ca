#pragma once

#include "community.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "mix.hpp"
#include "nk_model.hpp"
#include "sweep.hpp"
#include "trait_stats.hpp"
