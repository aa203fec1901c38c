#pragma once

#include "normlab/concentration.hpp"
#include "normlab/distortion.hpp"
#include "normlab/error.hpp"
#include "normlab/harness.hpp"
#include "normlab/io.hpp"
#include "normlab/nets.hpp"
#include "normlab/parallel.hpp"
#include "normlab/rng.hpp"
#include "normlab/scalar.hpp"
#include "normlab/signs.hpp"
#include "normlab/spaces.hpp"
#include "normlab/stats.hpp"
#include "normlab/symmetrize.hpp"
#include "normlab/weakvar.hpp"
