#pragma once

// Umbrella header for the numerical library. The CLI plumbing lives in
// emlab/config.hpp and emlab/cli.hpp and is not pulled in here.

#include "emlab/errors.hpp"
#include "emlab/gauss_quad.hpp"
#include "emlab/kernels.hpp"
#include "emlab/geometry.hpp"
#include "emlab/rng.hpp"
#include "emlab/population_em.hpp"
#include "emlab/sample_em.hpp"
#include "emlab/landscape.hpp"
#include "emlab/harness.hpp"
