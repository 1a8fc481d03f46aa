#pragma once

// Umbrella header.

#include "applications.hpp"
#include "bench.hpp"
#include "boundary.hpp"
#include "bv_levy.hpp"
#include "first_passage.hpp"
#include "logconcave.hpp"
#include "marginals.hpp"
#include "params.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "rootfind.hpp"
#include "undershoot.hpp"
#include "validation.hpp"
#include "variates.hpp"
#include "zolotarev.hpp"
