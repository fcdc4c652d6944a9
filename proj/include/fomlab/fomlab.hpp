#pragma once

#include "fomlab/bounds.hpp"
#include "fomlab/config.hpp"
#include "fomlab/core.hpp"
#include "fomlab/derivatives.hpp"
#include "fomlab/expansions.hpp"
#include "fomlab/fisher.hpp"
#include "fomlab/info.hpp"
#include "fomlab/matrix.hpp"
#include "fomlab/model.hpp"
#include "fomlab/monte_carlo.hpp"
#include "fomlab/observer.hpp"
#include "fomlab/prior.hpp"
#include "fomlab/quadrature.hpp"
#include "fomlab/report.hpp"
#include "fomlab/rng.hpp"
#include "fomlab/runner.hpp"
#include "fomlab/special.hpp"
