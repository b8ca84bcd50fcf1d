#pragma once

#include "rmtlab/beta_clt.hpp"
#include "rmtlab/beta_samplers.hpp"
#include "rmtlab/complex_branch.hpp"
#include "rmtlab/config.hpp"
#include "rmtlab/dbm.hpp"
#include "rmtlab/eigensolver.hpp"
#include "rmtlab/ensemble.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/experiments.hpp"
#include "rmtlab/logfield.hpp"
#include "rmtlab/measure.hpp"
#include "rmtlab/observables.hpp"
#include "rmtlab/potential.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/semicircle.hpp"
#include "rmtlab/spectrum.hpp"
