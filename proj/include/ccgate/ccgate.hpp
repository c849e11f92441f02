#pragma once

#include "ccgate/units.hpp"
#include "ccgate/levels.hpp"
#include "ccgate/quadrature.hpp"
#include "ccgate/ode.hpp"
#include "ccgate/trajectory.hpp"
#include "ccgate/lattice.hpp"
#include "ccgate/single_particle.hpp"
#include "ccgate/two_particle.hpp"
#include "ccgate/gate_fidelity.hpp"
#include "ccgate/protocols.hpp"
#include "ccgate/runner.hpp"
