#pragma once

#include "tmscat/block_operator.hpp"
#include "tmscat/errors.hpp"
#include "tmscat/evolution.hpp"
#include "tmscat/grid.hpp"
#include "tmscat/hamiltonian.hpp"
#include "tmscat/oracle.hpp"
#include "tmscat/potential.hpp"
#include "tmscat/scattering.hpp"
#include "tmscat/symmetry.hpp"
#include "tmscat/version.hpp"
