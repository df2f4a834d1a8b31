#pragma once

#include "hexkerr/config.hpp"
#include "hexkerr/csv.hpp"
#include "hexkerr/dynamics.hpp"
#include "hexkerr/error.hpp"
#include "hexkerr/experiments.hpp"
#include "hexkerr/fluctuations.hpp"
#include "hexkerr/fock.hpp"
#include "hexkerr/model.hpp"
#include "hexkerr/spectra.hpp"
#include "hexkerr/steady_state.hpp"
