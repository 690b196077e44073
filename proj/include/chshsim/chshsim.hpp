#pragma once

#include "chshsim/baselines.hpp"
#include "chshsim/experimenter.hpp"
#include "chshsim/harness.hpp"
#include "chshsim/lookup_table.hpp"
#include "chshsim/machines.hpp"
#include "chshsim/reporting.hpp"
#include "chshsim/rng.hpp"
