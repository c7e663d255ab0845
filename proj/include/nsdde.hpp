#pragma once

#include "nsdde/core.hpp"
#include "nsdde/rng.hpp"
#include "nsdde/marks.hpp"
#include "nsdde/model.hpp"
#include "nsdde/truncation.hpp"
#include "nsdde/noise.hpp"
#include "nsdde/scheme.hpp"
#include "nsdde/jump_scheme.hpp"
#include "nsdde/audit.hpp"
#include "nsdde/experiment.hpp"
#include "nsdde/csv.hpp"
