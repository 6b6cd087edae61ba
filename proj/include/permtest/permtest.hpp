#pragma once

#include "permtest/diagnostics.hpp"
#include "permtest/distributions.hpp"
#include "permtest/errors.hpp"
#include "permtest/gof.hpp"
#include "permtest/harness.hpp"
#include "permtest/metrics.hpp"
#include "permtest/model.hpp"
#include "permtest/partition.hpp"
#include "permtest/polynomials.hpp"
#include "permtest/report_json.hpp"
#include "permtest/rng.hpp"
#include "permtest/thresholds.hpp"
