#pragma once

#include <vector>

#include "twistlab/config.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

// runs one scenario (certify, reconstruction, periodic_mismatch,
// holonomy_rate, holonomy_rate_torus, margin_sweep, closing_shadowing);
// deterministic for a fixed config+seed
Report run(const ExperimentConfig& cfg);

// runs every entry of a suite config in order; entries without a seed
// inherit the suite's
std::vector<Report> run_suite(const ExperimentConfig& cfg);

}  // namespace twistlab
