#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlab/cocycle.hpp"

namespace twistlab {

using Json = nlohmann::ordered_json;

// Declarative experiment description. Parsing merges the scenario's canonical
// defaults under the user's keys, validates the result, and keeps the merged
// tree as `echo` so a report's config block reruns identically.
struct ExperimentConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  int dim = 2;
  double nu = 1.0;
  double tol = 1e-10;
  Json base;          // system spec
  Json twist;         // automorphism spec
  Json generator;     // generator spec for A
  Json conjugator;    // optional Q spec (reconstruction)
  Json perturbation;  // optional (periodic_mismatch)
  Json sweep;         // optional (margin_sweep)
  Json torus;         // optional second base (closing_shadowing)
  Json n_max;         // named depth knobs, integers
  Json samples;       // named sample-size knobs, integers
  std::vector<Json> sub;  // suite entries
  Json echo;

  int depth(const std::string& name, int fallback) const;
  int count(const std::string& name, int fallback) const;

  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig from_file(const std::string& path);
};

// canonical desk-scale config; known names: certify, reconstruction,
// periodic_mismatch, holonomy_rate, holonomy_rate_torus, margin_sweep,
// closing_shadowing, suite
Json default_config(const std::string& scenario);

System build_system(const Json& spec);
Automorphism build_twist(const Json& spec, int dim);
Generator build_generator(const Json& spec, const System& sys, int dim, double nu, Rng& rng);

}  // namespace twistlab
