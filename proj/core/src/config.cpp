#include "twistlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "twistlab/errors.hpp"
#include "twistlab/rng.hpp"

namespace twistlab {

namespace {

void require_object(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be a JSON object");
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(ctx + ": unknown key \"" + it.key() + "\"");
}

std::string get_string(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(ctx + ": missing or non-string \"" + key + "\"");
  return j[key].get<std::string>();
}

double get_number(const Json& j, const std::string& key, const std::string& ctx, double fallback,
                  bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(ctx + ": missing \"" + key + "\"");
    return fallback;
  }
  if (!j[key].is_number()) throw ConfigError(ctx + ": \"" + key + "\" must be a number");
  return j[key].get<double>();
}

int get_int(const Json& j, const std::string& key, const std::string& ctx, int fallback,
            bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(ctx + ": missing \"" + key + "\"");
    return fallback;
  }
  if (!j[key].is_number_integer()) throw ConfigError(ctx + ": \"" + key + "\" must be an integer");
  return j[key].get<int>();
}

Matrix parse_matrix(const Json& rows, int dim, const std::string& ctx) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
    throw ConfigError(ctx + ": expected " + std::to_string(dim) + " matrix rows");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ConfigError(ctx + ": row " + std::to_string(i) + " needs " + std::to_string(dim) +
                        " entries");
    for (int k = 0; k < dim; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ConfigError(ctx + ": matrix entries must be numbers");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

Word parse_word(const std::string& s, int alphabet, const std::string& ctx) {
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9') throw ConfigError(ctx + ": words use digit symbols, got \"" + s + "\"");
    int sym = c - '0';
    if (sym >= alphabet)
      throw ConfigError(ctx + ": symbol " + std::to_string(sym) + " outside alphabet");
    w.push_back(sym);
  }
  return w;
}

Json merge_defaults(const Json& user, const Json& defaults) {
  Json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) out[it.key()] = it.value();
  return out;
}

int knob(const Json& block, const std::string& name, int fallback) {
  if (!block.is_object() || !block.contains(name)) return fallback;
  const Json& v = block[name];
  if (!v.is_number_integer()) throw ConfigError("knob \"" + name + "\" must be an integer");
  return v.get<int>();
}

}  // namespace

int ExperimentConfig::depth(const std::string& name, int fallback) const {
  return knob(n_max, name, fallback);
}

int ExperimentConfig::count(const std::string& name, int fallback) const {
  return knob(samples, name, fallback);
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  require_object(j, "config");
  std::string scenario = get_string(j, "scenario", "config");
  static const std::set<std::string> known = {
      "certify",      "reconstruction", "periodic_mismatch", "holonomy_rate",
      "holonomy_rate_torus", "margin_sweep", "closing_shadowing", "suite"};
  if (!known.count(scenario)) throw ConfigError("unknown scenario \"" + scenario + "\"");

  Json merged = merge_defaults(j, default_config(scenario));
  check_keys(merged,
             {"scenario", "seed", "dim", "nu", "tol", "base", "twist", "generator", "conjugator",
              "perturbation", "sweep", "torus", "n_max", "samples", "scenarios"},
             "config");

  ExperimentConfig cfg;
  cfg.scenario = scenario;
  if (merged.contains("seed")) {
    if (!merged["seed"].is_number_unsigned() && !merged["seed"].is_number_integer())
      throw ConfigError("config: \"seed\" must be an integer");
    cfg.seed = merged["seed"].get<std::uint64_t>();
  }
  cfg.dim = get_int(merged, "dim", "config", 2);
  if (cfg.dim < 1 || cfg.dim > 4) throw ConfigError("config: dim must lie in 1..4");
  cfg.nu = get_number(merged, "nu", "config", 1.0);
  if (cfg.nu <= 0.0 || cfg.nu > 1.0) throw ConfigError("config: nu must lie in (0, 1]");
  cfg.tol = get_number(merged, "tol", "config", 1e-10);
  if (cfg.tol <= 0.0) throw ConfigError("config: tol must be positive");

  auto grab = [&](const char* key) { return merged.contains(key) ? merged[key] : Json(); };
  cfg.base = grab("base");
  cfg.twist = grab("twist");
  cfg.generator = grab("generator");
  cfg.conjugator = grab("conjugator");
  cfg.perturbation = grab("perturbation");
  cfg.sweep = grab("sweep");
  cfg.torus = grab("torus");
  cfg.n_max = grab("n_max");
  cfg.samples = grab("samples");

  if (scenario == "suite") {
    const Json& subs = merged["scenarios"];
    if (!subs.is_array() || subs.empty())
      throw ConfigError("suite config needs a nonempty \"scenarios\" array");
    for (const Json& s : subs) {
      require_object(s, "suite entry");
      std::string name = get_string(s, "scenario", "suite entry");
      if (name == "suite") throw ConfigError("suite entries cannot nest another suite");
      cfg.sub.push_back(s);
    }
  } else {
    if (!cfg.base.is_object()) throw ConfigError("config: missing \"base\" block");
    if (!cfg.twist.is_object() && scenario != "margin_sweep")
      throw ConfigError("config: missing \"twist\" block");
    if (!cfg.generator.is_object()) throw ConfigError("config: missing \"generator\" block");
    if (scenario == "margin_sweep" && !cfg.sweep.is_object())
      throw ConfigError("margin_sweep config needs a \"sweep\" block");
  }

  cfg.echo = merged;
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

Json default_config(const std::string& scenario) {
  const double ln2 = 0.6931471805599453;
  Json j;
  j["scenario"] = scenario;
  j["seed"] = 1;
  j["dim"] = 2;
  j["nu"] = 1.0;
  j["tol"] = 1e-10;
  if (scenario == "certify") {
    j["base"] = {{"kind", "golden_mean"}, {"lambda", ln2}};
    j["twist"] = {{"kind", "rotation"}, {"angle", 0.7}};
    j["generator"] = {{"kind", "random_locally_constant"}, {"radius", 1}, {"spread", 0.08}};
    j["n_max"] = {{"theta", 24}, {"growth", 24}, {"adapted", 12}};
    j["samples"] = {{"theta_points", 6}};
  } else if (scenario == "reconstruction") {
    j["base"] = {{"kind", "golden_mean"}, {"lambda", ln2}};
    j["twist"] = {{"kind", "rotation"}, {"angle", 0.7}};
    j["generator"] = {{"kind", "random_locally_constant"}, {"radius", 1}, {"spread", 0.08}};
    j["conjugator"] = {{"kind", "random_conjugator"}, {"spread", 0.08}};
    j["n_max"] = {{"theta", 20}, {"growth", 20}, {"holonomy", 200}, {"cohomology", 8}};
    j["samples"] = {{"theta_points", 5}, {"points", 50}};
  } else if (scenario == "periodic_mismatch") {
    j["base"] = {{"kind", "golden_mean"}, {"lambda", ln2}};
    j["twist"] = {{"kind", "rotation"}, {"angle", 0.7}};
    j["generator"] = {{"kind", "random_locally_constant"}, {"radius", 1}, {"spread", 0.08}};
    j["perturbation"] = {{"factor", 1.3}};
    j["n_max"] = {{"theta", 20}, {"growth", 20}, {"holonomy", 200}, {"periodic", 8}};
    j["samples"] = {{"theta_points", 5}, {"points", 20}};
  } else if (scenario == "holonomy_rate") {
    j["base"] = {{"kind", "golden_mean"}, {"lambda", ln2}};
    j["twist"] = {{"kind", "inner_diag"}, {"s", 1.01}};
    j["generator"] =
        {{"kind", "random_symbolic_holder"}, {"radius", 24}, {"eps", 0.02}};
    j["n_max"] = {{"theta", 20}, {"growth", 20}, {"holonomy", 200}, {"profile", 60},
                  {"dyadic", 12}, {"equivariance", 5}};
    j["samples"] = {{"theta_points", 5}, {"pairs", 100}, {"triples", 100}, {"dyadic_reps", 8},
                    {"profile_pairs", 8}};
  } else if (scenario == "holonomy_rate_torus") {
    j["scenario"] = "holonomy_rate_torus";
    j["base"] = {{"kind", "cat_map"}};
    j["twist"] = {{"kind", "rotation"}, {"angle", 0.7}};
    j["generator"] = {{"kind", "random_torus_smooth"}, {"kmax", 2}, {"eps", 0.08}};
    j["n_max"] = {{"theta", 20}, {"growth", 20}, {"holonomy", 200}, {"profile", 40},
                  {"dyadic", 12}, {"equivariance", 5}};
    j["samples"] = {{"theta_points", 5}, {"pairs", 100}, {"triples", 100}, {"dyadic_reps", 8},
                    {"profile_pairs", 8}};
  } else if (scenario == "margin_sweep") {
    j["base"] = {{"kind", "golden_mean"}, {"lambda", ln2}};
    j["generator"] = {{"kind", "random_locally_constant"}, {"radius", 1}, {"spread", 0.05}};
    j["sweep"] = {{"from", 1.0}, {"to", 1.3}, {"steps", 13}};
    j["n_max"] = {{"theta", 20}, {"growth", 20}};
    j["samples"] = {{"theta_points", 5}};
  } else if (scenario == "closing_shadowing") {
    j["base"] = {{"kind", "full_shift"}, {"symbols", 2}, {"lambda", ln2}};
    j["torus"] = {{"kind", "cat_map"}};
    j["generator"] = {{"kind", "random_locally_constant"}, {"radius", 1}, {"spread", 0.08}};
    j["twist"] = {{"kind", "rotation"}, {"angle", 0.7}};
    j["n_max"] = {{"closing", 12}};
    j["samples"] = {{"closing", 50}};
  } else if (scenario == "suite") {
    j["scenarios"] = Json::array();
    for (const char* name : {"reconstruction", "periodic_mismatch", "holonomy_rate",
                             "holonomy_rate_torus", "margin_sweep", "closing_shadowing"}) {
      Json entry = default_config(name);
      entry.erase("seed");  // entries without a seed inherit the suite's
      j["scenarios"].push_back(entry);
    }
  } else {
    throw ConfigError("no default config for scenario \"" + scenario + "\"");
  }
  return j;
}

System build_system(const Json& spec) {
  require_object(spec, "base");
  std::string kind = get_string(spec, "kind", "base");
  if (kind == "full_shift") {
    check_keys(spec, {"kind", "symbols", "lambda", "epsilon", "tau"}, "base");
    int k = get_int(spec, "symbols", "base", 2);
    double lambda = get_number(spec, "lambda", "base", 0.6931471805599453);
    return SftSystem::full_shift(k, lambda);
  }
  if (kind == "golden_mean") {
    check_keys(spec, {"kind", "lambda"}, "base");
    return SftSystem::golden_mean(get_number(spec, "lambda", "base", 0.6931471805599453));
  }
  if (kind == "sft") {
    check_keys(spec, {"kind", "symbols", "forbidden", "lambda"}, "base");
    int k = get_int(spec, "symbols", "base", 2, true);
    if (k < 1 || k > 10) throw ConfigError("base: symbols must lie in 1..10 (digit words)");
    std::vector<std::vector<bool>> t(static_cast<std::size_t>(k),
                                     std::vector<bool>(static_cast<std::size_t>(k), true));
    if (spec.contains("forbidden")) {
      if (!spec["forbidden"].is_array()) throw ConfigError("base: forbidden must be an array");
      for (const Json& f : spec["forbidden"]) {
        if (!f.is_string()) throw ConfigError("base: forbidden entries are two-symbol words");
        Word w = parse_word(f.get<std::string>(), k, "base.forbidden");
        if (w.size() != 2) throw ConfigError("base: forbidden words must have length 2");
        t[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])] = false;
      }
    }
    return SftSystem(k, t, get_number(spec, "lambda", "base", 0.6931471805599453));
  }
  if (kind == "cat_map") {
    check_keys(spec, {"kind"}, "base");
    return TorusSystem::cat_map();
  }
  if (kind == "torus") {
    check_keys(spec, {"kind", "matrix"}, "base");
    if (!spec.contains("matrix")) throw ConfigError("base: torus needs an integer matrix");
    Matrix m = parse_matrix(spec["matrix"], 2, "base.matrix");
    IntMat2 f{static_cast<std::int64_t>(std::llround(m(0, 0))),
              static_cast<std::int64_t>(std::llround(m(0, 1))),
              static_cast<std::int64_t>(std::llround(m(1, 0))),
              static_cast<std::int64_t>(std::llround(m(1, 1)))};
    return TorusSystem(f);
  }
  throw ConfigError("base: unknown kind \"" + kind + "\"");
}

Automorphism build_twist(const Json& spec, int dim) {
  require_object(spec, "twist");
  std::string kind = get_string(spec, "kind", "twist");
  if (kind == "identity") {
    check_keys(spec, {"kind"}, "twist");
    return Automorphism::identity(dim);
  }
  if (kind == "inner") {
    check_keys(spec, {"kind", "matrix"}, "twist");
    if (!spec.contains("matrix")) throw ConfigError("twist: inner needs \"matrix\"");
    return Automorphism::inner(parse_matrix(spec["matrix"], dim, "twist.matrix"));
  }
  if (kind == "rotation") {
    check_keys(spec, {"kind", "angle"}, "twist");
    if (dim != 2) throw ConfigError("twist: rotation twists need dim = 2");
    return Automorphism::inner(rotation2(get_number(spec, "angle", "twist", 0.0, true)));
  }
  if (kind == "inner_diag") {
    check_keys(spec, {"kind", "s"}, "twist");
    double s = get_number(spec, "s", "twist", 0.0, true);
    if (s <= 0.0) throw ConfigError("twist: inner_diag needs s > 0");
    Matrix m = Matrix::Identity(dim, dim);
    m(0, 0) = s;
    if (dim > 1) m(1, 1) = 1.0 / s;
    return Automorphism::inner(m);
  }
  if (kind == "transpose_inverse") {
    check_keys(spec, {"kind"}, "twist");
    return Automorphism::transpose_inverse(dim);
  }
  if (kind == "composition") {
    check_keys(spec, {"kind", "parts"}, "twist");
    if (!spec.contains("parts") || !spec["parts"].is_array() || spec["parts"].empty())
      throw ConfigError("twist: composition needs a nonempty \"parts\" array");
    std::vector<Automorphism> parts;
    for (const Json& p : spec["parts"]) parts.push_back(build_twist(p, dim));
    return Automorphism::compose(parts);
  }
  throw ConfigError("twist: unknown kind \"" + kind + "\"");
}

Generator build_generator(const Json& spec, const System& sys, int dim, double nu, Rng& rng) {
  require_object(spec, "generator");
  std::string kind = get_string(spec, "kind", "generator");
  if (kind == "random_locally_constant") {
    check_keys(spec, {"kind", "radius", "spread"}, "generator");
    return random_locally_constant(as_sft(sys), rng, dim, get_int(spec, "radius", "generator", 1),
                                   get_number(spec, "spread", "generator", 0.1));
  }
  if (kind == "random_symbolic_holder") {
    check_keys(spec, {"kind", "radius", "eps"}, "generator");
    return random_symbolic_holder(as_sft(sys), rng, dim, get_int(spec, "radius", "generator", 2),
                                  get_number(spec, "eps", "generator", 0.05), nu);
  }
  if (kind == "random_torus_smooth") {
    check_keys(spec, {"kind", "kmax", "eps"}, "generator");
    if (!std::holds_alternative<TorusSystem>(sys))
      throw ConfigError("generator: random_torus_smooth needs a torus base");
    return random_torus_smooth(rng, dim, get_int(spec, "kmax", "generator", 2),
                               get_number(spec, "eps", "generator", 0.1));
  }
  if (kind == "locally_constant") {
    check_keys(spec, {"kind", "radius", "table"}, "generator");
    const SftSystem& sft = as_sft(sys);
    int radius = get_int(spec, "radius", "generator", 0, true);
    if (!spec.contains("table") || !spec["table"].is_object())
      throw ConfigError("generator: locally_constant needs a \"table\" object");
    std::map<Word, Matrix> table;
    for (auto it = spec["table"].begin(); it != spec["table"].end(); ++it)
      table[parse_word(it.key(), sft.alphabet(), "generator.table")] =
          parse_matrix(it.value(), dim, "generator.table[" + it.key() + "]");
    return Generator::locally_constant(radius, std::move(table), sft.lambda(), nu);
  }
  if (kind == "torus_smooth") {
    check_keys(spec, {"kind", "terms"}, "generator");
    if (!std::holds_alternative<TorusSystem>(sys))
      throw ConfigError("generator: torus_smooth needs a torus base");
    if (!spec.contains("terms") || !spec["terms"].is_array() || spec["terms"].empty())
      throw ConfigError("generator: torus_smooth needs a nonempty \"terms\" array");
    std::vector<TrigTerm> terms;
    for (const Json& t : spec["terms"]) {
      require_object(t, "generator.terms entry");
      check_keys(t, {"kx", "ky", "cos", "sin"}, "generator.terms entry");
      TrigTerm term;
      term.kx = get_int(t, "kx", "generator.terms", 0);
      term.ky = get_int(t, "ky", "generator.terms", 0);
      term.c_cos = t.contains("cos") ? parse_matrix(t["cos"], dim, "generator.terms.cos")
                                     : Matrix(Matrix::Zero(dim, dim));
      term.c_sin = t.contains("sin") ? parse_matrix(t["sin"], dim, "generator.terms.sin")
                                     : Matrix(Matrix::Zero(dim, dim));
      terms.push_back(std::move(term));
    }
    return Generator::torus_smooth(std::move(terms), nu);
  }
  throw ConfigError("generator: unknown kind \"" + kind + "\"");
}

}  // namespace twistlab
