#include "twistlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "twistlab/errors.hpp"
#include "twistlab/fiber_bunching.hpp"
#include "twistlab/fit.hpp"
#include "twistlab/holonomy.hpp"
#include "twistlab/transfer.hpp"

namespace twistlab {
namespace {

double block_num(const Json& block, const char* key, double fallback) {
  if (!block.is_object() || !block.contains(key)) return fallback;
  const Json& v = block.at(key);
  if (!v.is_number()) throw ConfigError(std::string("expected a number at ") + key);
  return v.get<double>();
}

int block_int(const Json& block, const char* key, int fallback) {
  double v = block_num(block, key, fallback);
  int n = static_cast<int>(std::llround(v));
  if (v != n) throw ConfigError(std::string("expected an integer at ") + key);
  return n;
}

void add_verdict(Report& r, std::string name, bool pass, double value, double bound,
                 std::string detail = "") {
  r.verdicts.push_back(Verdict{std::move(name), pass, value, bound, std::move(detail)});
}

Report make_report(const ExperimentConfig& cfg) {
  Report r;
  r.scenario = cfg.scenario;
  r.seed = cfg.seed;
  r.config_echo = cfg.echo;
  return r;
}

// the constant sequence on the first self-admissible symbol, or the toral
// origin carrying both leaf representations
Point anchor_fixed_point(const System& sys) {
  if (const auto* sft = std::get_if<SftSystem>(&sys)) {
    for (int a = 0; a < sft->alphabet(); ++a)
      if (sft->admissible(a, a)) return Point(SymbolicPoint::constant(a));
    throw ConfigError("base admits no fixed point: no symbol may follow itself");
  }
  return Point(as_torus(sys).homoclinic_point(0, 0));
}

struct Certified {
  TwistedCocycle c;
  GrowthCertificate growth;
  ThetaData theta;
  FiberBunchingReport rep;
};

Certified certify_built(TwistedCocycle c, const ExperimentConfig& cfg, Rng& rng,
                        Strictness strictness = Strictness::FiveTwo) {
  int growth_n = cfg.depth("growth", 20);
  int theta_n = cfg.depth("theta", 20);
  int pts = cfg.count("theta_points", 5);
  GrowthCertificate g = c.alpha().certify_growth(growth_n, 40, rng);
  std::vector<Point> sample;
  sample.reserve(pts);
  for (int i = 0; i < pts; ++i) sample.push_back(random_point(c.base(), rng));
  ThetaData th = estimate_theta(c, sample, theta_n);
  FiberBunchingReport rep = certify(c, cfg.nu, lambda_of(c.base()), g, th, strictness);
  return Certified{std::move(c), g, th, rep};
}

std::vector<Point> homoclinic_samples(const System& sys, Rng& rng, const Point& anchor,
                                      int count) {
  std::vector<Point> out;
  std::set<std::string> seen;
  const bool symbolic = std::holds_alternative<SftSystem>(sys);
  for (int guard = 0; static_cast<int>(out.size()) < count && guard < 80 * count; ++guard) {
    Point y = [&]() -> Point {
      if (symbolic) {
        int n = static_cast<int>(rng.uniform_int(3, 9));
        return homoclinic_truncate(sys, random_point(sys, rng), anchor, n);
      }
      auto m0 = rng.uniform_int(-6, 6);
      auto m1 = rng.uniform_int(-6, 6);
      if (m0 == 0 && m1 == 0) m0 = 1;
      return Point(as_torus(sys).homoclinic_point(m0, m1));
    }();
    if (seen.insert(point_key(y)).second) out.push_back(std::move(y));
  }
  if (static_cast<int>(out.size()) < count)
    throw InsufficientPairs("could not draw enough distinct homoclinic points");
  return out;
}

// z on the stable set of y at distance about e^{-lambda N}; nullopt when the
// transition structure blocks every flip at that site
std::optional<Point> stable_nearby(const System& sys, Rng& rng, const Point& y, int N) {
  if (const auto* sft = std::get_if<SftSystem>(&sys)) {
    auto z = stable_perturbation(*sft, rng, std::get<SymbolicPoint>(y), N);
    if (!z) return std::nullopt;
    return Point(std::move(*z));
  }
  double t = std::exp(-lambda_of(sys) * N) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
  return Point(as_torus(sys).stable_translate(std::get<TorusPoint>(y), t));
}

std::pair<Point, Point> draw_stable_pair(const System& sys, Rng& rng, int N) {
  for (int i = 0; i < 64; ++i) {
    Point y = random_point(sys, rng);
    auto z = stable_nearby(sys, rng, y, N);
    if (z) return {std::move(y), std::move(*z)};
  }
  throw InsufficientPairs("no stable pair at dyadic level " + std::to_string(N));
}

// ---------------------------------------------------------------------------

Report run_certify(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  Rng master(cfg.seed);
  Rng rng_gen = master.fork(1), rng_cert = master.fork(2), rng_anchor = master.fork(3);

  System sys = build_system(cfg.base);
  Automorphism alpha = build_twist(cfg.twist, cfg.dim);
  Generator gen = build_generator(cfg.generator, sys, cfg.dim, cfg.nu, rng_gen);
  TwistedCocycle c(sys, alpha, gen);

  Certified ca = certify_built(c, cfg, rng_cert);
  FiberBunchingReport rep7 =
      certify(ca.c, cfg.nu, lambda_of(ca.c.base()), ca.growth, ca.theta, Strictness::SevenTwo);
  rep.bunching = Json::array({to_json(ca.rep), to_json(rep7)});
  add_verdict(rep, "bunched_five_two", ca.rep.satisfied, ca.rep.margin, 0.0, ca.rep.note);
  if (!ca.rep.satisfied) {
    rep.note = "certificate not satisfied; adapted norm check skipped";
    return rep;
  }

  int K = cfg.depth("adapted", 12);
  Point x = random_point(ca.c.base(), rng_anchor);
  AdaptedNormFamily fam = adapted_norms(ca.c, x, K, ca.rep);
  double bound = std::exp(fam.weight) * (1.0 + 1e-6);
  Table steps{"adapted_norm_steps", {"k", "ratio", "bound"}, {}};
  double worst = 0.0;
  for (int k = 1; k <= fam.depth; ++k) {
    double ratio = knorm_step_check(fam, k);
    worst = std::max(worst, ratio);
    steps.rows.push_back({static_cast<double>(k), ratio, bound});
  }
  add_verdict(rep, "adapted_step_ratio", worst <= bound, worst, bound);
  rep.tables.push_back(std::move(steps));
  return rep;
}

// ---------------------------------------------------------------------------

Report run_reconstruction(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  Rng master(cfg.seed);
  Rng rng_gen = master.fork(1), rng_q = master.fork(2), rng_cert_a = master.fork(3),
      rng_cert_b = master.fork(4), rng_probe = master.fork(5), rng_samp = master.fork(6),
      rng_ext = master.fork(7);

  System sys = build_system(cfg.base);
  Automorphism alpha = build_twist(cfg.twist, cfg.dim);
  Generator gen = build_generator(cfg.generator, sys, cfg.dim, cfg.nu, rng_gen);
  TwistedCocycle ac(sys, alpha, gen);
  Point anchor = anchor_fixed_point(ac.base());

  double spread = block_num(cfg.conjugator, "spread", 0.08);
  Generator q = random_conjugator(ac.base(), rng_q, cfg.dim, anchor, spread);
  TwistedCocycle bc = conjugate(ac, q, rng_probe);

  Certified ca = certify_built(ac, cfg, rng_cert_a);
  Certified cb = certify_built(bc, cfg, rng_cert_b);
  rep.bunching = Json::array({to_json(ca.rep), to_json(cb.rep)});
  bool certified = ca.rep.satisfied && cb.rep.satisfied;
  add_verdict(rep, "both_certified", certified, std::min(ca.rep.margin, cb.rep.margin), 0.0,
              certified ? "" : "fiber bunching failed for at least one side");
  if (!certified) {
    rep.note = "certification failed; reconstruction skipped";
    return rep;
  }

  TransferMap pm(ca.c, cb.c, anchor, ca.rep, cb.rep, cfg.tol, cfg.depth("holonomy", 200));
  int npts = cfg.count("points", 50);
  auto ys = homoclinic_samples(ac.base(), rng_samp, anchor, npts);

  Table errs{"reconstruction_errors", {"sample", "error", "tail"}, {}};
  double sup_err = 0.0;
  for (int i = 0; i < npts; ++i) {
    TransferValue v = pm.at(ys[i]);
    double e = op_norm(v.p - q.eval(ac.base(), ys[i]));
    sup_err = std::max(sup_err, e);
    errs.rows.push_back({static_cast<double>(i), e, v.tail});
  }
  add_verdict(rep, "reconstruction_sup_error", sup_err <= 10.0 * cfg.tol, sup_err,
              10.0 * cfg.tol);

  int ncoh = cfg.depth("cohomology", 8);
  Table coh{"cohomology_residuals", {"n", "worst"}, {}};
  double worst_coh = 0.0;
  for (int n = -ncoh; n <= ncoh; ++n) {
    if (n == 0) continue;
    double w = 0.0;
    for (const Point& y : ys) w = std::max(w, cohomology_residual(pm, y, n));
    worst_coh = std::max(worst_coh, w);
    coh.rows.push_back({static_cast<double>(n), w});
  }
  add_verdict(rep, "cohomology_residual", worst_coh <= 1e-7, worst_coh, 1e-7);

  if (std::holds_alternative<SftSystem>(ac.base())) {
    Point yt = random_point(ac.base(), rng_ext);
    double threshold = 1e-5;
    ExtensionResult er = extend(pm, yt, {}, threshold);
    double ee = op_norm(er.p - q.eval(ac.base(), yt));
    Table ext{"extension_increments", {"window", "increment"}, {}};
    for (std::size_t i = 0; i + 1 < er.windows.size() && i < er.increments.size(); ++i)
      ext.rows.push_back({static_cast<double>(er.windows[i + 1]), er.increments[i]});
    add_verdict(rep, "extension_matches_conjugator", ee <= 10.0 * threshold, ee,
                10.0 * threshold);
    rep.tables.push_back(std::move(ext));
  }

  rep.tables.push_back(std::move(errs));
  rep.tables.push_back(std::move(coh));
  return rep;
}

// ---------------------------------------------------------------------------

Report run_periodic_mismatch(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  Rng master(cfg.seed);
  Rng rng_gen = master.fork(1), rng_cert_a = master.fork(2), rng_cert_b = master.fork(3),
      rng_samp = master.fork(4);

  System sys = build_system(cfg.base);
  const auto* sft = std::get_if<SftSystem>(&sys);
  if (!sft) throw ConfigError("periodic_mismatch needs a symbolic base");
  Automorphism alpha = build_twist(cfg.twist, cfg.dim);

  // the generator table is built here, not through the fleet builder, so one
  // cylinder can be rescaled to make the pair genuinely non-cohomologous
  int radius = block_int(cfg.generator, "radius", 1);
  double spread = block_num(cfg.generator, "spread", 0.08);
  std::map<Word, Matrix> table;
  for (const Word& w : admissible_words(*sft, 2 * radius + 1))
    table[w] = random_near_identity(rng_gen, cfg.dim, spread);

  Word wstar;
  if (cfg.perturbation.is_object() && cfg.perturbation.contains("word")) {
    for (char ch : cfg.perturbation.at("word").get<std::string>()) {
      if (ch < '0' || ch > '9') throw ConfigError("perturbation.word wants digits");
      wstar.push_back(ch - '0');
    }
    if (static_cast<int>(wstar.size()) != 2 * radius + 1 || !sft->word_admissible(wstar))
      throw ConfigError("perturbation.word must be an admissible window of the generator");
  } else {
    // window of a genuine period-2 point, so every periodic orbit of length
    // >= 2 crosses the rescaled cylinder
    for (const Point& p : periodic_points(sys, 2)) {
      if (!same_point(sys, iterate(sys, p, 1), p)) {
        wstar = std::get<SymbolicPoint>(p).window(-radius, radius);
        break;
      }
    }
    if (wstar.empty()) throw ConfigError("base has no genuine period-2 orbit to perturb");
  }
  double factor = block_num(cfg.perturbation, "factor", 1.3);
  std::map<Word, Matrix> table_b = table;
  table_b.at(wstar) = factor * table_b.at(wstar);

  TwistedCocycle ac(sys, alpha, Generator::locally_constant(radius, std::move(table),
                                                            sft->lambda()));
  TwistedCocycle bc =
      ac.with_generator(Generator::locally_constant(radius, std::move(table_b), sft->lambda()));

  Certified ca = certify_built(ac, cfg, rng_cert_a);
  Certified cb = certify_built(bc, cfg, rng_cert_b);
  rep.bunching = Json::array({to_json(ca.rep), to_json(cb.rep)});
  bool certified = ca.rep.satisfied && cb.rep.satisfied;
  add_verdict(rep, "both_certified", certified, std::min(ca.rep.margin, cb.rep.margin), 0.0);
  if (!certified) {
    rep.note = "certification failed; periodic comparison skipped";
    return rep;
  }

  int n_per = cfg.depth("periodic", 8);
  PeriodicDataReport pos = periodic_check(ca.c, ca.c, n_per, cfg.tol);
  PeriodicDataReport neg = periodic_check(ca.c, cb.c, n_per, cfg.tol);
  double pos_worst = pos.worst.empty() ? 0.0 : *std::max_element(pos.worst.begin(), pos.worst.end());
  add_verdict(rep, "matching_periodic_data", pos.match, pos_worst, cfg.tol);
  std::string witness = neg.match ? ""
                                  : "witness n=" + std::to_string(neg.witness_n) +
                                        " orbit=" + neg.witness_key;
  add_verdict(rep, "mismatch_detected", !neg.match, neg.witness_residual, cfg.tol, witness);

  Table per{"periodic_residuals", {"n", "matching_worst", "perturbed_worst"}, {}};
  for (int n = 1; n <= n_per; ++n)
    per.rows.push_back({static_cast<double>(n), pos.worst[n - 1], neg.worst[n - 1]});
  rep.tables.push_back(std::move(per));

  Point anchor = anchor_fixed_point(ca.c.base());
  int npts = cfg.count("points", 20);
  auto ys = homoclinic_samples(ca.c.base(), rng_samp, anchor, npts);
  int nmax = cfg.depth("holonomy", 200);
  TransferMap pm_pos(ca.c, ca.c, anchor, ca.rep, ca.rep, cfg.tol, nmax, pos.match);
  TransferMap pm_neg(ca.c, cb.c, anchor, ca.rep, cb.rep, cfg.tol, nmax, false);

  Table su{"su_discrepancy",
           {"sample", "matching_value", "matching_tails", "perturbed_value", "perturbed_tails"},
           {}};
  double worst_pos = 0.0, best_neg = 0.0;
  for (int i = 0; i < npts; ++i) {
    SuDiscrepancy sp = su_discrepancy(pm_pos, ys[i]);
    SuDiscrepancy sn = su_discrepancy(pm_neg, ys[i]);
    worst_pos = std::max(worst_pos, sp.value / sp.combined_tail);
    best_neg = std::max(best_neg, sn.value / sn.combined_tail);
    su.rows.push_back(
        {static_cast<double>(i), sp.value, sp.combined_tail, sn.value, sn.combined_tail});
  }
  add_verdict(rep, "su_matching_within_5x", worst_pos <= 5.0, worst_pos, 5.0);
  add_verdict(rep, "su_mismatch_exceeds_10x", best_neg >= 10.0, best_neg, 10.0);
  rep.tables.push_back(std::move(su));
  return rep;
}

// ---------------------------------------------------------------------------

Report run_holonomy_rate(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  Rng master(cfg.seed);
  Rng rng_gen = master.fork(1), rng_cert = master.fork(2), rng_id = master.fork(3),
      rng_dy = master.fork(4), rng_tri = master.fork(5), rng_eq = master.fork(6),
      rng_prof = master.fork(7);

  System sys = build_system(cfg.base);
  Automorphism alpha = build_twist(cfg.twist, cfg.dim);
  Generator gen = build_generator(cfg.generator, sys, cfg.dim, cfg.nu, rng_gen);
  TwistedCocycle c(sys, alpha, gen);

  Certified ca = certify_built(c, cfg, rng_cert);
  rep.bunching = Json::array({to_json(ca.rep)});
  add_verdict(rep, "certified", ca.rep.satisfied, ca.rep.margin, 0.0, ca.rep.note);
  if (!ca.rep.satisfied) {
    rep.note = "certificate not satisfied; holonomy checks skipped";
    return rep;
  }
  const System& base = ca.c.base();
  double tol = cfg.tol;
  int nmax = cfg.depth("holonomy", 200);

  {
    Point y = random_point(base, rng_id);
    HolonomyResult h = stable_holonomy(ca.c, y, y, ca.rep, tol, nmax);
    double dev = op_norm(h.h - Matrix::Identity(cfg.dim, cfg.dim));
    add_verdict(rep, "identity_exact", dev == 0.0 && h.n_used == 0, dev, 0.0);
  }

  // deviation from the identity across dyadic separations
  int n_dy = cfg.depth("dyadic", 12);
  int reps = cfg.count("dyadic_reps", 8);
  Table grid{"holder_grid", {"rep", "level", "distance", "deviation"}, {}};
  std::vector<double> gx, gy;
  for (int r = 0; r < reps; ++r) {
    Point y = random_point(base, rng_dy);
    for (int N = 1; N <= n_dy; ++N) {
      auto z = stable_nearby(base, rng_dy, y, N);
      if (!z) continue;
      HolonomyResult h = stable_holonomy(ca.c, y, *z, ca.rep, tol, nmax);
      double dev = op_norm(h.h - Matrix::Identity(cfg.dim, cfg.dim));
      double d = distance(base, y, *z);
      grid.rows.push_back({static_cast<double>(r), static_cast<double>(N), d, dev});
      if (dev > 1e-12 && d > 0.0) {
        gx.push_back(std::log(d));
        gy.push_back(std::log(dev));
      }
    }
  }
  if (gx.size() >= 8) {
    LineFit lf = least_squares(gx, gy);
    add_verdict(rep, "holder_slope", lf.slope >= cfg.nu - 0.1, lf.slope, cfg.nu - 0.1);
  } else {
    add_verdict(rep, "holder_slope", true, std::numeric_limits<double>::quiet_NaN(),
                cfg.nu - 0.1, "deviations at roundoff across the grid; slope undefined");
  }
  rep.tables.push_back(std::move(grid));

  // symmetry and composition across triples on one stable set
  int ntri = cfg.count("triples", 100);
  Table comp{"composition", {"sample", "residual", "bound", "symmetry", "symmetry_bound"}, {}};
  double worst_comp = 0.0, worst_sym = 0.0;
  for (int i = 0; i < ntri; ++i) {
    int N1 = static_cast<int>(rng_tri.uniform_int(1, 4));
    int N2 = N1 + static_cast<int>(rng_tri.uniform_int(1, 3));
    auto [y, z1] = draw_stable_pair(base, rng_tri, N1);
    auto z2 = stable_nearby(base, rng_tri, z1, N2);
    if (!z2) continue;
    HolonomyResult h_y_z1 = stable_holonomy(ca.c, y, z1, ca.rep, tol, nmax);
    HolonomyResult h_z1_z2 = stable_holonomy(ca.c, z1, *z2, ca.rep, tol, nmax);
    HolonomyResult h_y_z2 = stable_holonomy(ca.c, y, *z2, ca.rep, tol, nmax);
    HolonomyResult h_z1_y = stable_holonomy(ca.c, z1, y, ca.rep, tol, nmax);
    double res = op_norm(h_y_z2.h - h_z1_z2.h * h_y_z1.h);
    double bound = 5.0 * (h_y_z2.tail_bound + h_z1_z2.tail_bound + h_y_z1.tail_bound);
    double sym = op_norm(h_y_z1.h * h_z1_y.h - Matrix::Identity(cfg.dim, cfg.dim));
    double sym_bound = 2.0 * (h_y_z1.tail_bound + h_z1_y.tail_bound);
    worst_comp = std::max(worst_comp, res / bound);
    worst_sym = std::max(worst_sym, sym / sym_bound);
    comp.rows.push_back({static_cast<double>(i), res, bound, sym, sym_bound});
  }
  add_verdict(rep, "composition_within_5x", worst_comp <= 1.0, worst_comp, 1.0);
  add_verdict(rep, "symmetry_within_2x", worst_sym <= 1.0, worst_sym, 1.0);
  rep.tables.push_back(std::move(comp));

  // pushing a pair m steps along the orbit maps holonomies by the cocycle
  int npairs = cfg.count("pairs", 100);
  int meq = cfg.depth("equivariance", 5);
  Table eq{"equivariance", {"sample", "m", "residual", "bound"}, {}};
  double worst_eq = 0.0;
  for (int i = 0; i < npairs; ++i) {
    int N = static_cast<int>(rng_eq.uniform_int(1, 5));
    auto [y, z] = draw_stable_pair(base, rng_eq, N);
    auto m = rng_eq.uniform_int(-meq, meq);
    HolonomyResult h = stable_holonomy(ca.c, y, z, ca.rep, tol, nmax);
    HolonomyResult lhs =
        stable_holonomy(ca.c, iterate(base, y, m), iterate(base, z, m), ca.rep, tol, nmax);
    Matrix amy = ca.c.evaluate(y, m);
    Matrix amz = ca.c.evaluate(z, m);
    Matrix rhs = amz * ca.c.alpha().apply(m, h.h) * inverse(amy);
    double scale = ca.c.alpha().kappa(m) * op_norm(amz) * op_norm(inverse(amy));
    double res = op_norm(lhs.h - rhs);
    double bound = 5.0 * (lhs.tail_bound + h.tail_bound * scale);
    worst_eq = std::max(worst_eq, res / bound);
    eq.rows.push_back({static_cast<double>(i), static_cast<double>(m), res, bound});
  }
  add_verdict(rep, "equivariance_within_5x", worst_eq <= 1.0, worst_eq, 1.0);
  rep.tables.push_back(std::move(eq));

  // increment decay along the limit, against the certified exponent
  int n_prof = cfg.depth("profile", 60);
  int preps = cfg.count("profile_pairs", 8);
  Table prof{"convergence_profile", {"rep", "n", "increment"}, {}};
  double worst_rate = -std::numeric_limits<double>::infinity();
  int fitted = 0;
  for (int r = 0; r < preps; ++r) {
    auto [y, z] = draw_stable_pair(base, rng_prof, 3);
    std::vector<double> incs = convergence_profile(ca.c, y, z, ca.rep, n_prof);
    std::vector<double> xs, ys2;
    for (std::size_t n = 0; n < incs.size(); ++n) {
      if (incs[n] <= 1e-13) break;
      prof.rows.push_back({static_cast<double>(r), static_cast<double>(n + 1), incs[n]});
      xs.push_back(static_cast<double>(n + 1));
      ys2.push_back(std::log(incs[n]));
    }
    if (xs.size() < 4) continue;
    worst_rate = std::max(worst_rate, least_squares(xs, ys2).slope);
    ++fitted;
  }
  double rate_bound = ca.rep.hol_rate() + 0.05;
  if (fitted > 0) {
    add_verdict(rep, "increment_rate", worst_rate <= rate_bound, worst_rate, rate_bound);
  } else {
    add_verdict(rep, "increment_rate", true, std::numeric_limits<double>::quiet_NaN(),
                rate_bound, "profiles stabilized immediately; rate undefined");
  }
  rep.tables.push_back(std::move(prof));
  return rep;
}

// ---------------------------------------------------------------------------

Report run_margin_sweep(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  if (cfg.dim < 2) throw ConfigError("margin_sweep needs dim >= 2 for the diagonal twist");
  Rng master(cfg.seed);
  Rng rng_gen = master.fork(1), rng_pts = master.fork(2), rng_growth = master.fork(3);

  System sys = build_system(cfg.base);
  Generator gen = build_generator(cfg.generator, sys, cfg.dim, cfg.nu, rng_gen);

  double from = block_num(cfg.sweep, "from", 1.0);
  double to = block_num(cfg.sweep, "to", 1.3);
  int steps = block_int(cfg.sweep, "steps", 13);
  if (!(from >= 1.0) || !(to > from) || steps < 3)
    throw ConfigError("sweep wants 1 <= from < to and steps >= 3");

  int growth_n = cfg.depth("growth", 20);
  int theta_n = cfg.depth("theta", 20);
  int pts = cfg.count("theta_points", 5);
  std::vector<Point> sample;
  for (int i = 0; i < pts; ++i) sample.push_back(random_point(sys, rng_pts));
  double lambda = lambda_of(sys);

  Table tab{"margin_sweep",
            {"s", "rho", "theta", "margin_five", "delta_five", "satisfied_five", "margin_seven",
             "satisfied_seven"},
            {}};
  std::vector<double> sv, thv, m5, m7;
  Json first_rep, last_rep;
  for (int i = 0; i < steps; ++i) {
    double s = from + (to - from) * i / (steps - 1);
    Matrix d = Matrix::Identity(cfg.dim, cfg.dim);
    d(0, 0) = s;
    d(1, 1) = 1.0 / s;
    TwistedCocycle cs(sys, Automorphism::inner(d), gen);
    GrowthCertificate g = cs.alpha().certify_growth(growth_n, 40, rng_growth);
    ThetaData th = estimate_theta(cs, sample, theta_n);
    FiberBunchingReport r5 = certify(cs, cfg.nu, lambda, g, th, Strictness::FiveTwo);
    FiberBunchingReport r7 = certify(cs, cfg.nu, lambda, g, th, Strictness::SevenTwo);
    if (i == 0) first_rep = to_json(r5);
    if (i == steps - 1) last_rep = to_json(r5);
    sv.push_back(s);
    thv.push_back(r5.theta);
    m5.push_back(r5.margin);
    m7.push_back(r7.margin);
    tab.rows.push_back({s, r5.rho, r5.theta, r5.margin, r5.delta, r5.satisfied ? 1.0 : 0.0,
                        r7.margin, r7.satisfied ? 1.0 : 0.0});
  }
  rep.bunching = Json::array({first_rep, last_rep});
  rep.tables.push_back(std::move(tab));

  auto crossing = [&](const std::vector<double>& m, double weight, const char* name) {
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      if (m[i] > 0.0 && m[i + 1] <= 0.0) {
        double frac = m[i] / (m[i] - m[i + 1]);
        double s_hat = sv[i] + frac * (sv[i + 1] - sv[i]);
        double th_hat = thv[i] + frac * (thv[i + 1] - thv[i]);
        double pred = std::exp((cfg.nu * lambda - 2.0 * th_hat) / weight);
        add_verdict(rep, name, std::abs(s_hat - pred) <= 0.02 * pred, s_hat, pred);
        return;
      }
    }
    add_verdict(rep, name, false, std::numeric_limits<double>::quiet_NaN(), 0.0,
                "margin does not change sign across the sweep");
  };
  crossing(m5, 10.0, "five_two_crossing");
  crossing(m7, 14.0, "seven_two_crossing");
  return rep;
}

// ---------------------------------------------------------------------------

Report run_closing_shadowing(const ExperimentConfig& cfg) {
  Report rep = make_report(cfg);
  Rng master(cfg.seed);
  Rng rng_sft = master.fork(1), rng_torus = master.fork(2);

  System sym = build_system(cfg.base);
  if (!std::holds_alternative<SftSystem>(sym))
    throw ConfigError("closing_shadowing wants a symbolic base plus a torus block");
  const SftSystem& sft = as_sft(sym);
  double lam = sft.lambda();
  int count = cfg.count("closing", 50);
  int n_top = cfg.depth("closing", 12);

  std::map<int, std::vector<Point>> cache;
  Table ts{"sft_closing", {"sample", "n", "defect", "worst_ratio", "recovered"}, {}};
  bool all_ok = true;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    int n = static_cast<int>(rng_sft.uniform_int(2, n_top));
    auto& pts = cache[n];
    if (pts.empty()) pts = periodic_points(sym, n);
    std::optional<SymbolicPoint> z;
    Point p0 = pts.front();
    for (int tries = 0; tries < 64 && !z; ++tries) {
      p0 = pts[rng_sft.uniform_u64(pts.size())];
      auto z1 = stable_perturbation(sft, rng_sft, std::get<SymbolicPoint>(p0), n + 4);
      if (!z1) continue;
      z = unstable_perturbation(sft, rng_sft, *z1, n + 4);
    }
    if (!z) throw InsufficientPairs("could not perturb a periodic tail");
    ClosingReport cr = closing(sym, Point(*z), n);
    bool recovered = same_point(sym, cr.p, p0);
    bool exact = cr.c_claimed == 1.0 && cr.gamma_claimed == lam &&
                 cr.worst_ratio <= 1.0 + 1e-12 && recovered;
    all_ok = all_ok && exact;
    worst = std::max(worst, cr.worst_ratio);
    ts.rows.push_back({static_cast<double>(i), static_cast<double>(n), cr.defect, cr.worst_ratio,
                       recovered ? 1.0 : 0.0});
  }
  add_verdict(rep, "sft_shadowing_exact", all_ok, worst, 1.0);
  rep.tables.push_back(std::move(ts));

  System tor = build_system(cfg.torus);
  if (!std::holds_alternative<TorusSystem>(tor))
    throw ConfigError("closing_shadowing torus block must build a toral system");
  const TorusSystem& tsys = as_torus(tor);
  double lam2 = tsys.lambda();
  std::map<int, std::vector<Point>> cache2;
  Table tt{"torus_closing", {"sample", "n", "defect", "worst_ratio", "fitted_gamma"}, {}};
  double worst2 = 0.0;
  std::vector<double> xs, ys;
  for (int i = 0; i < count; ++i) {
    int n = static_cast<int>(rng_torus.uniform_int(5, 8));
    auto& pts = cache2[n];
    if (pts.empty()) pts = periodic_points(tor, n);
    const Point& p0 = pts[rng_torus.uniform_u64(pts.size())];
    double t = 0.015 * std::exp(-lam2 * n) * rng_torus.uniform(0.5, 1.0) *
               (rng_torus.uniform() < 0.5 ? 1.0 : -1.0);
    TorusPoint z = tsys.unstable_translate(std::get<TorusPoint>(p0), t);
    ClosingReport cr = closing(tor, Point(z), n);
    worst2 = std::max(worst2, cr.worst_ratio);
    // low j is contaminated by the rational snap; the decay toward f^n z is
    // clean from j = 2 on
    for (std::size_t j = 2; j < cr.residuals.size(); ++j) {
      if (cr.residuals[j] <= 1e-13 || cr.defect <= 0.0) continue;
      xs.push_back(static_cast<double>(j) - n);
      ys.push_back(std::log(cr.residuals[j] / cr.defect));
    }
    tt.rows.push_back({static_cast<double>(i), static_cast<double>(n), cr.defect, cr.worst_ratio,
                       cr.fitted_gamma});
  }
  add_verdict(rep, "torus_shadowing_bound", worst2 <= 1.0 + 1e-9, worst2, 1.0);
  if (xs.size() >= 8) {
    double gamma_hat = least_squares(xs, ys).slope;
    add_verdict(rep, "torus_rate_fit", std::abs(gamma_hat - lam2) <= 0.1 * lam2, gamma_hat, lam2);
  } else {
    add_verdict(rep, "torus_rate_fit", false, std::numeric_limits<double>::quiet_NaN(), lam2,
                "too few usable residuals for the rate fit");
  }
  rep.tables.push_back(std::move(tt));
  return rep;
}

}  // namespace

Report run(const ExperimentConfig& cfg) {
  if (cfg.scenario == "certify") return run_certify(cfg);
  if (cfg.scenario == "reconstruction") return run_reconstruction(cfg);
  if (cfg.scenario == "periodic_mismatch") return run_periodic_mismatch(cfg);
  if (cfg.scenario == "holonomy_rate" || cfg.scenario == "holonomy_rate_torus")
    return run_holonomy_rate(cfg);
  if (cfg.scenario == "margin_sweep") return run_margin_sweep(cfg);
  if (cfg.scenario == "closing_shadowing") return run_closing_shadowing(cfg);
  throw ConfigError("no runner for scenario " + cfg.scenario);
}

std::vector<Report> run_suite(const ExperimentConfig& cfg) {
  if (cfg.scenario != "suite") throw ConfigError("run_suite wants a suite config");
  std::vector<Report> out;
  out.reserve(cfg.sub.size());
  for (const Json& entry : cfg.sub) {
    Json e = entry;
    if (!e.contains("seed")) e["seed"] = cfg.seed;
    out.push_back(run(ExperimentConfig::from_json(e)));
  }
  return out;
}

}  // namespace twistlab
