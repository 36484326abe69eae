#include "twistlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "twistlab/errors.hpp"
#include "twistlab/fit.hpp"

namespace twistlab {

TransferMap::TransferMap(TwistedCocycle a, TwistedCocycle b, Point anchor,
                         FiberBunchingReport report_a, FiberBunchingReport report_b, double tol,
                         int n_max, bool periodic_verified)
    : a_(std::move(a)),
      b_(std::move(b)),
      anchor_(std::move(anchor)),
      ra_(std::move(report_a)),
      rb_(std::move(report_b)),
      tol_(tol),
      n_max_(n_max),
      periodic_verified_(periodic_verified) {
  if (a_.dim() != b_.dim()) throw ConfigError("TransferMap: cocycle dimensions differ");
  if (tol_ <= 0.0) throw ConfigError("TransferMap: tol must be positive");
  require_bunched(ra_);
  require_bunched(rb_);
  if (!same_point(a_.base(), iterate(a_.base(), anchor_, 1), anchor_))
    throw ConfigError("TransferMap: anchor is not a fixed point");
}

TransferValue TransferMap::at(const Point& y) const {
  std::string key = point_key(y);
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  if (!is_homoclinic(a_.base(), y, anchor_))
    throw NotHomoclinic("transfer map evaluated off the homoclinic set of the anchor");

  HolonomyResult ha = stable_holonomy(a_, anchor_, y, ra_, tol_, n_max_);
  HolonomyResult hb = stable_holonomy(b_, y, anchor_, rb_, tol_, n_max_);
  TransferValue v;
  v.p = ha.h * hb.h;
  v.tail = ha.tail_bound * op_norm(hb.h) + hb.tail_bound * op_norm(ha.h) +
           ha.tail_bound * hb.tail_bound;
  {
    std::unique_lock lock(mu_);
    cache_.emplace(key, v);
  }
  return v;
}

double cohomology_residual(const TransferMap& pm, const Point& y, std::int64_t n) {
  const System& base = pm.a().base();
  Point fny = iterate(base, y, n);
  Matrix lhs = pm.a().evaluate(y, n);
  Matrix rhs =
      pm.at(fny).p * pm.b().evaluate(y, n) * inverse(pm.a().alpha().apply(n, pm.at(y).p));
  return rel_diff(lhs, rhs);
}

SuDiscrepancy su_discrepancy(const TransferMap& pm, const Point& y) {
  const Point& x = pm.anchor();
  HolonomyResult sa = stable_holonomy(pm.a(), x, y, pm.report_a(), pm.tol(), pm.n_max());
  HolonomyResult sb = stable_holonomy(pm.b(), y, x, pm.report_b(), pm.tol(), pm.n_max());
  HolonomyResult ua = unstable_holonomy(pm.a(), x, y, pm.report_a(), pm.tol(), pm.n_max());
  HolonomyResult ub = unstable_holonomy(pm.b(), y, x, pm.report_b(), pm.tol(), pm.n_max());

  SuDiscrepancy out;
  out.p_stable = sa.h * sb.h;
  out.p_unstable = ua.h * ub.h;
  out.value = op_norm(out.p_stable - out.p_unstable);
  out.combined_tail = sa.tail_bound + sb.tail_bound + ua.tail_bound + ub.tail_bound;
  return out;
}

PeriodicDataReport periodic_check(const TwistedCocycle& a, const TwistedCocycle& b, int n_max,
                                  double tol, std::int64_t budget) {
  if (n_max < 1) throw Error("periodic_check needs n_max >= 1");
  PeriodicDataReport rep;
  rep.n_max = n_max;
  rep.tol = tol;
  rep.worst.assign(static_cast<std::size_t>(n_max), 0.0);
  for (int n = 1; n <= n_max; ++n) {
    double w = 0.0;
    for (const Point& p : periodic_points(a.base(), n, budget)) {
      double r = rel_diff(a.evaluate(p, n), b.evaluate(p, n));
      if (r > w) w = r;
      if (r > tol && rep.match) {
        rep.match = false;
        rep.witness_n = n;
        rep.witness_key = point_key(p);
        rep.witness_residual = r;
      }
    }
    rep.worst[static_cast<std::size_t>(n - 1)] = w;
  }
  return rep;
}

ExtensionResult extend(const TransferMap& pm, const Point& y_target, std::vector<int> schedule,
                       double threshold) {
  const System& base = pm.a().base();
  if (!std::holds_alternative<SftSystem>(base))
    throw ConfigError(
        "extend needs a symbolic base; on the torus evaluate the transfer map on "
        "explicitly parametrized homoclinic points instead");
  if (threshold <= 0.0) throw ConfigError("extend: threshold must be positive");
  if (schedule.empty()) schedule = {4, 6, 8, 10, 12, 14, 16};
  if (!std::is_sorted(schedule.begin(), schedule.end()) ||
      std::adjacent_find(schedule.begin(), schedule.end()) != schedule.end())
    throw ConfigError("extend: schedule must be strictly increasing");

  ExtensionResult res;
  bool have_prev = false;
  Matrix prev;
  for (int n : schedule) {
    Point yn = homoclinic_truncate(base, y_target, pm.anchor(), n);
    TransferValue v = pm.at(yn);
    res.windows.push_back(n);
    res.p = v.p;
    if (have_prev) {
      double inc = op_norm(v.p - prev);
      res.increments.push_back(inc);
      res.last_increment = inc;
      if (inc < threshold) {
        res.certified = pm.periodic_verified();
        return res;
      }
    }
    prev = v.p;
    have_prev = true;
  }
  throw NotCauchy("extension increments stayed at " + std::to_string(res.last_increment) +
                  " (threshold " + std::to_string(threshold) +
                  ") through window " + std::to_string(schedule.back()));
}

HolderFit holder_fit(const TransferMap& pm, const std::vector<Point>& samples, int pair_budget) {
  const System& base = pm.a().base();
  std::vector<double> xs, ys;
  int used = 0;
  for (std::size_t i = 0; i < samples.size() && used < pair_budget; ++i) {
    for (std::size_t j = i + 1; j < samples.size() && used < pair_budget; ++j) {
      double d = distance(base, samples[i], samples[j]);
      if (d <= 0.0) continue;
      double diff = op_norm(pm.at(samples[i]).p - pm.at(samples[j]).p);
      ++used;
      // sub-roundoff differences would fit the noise floor, not the map
      if (diff <= 1e-13) continue;
      xs.push_back(std::log(d));
      ys.push_back(std::log(diff));
    }
  }
  if (used < 30)
    throw InsufficientPairs("holder_fit saw " + std::to_string(used) +
                            " usable pairs; needs at least 30");
  if (xs.empty()) return {0.0, std::numeric_limits<double>::infinity(), used};
  LineFit f = upper_envelope(xs, ys);
  return {std::exp(f.intercept), f.slope, used};
}

}  // namespace twistlab
