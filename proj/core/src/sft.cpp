#include "twistlab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <sstream>

#include "twistlab/rational.hpp"
#include "twistlab/rng.hpp"

namespace twistlab {

namespace {

std::string join(const Word& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s.push_back(',');
    s += std::to_string(w[i]);
  }
  return s;
}

Word rotate_left(Word w, size_t k) {
  k %= w.size();
  std::rotate(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
  return w;
}

Word primitive(const Word& w) {
  const size_t n = w.size();
  for (size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (size_t i = p; i < n && ok; ++i) ok = (w[i] == w[i % p]);
    if (ok) return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
  }
  return w;
}

}  // namespace

SymbolicPoint::SymbolicPoint(Word left_tail, Word core, Word right_tail, int origin)
    : left_(std::move(left_tail)), core_(std::move(core)), right_(std::move(right_tail)), origin_(origin) {
  if (left_.empty() || core_.empty() || right_.empty())
    throw Error("SymbolicPoint: tails and core must be non-empty");
  if (origin_ < 0 || origin_ >= static_cast<int>(core_.size()))
    throw Error("SymbolicPoint: origin " + std::to_string(origin_) + " outside core of size " +
                std::to_string(core_.size()));
}

SymbolicPoint SymbolicPoint::periodic(const Word& w) {
  if (w.empty()) throw Error("SymbolicPoint::periodic: empty word");
  return SymbolicPoint(w, w, w, 0);
}

SymbolicPoint SymbolicPoint::constant(int symbol) {
  return periodic(Word{symbol});
}

int SymbolicPoint::at(std::int64_t coordinate) const {
  const std::int64_t j = coordinate + origin_;
  const auto size = static_cast<std::int64_t>(core_.size());
  if (j >= 0 && j < size) return core_[static_cast<size_t>(j)];
  if (j >= size) {
    const auto r = static_cast<std::int64_t>(right_.size());
    return right_[static_cast<size_t>((j - size) % r)];
  }
  const auto l = static_cast<std::int64_t>(left_.size());
  const std::int64_t m = -j;  // distance below the core start, >= 1
  return left_[static_cast<size_t>((l - (m % l)) % l)];
}

Word SymbolicPoint::window(std::int64_t lo, std::int64_t hi) const {
  Word w;
  w.reserve(static_cast<size_t>(hi - lo + 1));
  for (std::int64_t i = lo; i <= hi; ++i) w.push_back(at(i));
  return w;
}

void SymbolicPoint::extend_right(std::int64_t k) {
  const auto r = static_cast<std::int64_t>(right_.size());
  for (std::int64_t i = 0; i < k; ++i) core_.push_back(right_[static_cast<size_t>(i % r)]);
  right_ = rotate_left(right_, static_cast<size_t>(k % r));
}

void SymbolicPoint::extend_left(std::int64_t k) {
  const auto l = static_cast<std::int64_t>(left_.size());
  Word prefix;
  prefix.reserve(static_cast<size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) {
    const std::int64_t m = k - j;  // distance below the old core start
    prefix.push_back(left_[static_cast<size_t>((l - (m % l)) % l)]);
  }
  core_.insert(core_.begin(), prefix.begin(), prefix.end());
  left_ = rotate_left(left_, static_cast<size_t>(((l - k % l) % l + l) % l));
  origin_ += static_cast<int>(k);
}

SymbolicPoint SymbolicPoint::shifted(std::int64_t n) const {
  SymbolicPoint p = *this;
  std::int64_t o = p.origin_ + n;
  const auto size = static_cast<std::int64_t>(p.core_.size());
  if (o >= size) p.extend_right(o - size + 1);
  if (o < 0) {
    p.extend_left(-o);
    o = 0;
  }
  p.origin_ = static_cast<int>(o);
  return p;
}

std::optional<std::int64_t> SymbolicPoint::agreement(const SymbolicPoint& other) const {
  const std::int64_t re = std::max(core_end(), other.core_end());
  const std::int64_t ls = std::min(core_start(), other.core_start());
  const std::int64_t pr = std::lcm(static_cast<std::int64_t>(right_.size()),
                                   static_cast<std::int64_t>(other.right_.size()));
  const std::int64_t pl = std::lcm(static_cast<std::int64_t>(left_.size()),
                                   static_cast<std::int64_t>(other.left_.size()));
  // beyond this window, eventual periodicity repeats whatever was already seen
  const std::int64_t bound = std::max(re + pr, -ls + pl) + 1;
  for (std::int64_t m = 0; m <= bound; ++m) {
    if (at(m) != other.at(m) || at(-m) != other.at(-m)) return m;
  }
  return std::nullopt;
}

bool SymbolicPoint::same_sequence(const SymbolicPoint& other) const {
  return !agreement(other).has_value();
}

std::string SymbolicPoint::canonical_key() const {
  SymbolicPoint p = *this;
  p.left_ = primitive(p.left_);
  p.right_ = primitive(p.right_);
  while (p.core_.size() > 1 && p.origin_ >= 1 && p.core_.front() == p.left_[0]) {
    p.core_.erase(p.core_.begin());
    p.left_ = rotate_left(p.left_, 1);
    --p.origin_;
  }
  while (p.core_.size() > 1 && p.origin_ + 2 <= static_cast<int>(p.core_.size()) &&
         p.core_.back() == p.right_.back()) {
    p.core_.pop_back();
    p.right_ = rotate_left(p.right_, p.right_.size() - 1);
  }
  std::ostringstream os;
  os << "L:" << join(p.left_) << "|C:" << join(p.core_) << "|O:" << p.origin_
     << "|R:" << join(p.right_);
  return os.str();
}

int SymbolicPoint::max_symbol() const {
  int m = 0;
  for (int s : left_) m = std::max(m, s);
  for (int s : core_) m = std::max(m, s);
  for (int s : right_) m = std::max(m, s);
  return m;
}

SftSystem::SftSystem(int alphabet, std::vector<std::vector<bool>> transitions, double lambda,
                     double epsilon, double tau)
    : k_(alphabet), transitions_(std::move(transitions)), lambda_(lambda) {
  if (k_ < 1) throw ConfigError("SftSystem: alphabet must have >= 1 symbol");
  if (!(lambda_ > 0)) throw ConfigError("SftSystem: lambda must be positive");
  if (transitions_.size() != static_cast<size_t>(k_))
    throw ConfigError("SftSystem: transition matrix must be k x k");
  for (const auto& row : transitions_)
    if (row.size() != static_cast<size_t>(k_))
      throw ConfigError("SftSystem: transition matrix must be k x k");

  const double local = std::exp(-lambda_);
  epsilon_ = epsilon > 0 ? epsilon : local;
  tau_ = tau > 0 ? tau : local;
  // the splice in bracket() needs d <= tau to pin the symbol at coordinate 0
  if (epsilon_ > local * (1 + 1e-12) || tau_ > local * (1 + 1e-12))
    throw ConfigError("SftSystem: epsilon/tau must be <= exp(-lambda) so they pin coordinate 0");

  // shortest bridges s -> via -> t with at least one edge; BFS per source
  conn_.assign(static_cast<size_t>(k_), std::vector<SftConnector>(static_cast<size_t>(k_)));
  std::vector<std::vector<bool>> reachable(static_cast<size_t>(k_),
                                           std::vector<bool>(static_cast<size_t>(k_), false));
  for (int s = 0; s < k_; ++s) {
    std::vector<int> parent(static_cast<size_t>(k_), -2);
    std::deque<int> queue;
    for (int t = 0; t < k_; ++t) {
      if (transitions_[s][t]) {
        parent[t] = -1;  // direct edge from s
        queue.push_back(t);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < k_; ++v) {
        if (transitions_[u][v] && parent[v] == -2) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    for (int t = 0; t < k_; ++t) {
      if (parent[t] == -2) continue;
      reachable[s][t] = true;
      Word via;
      for (int u = parent[t]; u != -1; u = parent[u]) via.push_back(u);
      std::reverse(via.begin(), via.end());
      conn_[s][t].via = std::move(via);
      conn_radius_ = std::max(conn_radius_, static_cast<int>(conn_[s][t].via.size()));
    }
  }
  for (int s = 0; s < k_; ++s)
    for (int t = 0; t < k_; ++t)
      if (!reachable[s][t])
        throw NoConnectingWord("SftSystem: no admissible path from symbol " + std::to_string(s) +
                               " to " + std::to_string(t) + "; transition graph must be strongly connected");
}

SftSystem SftSystem::full_shift(int alphabet, double lambda) {
  std::vector<std::vector<bool>> t(static_cast<size_t>(alphabet),
                                   std::vector<bool>(static_cast<size_t>(alphabet), true));
  return SftSystem(alphabet, std::move(t), lambda);
}

SftSystem SftSystem::golden_mean(double lambda) {
  std::vector<std::vector<bool>> t = {{true, true}, {true, false}};
  return SftSystem(2, std::move(t), lambda);
}

void SftSystem::validate_point(const SymbolicPoint& p) const {
  if (p.max_symbol() >= k_)
    throw NotAdmissible("point uses symbol " + std::to_string(p.max_symbol()) +
                        " outside alphabet of size " + std::to_string(k_));
  const auto check = [this](int a, int b, std::int64_t where) {
    if (!transitions_[a][b])
      throw NotAdmissible("forbidden transition " + std::to_string(a) + "->" + std::to_string(b) +
                          " at coordinate " + std::to_string(where));
  };
  const std::int64_t lo = p.core_start() - static_cast<std::int64_t>(p.left_tail().size()) - 1;
  const std::int64_t hi = p.core_end() + static_cast<std::int64_t>(p.right_tail().size()) + 1;
  for (std::int64_t i = lo; i < hi; ++i) check(p.at(i), p.at(i + 1), i);
}

bool SftSystem::word_admissible(const Word& w) const {
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (!transitions_[w[i]][w[i + 1]]) return false;
  return true;
}

double SftSystem::distance(const SymbolicPoint& x, const SymbolicPoint& y) const {
  const auto n = x.agreement(y);
  if (!n) return 0.0;
  return std::exp(-lambda_ * static_cast<double>(*n));
}

SymbolicPoint SftSystem::bracket(const SymbolicPoint& x, const SymbolicPoint& y) const {
  const double d = distance(x, y);
  if (d > tau_)
    throw DistanceExceedsTau("bracket: d(x, y) = " + std::to_string(d) + " exceeds tau = " +
                             std::to_string(tau_));
  // z takes y's past (i <= 0) and x's future (i >= 0); d <= tau forces x_0 = y_0
  Word core = y.window(y.core_start(), 0);
  const std::int64_t xe = std::max<std::int64_t>(x.core_end(), 1);
  Word fut = x.window(1, xe);
  core.insert(core.end(), fut.begin(), fut.end());
  // x's right tail continues after coordinate xe; re-anchor its phase
  Word rt = x.right_tail();
  const auto shift = static_cast<size_t>((xe - x.core_end()) % static_cast<std::int64_t>(rt.size()));
  std::rotate(rt.begin(), rt.begin() + static_cast<std::ptrdiff_t>(shift), rt.end());
  SymbolicPoint z(y.left_tail(), std::move(core), std::move(rt), y.origin());
  validate_point(z);
  return z;
}

std::vector<SymbolicPoint> SftSystem::periodic_points(int n, std::int64_t budget) const {
  if (n < 1) throw ConfigError("periodic_points: n must be >= 1");
  std::vector<SymbolicPoint> out;
  Word w(static_cast<size_t>(n), 0);
  std::int64_t count = 0;
  // depth-first over admissible words with admissible wrap-around
  const auto rec = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      if (transitions_[w[static_cast<size_t>(n - 1)]][w[0]]) {
        if (++count > budget)
          throw BudgetExceeded("periodic_points: more than " + std::to_string(budget) +
                               " points at period " + std::to_string(n));
        out.push_back(SymbolicPoint::periodic(w));
      }
      return;
    }
    for (int s = 0; s < k_; ++s) {
      if (pos > 0 && !transitions_[w[static_cast<size_t>(pos - 1)]][s]) continue;
      w[static_cast<size_t>(pos)] = s;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

std::int64_t SftSystem::periodic_count_formula(int n) const {
  if (n < 1) throw ConfigError("periodic_count_formula: n must be >= 1");
  using Row = std::vector<std::int64_t>;
  std::vector<Row> t(static_cast<size_t>(k_), Row(static_cast<size_t>(k_), 0));
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) t[i][j] = transitions_[i][j] ? 1 : 0;
  const auto mul = [this](const std::vector<Row>& a, const std::vector<Row>& b) {
    std::vector<Row> c(static_cast<size_t>(k_), Row(static_cast<size_t>(k_), 0));
    for (int i = 0; i < k_; ++i)
      for (int l = 0; l < k_; ++l)
        for (int j = 0; j < k_; ++j)
          c[i][j] = checked_add(c[i][j], checked_mul(a[i][l], b[l][j]));
    return c;
  };
  std::vector<Row> acc = t;
  for (int i = 1; i < n; ++i) acc = mul(acc, t);
  std::int64_t tr = 0;
  for (int i = 0; i < k_; ++i) tr = checked_add(tr, acc[i][i]);
  return tr;
}

std::optional<std::int64_t> SftSystem::stable_from(const SymbolicPoint& x,
                                                   const SymbolicPoint& y) const {
  // beyond E both sequences are purely periodic with period dividing pr, so a
  // disagreement there recurs forever and agreement over one full period
  // extends to all larger i
  const std::int64_t e = std::max(x.core_end(), y.core_end());
  const std::int64_t pr = std::lcm(static_cast<std::int64_t>(x.right_tail().size()),
                                   static_cast<std::int64_t>(y.right_tail().size()));
  const std::int64_t floor =
      std::min(x.core_start(), y.core_start()) -
      std::lcm(static_cast<std::int64_t>(x.left_tail().size()),
               static_cast<std::int64_t>(y.left_tail().size())) - 1;
  for (std::int64_t i = e + pr; i > floor; --i) {
    if (x.at(i) != y.at(i)) {
      if (i > e) return std::nullopt;
      return i + 1;
    }
  }
  return std::min<std::int64_t>(0, floor + 1);  // equal sequences
}

std::optional<std::int64_t> SftSystem::unstable_until(const SymbolicPoint& x,
                                                      const SymbolicPoint& y) const {
  const std::int64_t e = std::min(x.core_start(), y.core_start());
  const std::int64_t pl = std::lcm(static_cast<std::int64_t>(x.left_tail().size()),
                                   static_cast<std::int64_t>(y.left_tail().size()));
  const std::int64_t ceil =
      std::max(x.core_end(), y.core_end()) +
      std::lcm(static_cast<std::int64_t>(x.right_tail().size()),
               static_cast<std::int64_t>(y.right_tail().size())) + 1;
  for (std::int64_t i = e - pl; i < ceil; ++i) {
    if (x.at(i) != y.at(i)) {
      if (i < e) return std::nullopt;
      return i - 1;
    }
  }
  return std::max<std::int64_t>(0, ceil - 1);  // equal sequences
}

namespace {

// shortest cycle word through `s`, phased so its last symbol may precede `s`
Word cycle_before(const SftSystem& sys, int s) {
  Word w;
  w.push_back(s);
  const Word& via = sys.connector(s, s).via;
  w.insert(w.end(), via.begin(), via.end());
  return w;
}

// shortest cycle word through `s`, phased so `s` may precede its first symbol
Word cycle_after(const SftSystem& sys, int s) {
  Word w = sys.connector(s, s).via;
  w.push_back(s);
  return w;
}

}  // namespace

std::vector<Word> admissible_words(const SftSystem& sys, int len, std::int64_t budget) {
  if (len < 1) throw Error("admissible_words needs len >= 1");
  std::vector<Word> out;
  Word w;
  std::int64_t visited = 0;
  auto rec = [&](auto&& self) -> void {
    if (++visited > budget) throw BudgetExceeded("admissible word enumeration");
    if (static_cast<int>(w.size()) == len) {
      out.push_back(w);
      return;
    }
    for (int s = 0; s < sys.alphabet(); ++s) {
      if (!w.empty() && !sys.admissible(w.back(), s)) continue;
      w.push_back(s);
      self(self);
      w.pop_back();
    }
  };
  rec(rec);
  return out;
}

SymbolicPoint random_symbolic_point(const SftSystem& sys, Rng& rng, int core_len) {
  if (core_len < 1) throw Error("random point needs core_len >= 1");
  Word core;
  core.reserve(static_cast<std::size_t>(core_len));
  core.push_back(rng.uniform_int(0, sys.alphabet() - 1));
  while (static_cast<int>(core.size()) < core_len) {
    std::vector<int> next;
    for (int b = 0; b < sys.alphabet(); ++b)
      if (sys.admissible(core.back(), b)) next.push_back(b);
    core.push_back(next[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(next.size()) - 1))]);
  }
  SymbolicPoint p(cycle_before(sys, core.front()), core, cycle_after(sys, core.back()),
                  core_len / 2);
  sys.validate_point(p);
  return p;
}

std::optional<SymbolicPoint> stable_perturbation(const SftSystem& sys, Rng& rng,
                                                 const SymbolicPoint& y, std::int64_t N) {
  if (N < 1) throw Error("perturbation depth must be >= 1");
  std::vector<int> candidates;
  for (int s = 0; s < sys.alphabet(); ++s)
    if (s != y.at(-N) && sys.admissible(s, y.at(-N + 1))) candidates.push_back(s);
  if (candidates.empty()) return std::nullopt;
  int s = candidates[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];

  Word core;
  core.push_back(s);
  Word rest = y.window(-N + 1, y.core_end());
  core.insert(core.end(), rest.begin(), rest.end());
  SymbolicPoint out(cycle_before(sys, s), core, y.right_tail(), static_cast<int>(N));
  sys.validate_point(out);
  return out;
}

std::optional<SymbolicPoint> unstable_perturbation(const SftSystem& sys, Rng& rng,
                                                   const SymbolicPoint& y, std::int64_t N) {
  if (N < 1) throw Error("perturbation depth must be >= 1");
  std::vector<int> candidates;
  for (int s = 0; s < sys.alphabet(); ++s)
    if (s != y.at(N) && sys.admissible(y.at(N - 1), s)) candidates.push_back(s);
  if (candidates.empty()) return std::nullopt;
  int s = candidates[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];

  Word core = y.window(y.core_start(), N - 1);
  core.push_back(s);
  SymbolicPoint out(y.left_tail(), core, cycle_after(sys, s), y.origin());
  sys.validate_point(out);
  return out;
}

}  // namespace twistlab
