#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab {

using Word = std::vector<int>;

// Bi-infinite sequence that is eventually periodic on both ends, stored
// exactly: ...LLL [core] RRR... with the last symbol of left_tail sitting
// just left of the core and the first symbol of right_tail just right of it.
// `origin` indexes the symbol at coordinate 0 inside the core; shifts keep
// coordinate 0 inside the core by absorbing tail symbols, so all coordinate
// queries are exact integer arithmetic.
class SymbolicPoint {
 public:
  SymbolicPoint() = default;
  SymbolicPoint(Word left_tail, Word core, Word right_tail, int origin);

  // purely periodic repetition of `w` with w[0] at coordinate 0
  static SymbolicPoint periodic(const Word& w);
  // constant sequence of one symbol
  static SymbolicPoint constant(int symbol);

  int at(std::int64_t coordinate) const;
  Word window(std::int64_t lo, std::int64_t hi) const;  // inclusive

  SymbolicPoint shifted(std::int64_t n) const;

  // exact sequence equality (representations may differ)
  bool same_sequence(const SymbolicPoint& other) const;

  // size of the largest window [-N, N) on which the two sequences agree;
  // nullopt means the sequences are equal.
  std::optional<std::int64_t> agreement(const SymbolicPoint& other) const;

  const Word& left_tail() const { return left_; }
  const Word& core() const { return core_; }
  const Word& right_tail() const { return right_; }
  int origin() const { return origin_; }
  std::int64_t core_start() const { return -origin_; }
  std::int64_t core_end() const { return static_cast<std::int64_t>(core_.size()) - 1 - origin_; }

  // unique string for any fixed sequence representation-independently
  // (primitive tails, fully absorbed core); usable as a cache key
  std::string canonical_key() const;

  int max_symbol() const;

 private:
  void extend_right(std::int64_t k);
  void extend_left(std::int64_t k);

  Word left_{0}, core_{0}, right_{0};
  int origin_ = 0;
};

struct SftConnector {
  Word via;  // intermediate symbols, possibly empty
};

// Two-sided subshift of finite type over symbols {0..k-1} with metric
// d(x,y) = exp(-lambda * N(x,y)), N = largest window of agreement around 0.
// The transition graph must be strongly connected (checked on construction)
// so homoclinic connectors always exist.
class SftSystem {
 public:
  SftSystem(int alphabet, std::vector<std::vector<bool>> transitions, double lambda,
            double epsilon = -1.0, double tau = -1.0);

  static SftSystem full_shift(int alphabet, double lambda);
  // two symbols, word "11" forbidden
  static SftSystem golden_mean(double lambda);

  int alphabet() const { return k_; }
  bool admissible(int a, int b) const { return transitions_[a][b]; }
  double lambda() const { return lambda_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }

  void validate_point(const SymbolicPoint& p) const;  // throws NotAdmissible
  bool word_admissible(const Word& w) const;

  double distance(const SymbolicPoint& x, const SymbolicPoint& y) const;

  // local product: z_i = x_i for i >= 0, z_i = y_i for i <= 0.
  // pre: d(x, y) <= tau (forces x_0 = y_0, so the splice is admissible)
  SymbolicPoint bracket(const SymbolicPoint& x, const SymbolicPoint& y) const;

  // all points p with shift^n(p) = p, as purely periodic points; their count
  // equals trace(T^n) for the 0/1 transition matrix T
  std::vector<SymbolicPoint> periodic_points(int n, std::int64_t budget = 1 << 21) const;
  std::int64_t periodic_count_formula(int n) const;  // trace(T^n), exact

  // shortest connecting words through the transition graph (BFS, computed
  // once at construction); `via` excludes both endpoints
  const SftConnector& connector(int from, int to) const { return conn_[from][to]; }
  int connector_radius() const { return conn_radius_; }

  // eventual right/left agreement: smallest s with x_i = y_i for all i >= s
  // (resp. i <= s); nullopt if the sequences do not eventually agree on that
  // side. Equal sequences report s = 0.
  std::optional<std::int64_t> stable_from(const SymbolicPoint& x, const SymbolicPoint& y) const;
  std::optional<std::int64_t> unstable_until(const SymbolicPoint& x, const SymbolicPoint& y) const;

 private:
  int k_;
  std::vector<std::vector<bool>> transitions_;
  double lambda_, epsilon_, tau_;
  std::vector<std::vector<SftConnector>> conn_;
  int conn_radius_ = 0;
};

class Rng;

// all admissible words of the given length, lexicographic; throws
// BudgetExceeded past the budget
std::vector<Word> admissible_words(const SftSystem& sys, int len, std::int64_t budget = 1 << 21);

// uniform-ish admissible point: random core of core_len symbols around the
// origin, tails closed off with shortest cycles
SymbolicPoint random_symbolic_point(const SftSystem& sys, Rng& rng, int core_len);

// copy of y changed at coordinate -N (resp. +N) and nowhere in (-N, +inf)
// (resp. (-inf, N)), so d(y, result) = exp(-lambda N) exactly; nullopt when
// no alternative symbol fits the transition constraints at that site
std::optional<SymbolicPoint> stable_perturbation(const SftSystem& sys, Rng& rng,
                                                 const SymbolicPoint& y, std::int64_t N);
std::optional<SymbolicPoint> unstable_perturbation(const SftSystem& sys, Rng& rng,
                                                   const SymbolicPoint& y, std::int64_t N);

}  // namespace twistlab
