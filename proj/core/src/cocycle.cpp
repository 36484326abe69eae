#include "twistlab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

constexpr double kValueCondCap = 1e8;
constexpr double kProductCondCap = 1e12;

struct LocallyConstantData {
  int radius;
  double lambda;
  std::map<Word, Matrix> table;
};

struct SymbolicHolderData {
  int radius;
  double eps, lambda, nu;
  std::vector<std::vector<Matrix>> site;  // [i + radius][symbol]
};

struct TorusSmoothData {
  std::vector<TrigTerm> terms;
};

struct ConjugatedData {
  std::shared_ptr<const Generator> base, q;
  std::shared_ptr<const Automorphism> alpha;
};

void check_value(const Matrix& m, const char* what) {
  if (cond_2(m) > kValueCondCap)
    throw IllConditioned(std::string(what) + ": generator value exceeds the condition cap");
}

}  // namespace

struct Generator::Impl {
  std::variant<LocallyConstantData, SymbolicHolderData, TorusSmoothData, ConjugatedData> v;
  HolderData holder;
  int d = 0;
};

Generator Generator::locally_constant(int radius, std::map<Word, Matrix> table, double lambda,
                                      double nu) {
  if (radius < 0) throw ConfigError("locally constant generator: radius must be >= 0");
  if (table.empty()) throw ConfigError("locally constant generator: empty table");
  if (nu <= 0.0 || nu > 1.0) throw ConfigError("holder exponent must lie in (0, 1]");
  const int want = 2 * radius + 1;
  int d = static_cast<int>(table.begin()->second.rows());
  for (const auto& [w, m] : table) {
    if (static_cast<int>(w.size()) != want)
      throw ConfigError("locally constant generator: word length != 2*radius+1");
    if (m.rows() != d || m.cols() != d)
      throw ConfigError("locally constant generator: entry shape mismatch");
    check_value(m, "locally constant table");
  }

  // diameter bound via a fixed reference entry; windows agreeing to depth
  // r+1 give identical values, so the certificate holds at every scale
  double spread = 0.0;
  const Matrix& ref = table.begin()->second;
  for (const auto& [w, m] : table) spread = std::max(spread, op_norm(m - ref));
  HolderData h{nu, 2.0 * spread * std::exp(nu * lambda * (radius + 1)), true};

  auto impl = std::make_shared<Impl>();
  impl->v = LocallyConstantData{radius, lambda, std::move(table)};
  impl->holder = h;
  impl->d = d;
  return Generator(impl);
}

Generator Generator::symbolic_holder(int radius, double eps,
                                     std::vector<std::vector<Matrix>> site_matrices,
                                     double lambda, double nu) {
  if (radius < 0) throw ConfigError("symbolic holder generator: radius must be >= 0");
  if (eps < 0.0) throw ConfigError("symbolic holder generator: eps must be >= 0");
  if (nu <= 0.0 || nu > 1.0) throw ConfigError("holder exponent must lie in (0, 1]");
  if (static_cast<int>(site_matrices.size()) != 2 * radius + 1)
    throw ConfigError("symbolic holder generator: need 2*radius+1 site rows");
  int d = 0;
  double prod = 1.0, site_cap = 0.0;
  for (int i = 0; i < static_cast<int>(site_matrices.size()); ++i) {
    const auto& row = site_matrices[static_cast<std::size_t>(i)];
    if (row.empty()) throw ConfigError("symbolic holder generator: empty site row");
    double m_i = 0.0;
    for (const auto& m : row) {
      if (d == 0) d = static_cast<int>(m.rows());
      if (m.rows() != d || m.cols() != d)
        throw ConfigError("symbolic holder generator: site shape mismatch");
      m_i = std::max(m_i, op_norm(m));
    }
    double eps_i = eps * std::exp(-nu * lambda * std::abs(i - radius));
    prod *= 1.0 + eps_i * m_i;
    site_cap = std::max(site_cap, m_i);
  }
  // factors at sites |i| >= N are the only ones that can differ across a
  // pair agreeing to depth N; geometric envelope of their contributions
  double c = 4.0 * eps * site_cap * prod / (1.0 - std::exp(-nu * lambda));

  auto impl = std::make_shared<Impl>();
  impl->v = SymbolicHolderData{radius, eps, lambda, nu, std::move(site_matrices)};
  impl->holder = HolderData{nu, c, true};
  impl->d = d;
  return Generator(impl);
}

Generator Generator::torus_smooth(std::vector<TrigTerm> terms, double nu) {
  if (terms.empty()) throw ConfigError("torus generator: no terms");
  if (nu <= 0.0 || nu > 1.0) throw ConfigError("holder exponent must lie in (0, 1]");
  int d = static_cast<int>(terms.front().c_cos.rows());
  double lip = 0.0;
  for (const auto& t : terms) {
    if (t.c_cos.rows() != d || t.c_cos.cols() != d || t.c_sin.rows() != d || t.c_sin.cols() != d)
      throw ConfigError("torus generator: coefficient shape mismatch");
    double knorm = std::hypot(static_cast<double>(t.kx), static_cast<double>(t.ky));
    lip += 2.0 * 3.141592653589793 * knorm * (op_norm(t.c_cos) + op_norm(t.c_sin));
  }
  // Lipschitz bound from the coefficients; torus distances never exceed 1,
  // so the same constant serves every exponent nu <= 1
  auto impl = std::make_shared<Impl>();
  impl->v = TorusSmoothData{std::move(terms)};
  impl->holder = HolderData{nu, lip, true};
  impl->d = d;
  return Generator(impl);
}

Generator Generator::conjugated(std::shared_ptr<const Generator> base,
                                std::shared_ptr<const Generator> q,
                                std::shared_ptr<const Automorphism> alpha, HolderData holder) {
  if (!base || !q || !alpha) throw ConfigError("conjugated generator: missing component");
  if (base->dim() != q->dim() || base->dim() != alpha->dim())
    throw ConfigError("conjugated generator: dimension mismatch");
  auto impl = std::make_shared<Impl>();
  impl->d = base->dim();
  impl->v = ConjugatedData{std::move(base), std::move(q), std::move(alpha)};
  impl->holder = holder;
  return Generator(impl);
}

int Generator::dim() const { return impl_->d; }

const HolderData& Generator::holder() const { return impl_->holder; }

bool Generator::symbolic_domain() const {
  if (const auto* c = std::get_if<ConjugatedData>(&impl_->v)) return c->base->symbolic_domain();
  return !std::holds_alternative<TorusSmoothData>(impl_->v);
}

int Generator::radius() const {
  if (const auto* lc = std::get_if<LocallyConstantData>(&impl_->v)) return lc->radius;
  if (const auto* sh = std::get_if<SymbolicHolderData>(&impl_->v)) return sh->radius;
  return -1;
}

void Generator::validate_coverage(const SftSystem& sys) const {
  if (const auto* lc = std::get_if<LocallyConstantData>(&impl_->v)) {
    for (const auto& w : admissible_words(sys, 2 * lc->radius + 1)) {
      if (lc->table.find(w) == lc->table.end()) {
        std::string s;
        for (int c : w) s += std::to_string(c);
        throw ConfigError("locally constant generator: admissible window " + s +
                          " missing from the table");
      }
    }
    return;
  }
  if (const auto* sh = std::get_if<SymbolicHolderData>(&impl_->v)) {
    for (const auto& row : sh->site)
      if (static_cast<int>(row.size()) < sys.alphabet())
        throw ConfigError("symbolic holder generator: site row shorter than the alphabet");
    return;
  }
  if (const auto* cj = std::get_if<ConjugatedData>(&impl_->v)) {
    cj->base->validate_coverage(sys);
    cj->q->validate_coverage(sys);
    return;
  }
  throw ConfigError("toral generator cannot cover a symbolic base");
}

Matrix Generator::eval(const System& sys, const Point& x) const {
  if (const auto* lc = std::get_if<LocallyConstantData>(&impl_->v)) {
    const auto* p = std::get_if<SymbolicPoint>(&x);
    if (!p) throw Error("locally constant generator needs a symbolic point");
    auto it = lc->table.find(p->window(-lc->radius, lc->radius));
    if (it == lc->table.end())
      throw NotAdmissible("locally constant generator: window not covered by the table");
    return it->second;
  }

  if (const auto* sh = std::get_if<SymbolicHolderData>(&impl_->v)) {
    const auto* p = std::get_if<SymbolicPoint>(&x);
    if (!p) throw Error("symbolic generator needs a symbolic point");
    Matrix m = Matrix::Identity(impl_->d, impl_->d);
    for (int i = -sh->radius; i <= sh->radius; ++i) {
      double eps_i = sh->eps * std::exp(-sh->nu * sh->lambda * std::abs(i));
      const auto& row = sh->site[static_cast<std::size_t>(i + sh->radius)];
      int s = p->at(i);
      if (s >= static_cast<int>(row.size()))
        throw NotAdmissible("symbolic holder generator: symbol outside the site row");
      m = m * (Matrix::Identity(impl_->d, impl_->d) + eps_i * row[static_cast<std::size_t>(s)]);
    }
    check_value(m, "symbolic holder");
    return m;
  }

  if (const auto* ts = std::get_if<TorusSmoothData>(&impl_->v)) {
    const auto* p = std::get_if<TorusPoint>(&x);
    if (!p) throw Error("torus generator needs a torus point");
    Matrix m = Matrix::Zero(impl_->d, impl_->d);
    for (const auto& t : ts->terms) {
      double ang = 2.0 * 3.141592653589793 * (t.kx * p->c[0] + t.ky * p->c[1]);
      m += t.c_cos * std::cos(ang) + t.c_sin * std::sin(ang);
    }
    check_value(m, "torus generator");
    return m;
  }

  const auto& cj = std::get<ConjugatedData>(impl_->v);
  Matrix qf, qx;
  try {
    qf = cj.q->eval(sys, iterate(sys, x, 1));
    qx = cj.q->eval(sys, x);
  } catch (const IllConditioned& e) {
    throw SingularQ(e.what());
  }
  Matrix b = inverse(qf) * cj.base->eval(sys, x) * cj.alpha->apply(1, qx);
  check_value(b, "conjugated generator");
  return b;
}

TwistedCocycle::TwistedCocycle(System base, Automorphism alpha, Generator gen)
    : base_(std::make_shared<System>(std::move(base))),
      alpha_(std::make_shared<Automorphism>(std::move(alpha))),
      gen_(std::move(gen)) {
  if (alpha_->dim() != gen_.dim()) throw ConfigError("cocycle: twist/generator dimension mismatch");
  bool sft = std::holds_alternative<SftSystem>(*base_);
  if (gen_.symbolic_domain() != sft)
    throw ConfigError("cocycle: generator domain does not match the base system");
  if (sft) gen_.validate_coverage(std::get<SftSystem>(*base_));
}

int TwistedCocycle::dim() const { return gen_.dim(); }

Matrix TwistedCocycle::generator_at(const Point& x) const { return gen_.eval(*base_, x); }

Matrix TwistedCocycle::evaluate(const Point& x, std::int64_t n) const {
  const int d = dim();
  if (n == 0) return Matrix::Identity(d, d);
  if (n < 0) {
    Matrix fwd = evaluate(iterate(*base_, x, n), -n);
    return alpha_->apply(n, inverse(fwd));
  }
  Matrix p = gen_.eval(*base_, x);
  Point cur = x;
  for (std::int64_t j = 1; j < n; ++j) {
    cur = iterate(*base_, cur, 1);
    p = gen_.eval(*base_, cur) * alpha_->apply(1, p);
    if (cond_2(p) > kProductCondCap)
      throw IllConditioned("cocycle product condition cap tripped at step " + std::to_string(j));
  }
  return p;
}

double TwistedCocycle::law_residual(const Point& x, std::int64_t m, std::int64_t n) const {
  Matrix lhs = evaluate(x, m + n);
  Matrix rhs = evaluate(iterate(*base_, x, m), n) * alpha_->apply(n, evaluate(x, m));
  return rel_diff(lhs, rhs);
}

std::pair<Point, Matrix> TwistedCocycle::skew_step(const Point& x, const Matrix& g) const {
  return {iterate(*base_, x, 1), gen_.eval(*base_, x) * alpha_->apply(1, g)};
}

TwistedCocycle TwistedCocycle::with_generator(Generator gen) const {
  TwistedCocycle out = *this;
  if (out.alpha_->dim() != gen.dim())
    throw ConfigError("cocycle: twist/generator dimension mismatch");
  bool sft = std::holds_alternative<SftSystem>(*out.base_);
  if (gen.symbolic_domain() != sft)
    throw ConfigError("cocycle: generator domain does not match the base system");
  if (sft) gen.validate_coverage(std::get<SftSystem>(*out.base_));
  out.gen_ = std::move(gen);
  return out;
}

TwistedCocycle conjugate(const TwistedCocycle& c, const Generator& q, Rng& rng,
                         int pair_samples) {
  if (q.dim() != c.dim()) throw ConfigError("conjugate: Q dimension mismatch");
  if (pair_samples < 12) throw ConfigError("conjugate: need at least 12 holder samples");

  auto base_gen = std::make_shared<const Generator>(c.generator());
  auto q_gen = std::make_shared<const Generator>(q);
  double nu = std::min(base_gen->holder().nu, q_gen->holder().nu);

  Generator probe = Generator::conjugated(base_gen, q_gen, c.alpha_ptr(), HolderData{nu, 0.0, false});
  const System& sys = c.base();

  double worst = 0.0;
  double lambda = lambda_of(sys);
  for (int i = 0; i < pair_samples; ++i) {
    int level = 2 + i % 12;  // e^{-lambda} can reach the nearby_point cap of 0.5
    Point x = random_point(sys, rng);
    std::optional<Point> y;
    try {
      y = nearby_point(sys, rng, x, std::exp(-lambda * level));
    } catch (const InsufficientPairs&) {
      continue;  // the transition structure can block every flip at one site
    }
    double dxy = distance(sys, x, *y);
    if (dxy <= 0.0) continue;
    double diff = op_norm(probe.eval(sys, x) - probe.eval(sys, *y));
    worst = std::max(worst, diff / std::pow(dxy, nu));
  }
  HolderData h{nu, 1.5 * worst, false};
  return c.with_generator(Generator::conjugated(base_gen, q_gen, c.alpha_ptr(), h));
}

Generator random_locally_constant(const SftSystem& sys, Rng& rng, int d, int radius,
                                  double spread) {
  std::map<Word, Matrix> table;
  for (const auto& w : admissible_words(sys, 2 * radius + 1))
    table[w] = random_near_identity(rng, d, spread);
  return Generator::locally_constant(radius, std::move(table), sys.lambda());
}

Generator random_symbolic_holder(const SftSystem& sys, Rng& rng, int d, int radius, double eps,
                                 double nu) {
  std::vector<std::vector<Matrix>> site(static_cast<std::size_t>(2 * radius + 1));
  for (auto& row : site) {
    row.reserve(static_cast<std::size_t>(sys.alphabet()));
    for (int s = 0; s < sys.alphabet(); ++s) {
      Matrix n = random_gaussian(rng, d);
      double norm = op_norm(n);
      if (norm < 1e-8) n = Matrix::Identity(d, d);
      else n /= norm;
      row.push_back(n);
    }
  }
  return Generator::symbolic_holder(radius, eps, std::move(site), sys.lambda(), nu);
}

Generator random_torus_smooth(Rng& rng, int d, int kmax, double eps) {
  if (kmax < 1) throw ConfigError("torus generator: kmax must be >= 1");
  Matrix b0 = random_near_identity(rng, d, 0.15);
  std::vector<TrigTerm> terms;
  terms.push_back(TrigTerm{0, 0, b0, Matrix::Zero(d, d)});
  double total = 0.0;
  for (int kx = 0; kx <= kmax; ++kx) {
    for (int ky = kx == 0 ? 1 : -kmax; ky <= kmax; ++ky) {
      double knorm2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
      double w = eps / (1.0 + knorm2);
      TrigTerm t{kx, ky, w * random_gaussian(rng, d), w * random_gaussian(rng, d)};
      total += op_norm(t.c_cos) + op_norm(t.c_sin);
      terms.push_back(std::move(t));
    }
  }
  // keep the oscillating part well below the constant part's smallest
  // singular value so every value stays invertible
  Eigen::JacobiSVD<Matrix> svd(b0);
  double smin = svd.singularValues()(d - 1);
  if (total > 0.4 * smin) {
    double scale = 0.4 * smin / total;
    for (std::size_t i = 1; i < terms.size(); ++i) {
      terms[i].c_cos *= scale;
      terms[i].c_sin *= scale;
    }
  }
  return Generator::torus_smooth(std::move(terms));
}

Generator random_conjugator(const System& sys, Rng& rng, int d, const Point& anchor,
                            double spread) {
  if (const auto* sft = std::get_if<SftSystem>(&sys)) {
    std::map<Word, Matrix> table;
    for (const auto& w : admissible_words(*sft, 3))
      table[w] = random_near_identity(rng, d, spread);
    table[std::get<SymbolicPoint>(anchor).window(-1, 1)] = Matrix::Identity(d, d);
    return Generator::locally_constant(1, std::move(table), sft->lambda());
  }
  const auto& p = std::get<TorusPoint>(anchor);
  if (std::abs(p.c[0]) > 1e-15 || std::abs(p.c[1]) > 1e-15)
    throw ConfigError("random_conjugator on the torus needs the origin as anchor");
  std::vector<TrigTerm> terms;
  terms.push_back(TrigTerm{0, 0, Matrix::Identity(d, d), Matrix::Zero(d, d)});
  double total = 0.0;
  for (auto [kx, ky] : {std::pair<int, int>{1, 0}, std::pair<int, int>{0, 1}}) {
    TrigTerm t{kx, ky, (0.5 * spread) * random_gaussian(rng, d),
               (0.5 * spread) * random_gaussian(rng, d)};
    total += op_norm(t.c_cos) + op_norm(t.c_sin);
    terms.push_back(std::move(t));
  }
  if (total > 0.25) {
    for (std::size_t i = 1; i < terms.size(); ++i) {
      terms[i].c_cos *= 0.25 / total;
      terms[i].c_sin *= 0.25 / total;
    }
  }
  // the cosine coefficients sum to the value at the origin; pin it to Id
  Matrix q0 = Matrix::Zero(d, d);
  for (const auto& t : terms) q0 += t.c_cos;
  terms[0].c_cos += Matrix::Identity(d, d) - q0;
  return Generator::torus_smooth(std::move(terms));
}

}  // namespace twistlab
