#include "qbs/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qbs {

namespace {

Rational factorial(int n) {
  mpz_class f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return Rational(f);
}

Rational rational_pow(const Rational& base, int n) {
  Rational out = 1;
  for (int k = 0; k < n; ++k) out *= base;
  return out;
}

void check_rotation_eps(const Rational& eps) {
  const Rational half_sq = eps * eps / 2;
  if (half_sq >= 1) {
    throw std::domain_error("rotation moments require eps^2 < 2 (geometric series diverges)");
  }
}

}  // namespace

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw std::domain_error("cannot convert non-finite value to rational");
  Rational r(value);  // mpq_set_d is exact
  r.canonicalize();
  return r;
}

const char* to_string(MomentVariable v) noexcept { return v == MomentVariable::X ? "x" : "spread"; }

MomentPolynomial MomentPolynomial::constant(const Rational& c) { return monomial(c, 0, 0); }

MomentPolynomial MomentPolynomial::monomial(const Rational& c, int x_power, int spread_power) {
  MomentPolynomial p;
  p.set_coefficient(x_power, spread_power, c);
  return p;
}

int MomentPolynomial::total_degree() const noexcept {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
  return d;
}

Rational MomentPolynomial::coefficient(int x_power, int spread_power) const {
  const auto it = terms_.find({x_power, spread_power});
  return it == terms_.end() ? Rational(0) : it->second;
}

void MomentPolynomial::set_coefficient(int x_power, int spread_power, const Rational& c) {
  if (x_power < 0 || spread_power < 0) throw std::invalid_argument("negative exponent");
  if (c == 0) {
    terms_.erase({x_power, spread_power});
  } else {
    terms_[{x_power, spread_power}] = c;
  }
}

MomentPolynomial& MomentPolynomial::operator+=(const MomentPolynomial& rhs) {
  for (const auto& [e, c] : rhs.terms_) {
    Rational sum = coefficient(e.first, e.second) + c;
    set_coefficient(e.first, e.second, sum);
  }
  return *this;
}

MomentPolynomial& MomentPolynomial::operator-=(const MomentPolynomial& rhs) {
  for (const auto& [e, c] : rhs.terms_) {
    Rational diff = coefficient(e.first, e.second) - c;
    set_coefficient(e.first, e.second, diff);
  }
  return *this;
}

MomentPolynomial& MomentPolynomial::operator*=(const Rational& s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

MomentPolynomial operator*(const MomentPolynomial& a, const MomentPolynomial& b) {
  MomentPolynomial out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      const int i = ea.first + eb.first;
      const int j = ea.second + eb.second;
      Rational sum = out.coefficient(i, j) + ca * cb;
      out.set_coefficient(i, j, sum);
    }
  }
  return out;
}

MomentPolynomial MomentPolynomial::pow(int n) const {
  if (n < 0) throw std::invalid_argument("negative polynomial power");
  auto out = constant(1);
  for (int k = 0; k < n; ++k) out = out * *this;
  return out;
}

MomentPolynomial MomentPolynomial::derivative(MomentVariable v) const {
  MomentPolynomial out;
  for (const auto& [e, c] : terms_) {
    const int power = v == MomentVariable::X ? e.first : e.second;
    if (power == 0) continue;
    if (v == MomentVariable::X) {
      out.set_coefficient(e.first - 1, e.second, c * power);
    } else {
      out.set_coefficient(e.first, e.second - 1, c * power);
    }
  }
  return out;
}

MomentPolynomial MomentPolynomial::antiderivative(MomentVariable v) const {
  MomentPolynomial out;
  for (const auto& [e, c] : terms_) {
    if (v == MomentVariable::X) {
      out.set_coefficient(e.first + 1, e.second, c / (e.first + 1));
    } else {
      out.set_coefficient(e.first, e.second + 1, c / (e.second + 1));
    }
  }
  return out;
}

double MomentPolynomial::evaluate(double x, double spread) const {
  return FastPolynomial(*this)(x, spread);
}

std::string MomentPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  // Highest total degree first, then by descending x power.
  std::vector<std::pair<Exponents, Rational>> sorted(terms_.begin(), terms_.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    const int da = a.first.first + a.first.second;
    const int db = b.first.first + b.first.second;
    if (da != db) return da > db;
    return a.first.first > b.first.first;
  });
  for (const auto& [e, c] : sorted) {
    if (!first) out << " + ";
    first = false;
    out << c.get_str();
    if (e.first > 0) out << " * x^" << e.first;
    if (e.second > 0) out << " * e^" << e.second;
  }
  return out.str();
}

FastPolynomial::FastPolynomial(const MomentPolynomial& p) {
  terms_.reserve(p.terms().size());
  for (const auto& [e, c] : p.terms()) terms_.push_back({c.get_d(), e.first, e.second});
}

double FastPolynomial::operator()(double x, double spread) const noexcept {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.c;
    for (int k = 0; k < t.i; ++k) v *= x;
    for (int k = 0; k < t.j; ++k) v *= spread;
    sum += v;
  }
  return sum;
}

Rational translation_moment_exact(int i, const Rational& eps) {
  if (i < 0) throw std::invalid_argument("moment order must be >= 0");
  Rational out = 2 * rational_pow(-eps, i) / ((i + 1) * (i + 2));
  out.canonicalize();
  return out;
}

double translation_moment(int i, double eps) {
  return translation_moment_exact(i, to_rational(eps)).get_d();
}

MomentPolynomial rotation_rhs(int n, MomentVariable variable, double eps) {
  if (n < 2) throw std::domain_error("rotation_rhs needs order n >= 2");
  const Rational e = to_rational(eps);
  check_rotation_eps(e);
  const Rational half_sq = e * e / 2;
  MomentPolynomial base;
  if (variable == MomentVariable::X) {
    base = MomentPolynomial::monomial(half_sq, 1, 0) + MomentPolynomial::monomial(-e, 0, 1);
  } else {
    base = MomentPolynomial::monomial(half_sq, 0, 1) + MomentPolynomial::monomial(e, 1, 0);
  }
  const Rational denom = Rational(n * (n - 1)) * rational_pow(1 - half_sq, n - 1);
  Rational scale = 1 / denom;
  scale.canonicalize();
  return base.pow(n - 2) * scale;
}

namespace {

// (-1)^n a^{n-2} + 2n d/dv a^{n-1}, the part of n! * LHS(n) not involving a^n.
MomentPolynomial lower_order_terms(const std::vector<MomentPolynomial>& a, int n,
                                   MomentVariable v) {
  MomentPolynomial out = a[n - 2] * Rational(n % 2 == 0 ? 1 : -1);
  out += a[n - 1].derivative(v) * Rational(2 * n);
  return out;
}

}  // namespace

MomentSet solve_rotation_moments(MomentVariable variable, double eps, int max_order) {
  if (max_order < 2) throw std::invalid_argument("max_order must be >= 2");
  check_rotation_eps(to_rational(eps));
  MomentSet set;
  set.variable = variable;
  set.max_order = max_order;
  set.eps_transform = eps;
  set.polys.reserve(max_order + 1);
  set.polys.push_back(MomentPolynomial::constant(1));
  set.polys.emplace_back();
  for (int n = 2; n <= max_order; ++n) {
    MomentPolynomial second = rotation_rhs(n, variable, eps) * factorial(n);
    second -= lower_order_terms(set.polys, n, variable);
    second *= Rational(Rational(1) / (n * (n - 1)));
    set.polys.push_back(second.antiderivative(variable).antiderivative(variable));
  }
  return set;
}

std::vector<MomentPolynomial> verify_recursion(const MomentSet& set) {
  if (set.polys.size() != static_cast<std::size_t>(set.max_order) + 1) {
    throw std::invalid_argument("moment set has inconsistent size");
  }
  std::vector<MomentPolynomial> residuals;
  for (int n = 2; n <= set.max_order; ++n) {
    MomentPolynomial lhs = lower_order_terms(set.polys, n, set.variable);
    lhs += set.polys[n].derivative(set.variable).derivative(set.variable) * Rational(n * (n - 1));
    lhs *= Rational(1 / factorial(n));
    residuals.push_back(lhs - rotation_rhs(n, set.variable, set.eps_transform));
  }
  return residuals;
}

}  // namespace qbs
