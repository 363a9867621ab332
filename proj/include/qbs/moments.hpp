#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qbs {

using Rational = mpq_class;

/// Exact value of a binary double as a rational (no rounding).
Rational to_rational(double value);

enum class MomentVariable { X, Spread };

const char* to_string(MomentVariable v) noexcept;

/// Bivariate polynomial in (x, spread) with exact rational coefficients.
/// Terms are keyed by (power of x, power of spread); zero coefficients are never stored.
class MomentPolynomial {
public:
  using Exponents = std::pair<int, int>;

  MomentPolynomial() = default;
  static MomentPolynomial constant(const Rational& c);
  static MomentPolynomial monomial(const Rational& c, int x_power, int spread_power);

  const std::map<Exponents, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int total_degree() const noexcept;
  Rational coefficient(int x_power, int spread_power) const;
  void set_coefficient(int x_power, int spread_power, const Rational& c);

  MomentPolynomial& operator+=(const MomentPolynomial& rhs);
  MomentPolynomial& operator-=(const MomentPolynomial& rhs);
  MomentPolynomial& operator*=(const Rational& s);
  friend MomentPolynomial operator+(MomentPolynomial a, const MomentPolynomial& b) { return a += b; }
  friend MomentPolynomial operator-(MomentPolynomial a, const MomentPolynomial& b) { return a -= b; }
  friend MomentPolynomial operator*(MomentPolynomial a, const Rational& s) { return a *= s; }
  friend MomentPolynomial operator*(const MomentPolynomial& a, const MomentPolynomial& b);
  friend bool operator==(const MomentPolynomial& a, const MomentPolynomial& b) {
    return a.terms_ == b.terms_;
  }

  MomentPolynomial pow(int n) const;
  MomentPolynomial derivative(MomentVariable v) const;
  /// Antiderivative with zero integration constant.
  MomentPolynomial antiderivative(MomentVariable v) const;

  double evaluate(double x, double spread) const;

  /// Canonical text, e.g. "1/8 * x^2 + -3 * x^1 * e^2"; "0" for the zero polynomial.
  std::string to_string() const;

private:
  std::map<Exponents, Rational> terms_;
};

/// Double-precision copy of a MomentPolynomial for hot-loop evaluation.
class FastPolynomial {
public:
  FastPolynomial() = default;
  explicit FastPolynomial(const MomentPolynomial& p);
  double operator()(double x, double spread) const noexcept;

private:
  struct Term {
    double c;
    int i;
    int j;
  };
  std::vector<Term> terms_;
};

/// Moments a^n(x, spread), n = 0..max_order, for one state variable of the rotation model.
struct MomentSet {
  MomentVariable variable = MomentVariable::X;
  int max_order = 2;
  std::vector<MomentPolynomial> polys;
  double eps_transform = 0.0;
};

/// Translation-model blur moment H_i = 2 (-eps)^i / ((i+1)(i+2)).
double translation_moment(int i, double eps);
Rational translation_moment_exact(int i, const Rational& eps);

/// Right-hand side of the order-n rotation moment equation, expanded exactly:
///   X:      ((eps^2/2) x - eps e)^(n-2) / (n (n-1) (1 - eps^2/2)^(n-1))
///   Spread: ((eps^2/2) e + eps x)^(n-2) / (n (n-1) (1 - eps^2/2)^(n-1))
/// Throws std::domain_error for n < 2 or eps^2 >= 2.
MomentPolynomial rotation_rhs(int n, MomentVariable variable, double eps);

/// Solves [(-1)^n a^{n-2} + 2n d/dv a^{n-1} + n(n-1) d2/dv2 a^n] / n! = rotation_rhs(n)
/// for n = 2..max_order with a^0 = 1 and a^1 = 0, taking both integration
/// constants of each double antiderivative as zero.
MomentSet solve_rotation_moments(MomentVariable variable, double eps, int max_order = 4);

/// Exact residual LHS(n) - RHS(n) for n = 2..max_order (index 0 is order 2).
std::vector<MomentPolynomial> verify_recursion(const MomentSet& set);

}  // namespace qbs
