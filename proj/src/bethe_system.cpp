#include "qcd/bethe_system.hpp"

#include <cmath>
#include <limits>

#include "qcd/error.hpp"

namespace qcd {

namespace {

Complex eval_side(const std::vector<Term>& side, std::span<const Complex> x) {
  Complex total = 0.0;
  for (const auto& term : side) {
    Complex p = term.coeff;
    for (const auto& f : term.factors) p *= f.eval(x);
    total += p;
  }
  return total;
}

// Adds sign * d(side)/dx into row `row` of the Jacobian. Prefix and suffix
// products avoid dividing by factors that may vanish.
void accumulate_side(const std::vector<Term>& side, std::span<const Complex> x, double sign,
                     std::size_t row, CMatrix& jac) {
  std::vector<Complex> values, prefix, suffix;
  for (const auto& term : side) {
    const std::size_t m = term.factors.size();
    values.resize(m);
    prefix.assign(m + 1, 1.0);
    suffix.assign(m + 1, 1.0);
    for (std::size_t f = 0; f < m; ++f) values[f] = term.factors[f].eval(x);
    for (std::size_t f = 0; f < m; ++f) prefix[f + 1] = prefix[f] * values[f];
    for (std::size_t f = m; f-- > 0;) suffix[f] = suffix[f + 1] * values[f];
    for (std::size_t f = 0; f < m; ++f) {
      const Complex others = sign * term.coeff * prefix[f] * suffix[f + 1];
      const auto& lf = term.factors[f];
      if (lf.a >= 0) jac(row, static_cast<std::size_t>(lf.a)) += lf.alpha * others;
      if (lf.b >= 0) jac(row, static_cast<std::size_t>(lf.b)) += lf.beta * others;
    }
  }
}

}  // namespace

BetheSystem::BetheSystem(std::size_t unknowns, std::vector<Equation> equations,
                         std::vector<LocusPair> locus)
    : unknowns_(unknowns), equations_(std::move(equations)), locus_(std::move(locus)) {}

SystemValue BetheSystem::evaluate(std::span<const Complex> x) const {
  if (x.size() != unknowns_) throw Error(ErrorCode::dimension, "Bethe system: wrong number of unknowns");
  SystemValue out;
  out.difference.reserve(equations_.size());
  out.normalized.reserve(equations_.size());
  for (const auto& eq : equations_) {
    const Complex l = eval_side(eq.lhs, x), r = eval_side(eq.rhs, x);
    const Complex d = l - r;
    const Complex f = d / (1.0 + std::abs(l) + std::abs(r));
    out.difference.push_back(d);
    out.normalized.push_back(f);
    out.max_normalized = std::max(out.max_normalized, std::abs(f));
  }
  return out;
}

CMatrix BetheSystem::jacobian(std::span<const Complex> x) const {
  if (x.size() != unknowns_) throw Error(ErrorCode::dimension, "Bethe system: wrong number of unknowns");
  CMatrix jac(equations_.size(), unknowns_);
  for (std::size_t e = 0; e < equations_.size(); ++e) {
    accumulate_side(equations_[e].lhs, x, 1.0, e, jac);
    accumulate_side(equations_[e].rhs, x, -1.0, e, jac);
  }
  return jac;
}

double BetheSystem::locus_distance(std::span<const Complex> x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : locus_) {
    const Complex a = x[static_cast<std::size_t>(p.i)] * p.shift;
    const Complex b = p.j < 0 ? p.fixed : x[static_cast<std::size_t>(p.j)];
    // |sinh(x)| with exp(2x) = a / b.
    const double d = std::abs(a - b) / (2.0 * std::sqrt(std::abs(a) * std::abs(b)));
    best = std::min(best, d);
  }
  return best;
}

std::vector<Complex> exponentiate_roots(const std::vector<std::vector<Complex>>& levels) {
  std::vector<Complex> x;
  for (const auto& level : levels)
    for (const auto& mu : level) x.push_back(std::exp(2.0 * mu));
  return x;
}

std::vector<std::vector<Complex>> roots_from_exponentiated(std::span<const Complex> x,
                                                           std::span<const int> occupations) {
  std::vector<std::vector<Complex>> levels;
  std::size_t k = 0;
  for (int nb : occupations) {
    std::vector<Complex> level;
    for (int g = 0; g < nb; ++g) {
      if (k >= x.size()) throw Error(ErrorCode::dimension, "too few exponentiated roots");
      if (x[k] == Complex{}) throw Error(ErrorCode::undefined_roots, "exponentiated root is zero");
      level.push_back(0.5 * std::log(x[k++]));
    }
    levels.push_back(std::move(level));
  }
  if (k != x.size()) throw Error(ErrorCode::dimension, "too many exponentiated roots");
  return levels;
}

}  // namespace qcd
