#include "fvpopt/space.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

double inner(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw UsageError(fmt::format("inner: dimension mismatch ({} vs {})", x.size(), y.size()));
  }
  return x.dot(y);
}

double norm(const Vector& x) { return std::sqrt(x.dot(x)); }

bool all_finite(const Vector& x) { return x.allFinite(); }

SumSquareTerms expand_sum_square(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw UsageError(
        fmt::format("expand_sum_square: dimension mismatch ({} vs {})", u.size(), v.size()));
  }
  return SumSquareTerms{u.squaredNorm(), v.squaredNorm(), 2.0 * u.dot(v)};
}

namespace {

void check_coefficients(std::size_t n, double b, double c) {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw UsageError(fmt::format("sequence bound: b_{} = {} is outside [0, 1]", n, b));
  }
  if (!(c >= 0.0)) {
    throw UsageError(fmt::format("sequence bound: c_{} = {} is negative", n, c));
  }
}

}  // namespace

SequenceReport simulate_sequence_bound(double a0, const SequenceGenerator& coefficients,
                                       std::size_t horizon, double tol) {
  if (!(a0 >= 0.0)) {
    throw UsageError(fmt::format("sequence bound: a_0 = {} is negative", a0));
  }
  SequenceReport report;
  double a = a0;
  if (a <= tol) report.first_below_tol = 0;
  for (std::size_t n = 0; n < horizon; ++n) {
    const SequenceCoefficients k = coefficients(n);
    check_coefficients(n, k.b, k.c);
    a = std::max(0.0, (1.0 - k.b) * a + k.b * k.h + k.c);
    if (!report.first_below_tol && a <= tol) report.first_below_tol = n + 1;
  }
  report.final_a = a;
  report.steps = horizon;
  report.verdict =
      report.first_below_tol ? SequenceVerdict::consistent : SequenceVerdict::violated;
  return report;
}

SequenceReport check_sequence_bound(std::span<const RealSequenceTerm> terms, double tol, double slack) {
  SequenceReport report;
  if (terms.empty()) return report;
  for (std::size_t n = 0; n < terms.size(); ++n) {
    const RealSequenceTerm& t = terms[n];
    if (!(t.a >= 0.0)) {
      throw UsageError(fmt::format("sequence bound: a_{} = {} is negative", n, t.a));
    }
    check_coefficients(n, t.b, t.c);
    if (!report.first_below_tol && t.a <= tol) report.first_below_tol = n;
    if (n + 1 < terms.size()) {
      const double bound = (1.0 - t.b) * t.a + t.b * t.h + t.c;
      if (terms[n + 1].a > bound + slack) ++report.recursion_violations;
    }
  }
  report.final_a = terms.back().a;
  report.steps = terms.size() - 1;
  report.verdict = (report.recursion_violations == 0 && report.first_below_tol)
                       ? SequenceVerdict::consistent
                       : SequenceVerdict::violated;
  return report;
}

}  // namespace fvpopt
