#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include <Eigen/Core>

namespace fvpopt {

/// A point of R^d with the dot product. Every algorithm in the library works
/// on this finite-dimensional stand-in for a real Hilbert space.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dot product. Throws UsageError on dimension mismatch.
double inner(const Vector& x, const Vector& y);

double norm(const Vector& x);

bool all_finite(const Vector& x);

/// The three terms of ||u+v||^2 = ||u||^2 + ||v||^2 + 2<u,v>.
struct SumSquareTerms {
  double u_squared = 0.0;
  double v_squared = 0.0;
  double cross = 0.0;  ///< 2<u,v>

  double total() const { return u_squared + v_squared + cross; }
};

SumSquareTerms expand_sum_square(const Vector& u, const Vector& v);

// ---------------------------------------------------------------------------
// Numeric-sequence oracle for recursions of the form
//
//   a_{n+1} <= (1 - b_n) a_n + b_n h_n + c_n,
//
// with a_n >= 0, b_n in [0,1], sum b_n = inf, limsup h_n <= 0, sum c_n < inf,
// under which a_n -> 0. The checker is a falsifier for finite horizons; a
// "consistent" verdict is never a convergence certificate.
// ---------------------------------------------------------------------------

/// One term (a_n, b_n, h_n, c_n) of an externally produced sequence.
struct RealSequenceTerm {
  double a = 0.0;
  double b = 0.0;
  double h = 0.0;
  double c = 0.0;
};

/// Coefficients (b_n, h_n, c_n) for the generative form of the recursion.
struct SequenceCoefficients {
  double b = 0.0;
  double h = 0.0;
  double c = 0.0;
};

using SequenceGenerator = std::function<SequenceCoefficients(std::size_t n)>;

enum class SequenceVerdict { consistent, violated };

struct SequenceReport {
  SequenceVerdict verdict = SequenceVerdict::violated;
  double final_a = 0.0;
  /// First index at which a_n <= tol, if reached within the horizon.
  std::optional<std::size_t> first_below_tol;
  /// Number of indices where the supplied a_{n+1} exceeded the recursion bound.
  std::size_t recursion_violations = 0;
  std::size_t steps = 0;
};

/// Runs a_{n+1} = max(0, (1-b_n) a_n + b_n h_n + c_n) for `horizon` steps.
/// Verdict is consistent iff a_n drops to `tol` or below within the horizon.
/// Throws UsageError for a0 < 0, c_n < 0 or b_n outside [0,1].
SequenceReport simulate_sequence_bound(double a0, const SequenceGenerator& coefficients,
                                       std::size_t horizon, double tol);

/// Checks an externally produced sequence termwise against the recursion bound
/// (with additive `slack`) and reports whether a_n drops to `tol` or below.
/// Verdict is consistent iff no termwise violation occurred and the tolerance
/// was reached.
SequenceReport check_sequence_bound(std::span<const RealSequenceTerm> terms, double tol,
                                    double slack = 1e-12);

}  // namespace fvpopt
