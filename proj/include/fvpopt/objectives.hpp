#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

/// A differentiable objective with declared strong-convexity modulus rho and
/// gradient Lipschitz constant K. The constants are declared by construction;
/// estimate_constants() exists only to cross-check them.
class ObjectiveSpec {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  /// Throws UsageError unless 0 < rho <= lipschitz_k and dim > 0.
  ObjectiveSpec(std::string name, std::size_t dim, ValueFn value, GradientFn gradient,
                double rho, double lipschitz_k,
                std::optional<Vector> unconstrained_minimizer = std::nullopt);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  double rho() const { return rho_; }
  double lipschitz_k() const { return lipschitz_k_; }
  const std::optional<Vector>& unconstrained_minimizer() const { return minimizer_; }

  /// Copy with different declared constants. Used to exercise validation.
  ObjectiveSpec with_constants(double rho, double lipschitz_k) const;

 private:
  void check_dim(const Vector& x) const;

  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
  double rho_;
  double lipschitz_k_;
  std::optional<Vector> minimizer_;
};

/// f(x) = 1/2 <x, Qx> - <b, x>, grad f = Qx - b, rho = lambda_min(Q),
/// K = lambda_max(Q). Throws UsageError if Q is not symmetric positive definite.
ObjectiveSpec make_quadratic(const Matrix& q, const Vector& b);

/// f(x) = 1/2 ||x - target||^2, rho = K = 1.
ObjectiveSpec make_squared_distance(const Vector& target);

/// f(x) = sum_i f_i(x_i) on the stacked space R^{m*d}; rho = min rho_i, K = max K_i.
ObjectiveSpec make_separable_sum(const std::vector<ObjectiveSpec>& locals);

/// Max over coordinates of |fd_i - grad_i| / max(1, |grad_i|) with central
/// differences of step h.
double check_gradient(const ObjectiveSpec& spec, const Vector& x, double h);

struct ConstantEstimate {
  double rho_hat = 0.0;
  double k_hat = 0.0;
  std::size_t pairs_used = 0;
};

/// Empirical rho and K from `samples` random pairs (standard normal points,
/// scaled by 0.1, 1 and 10 in rotation). Coincident pairs are skipped;
/// throws SamplingError if every pair coincides, UsageError for samples < 2.
ConstantEstimate estimate_constants(const ObjectiveSpec& spec, std::size_t samples, Rng& rng);

/// Throws ConfigError if rho_hat < rho - tol or k_hat > K + tol.
void validate_constants(const ObjectiveSpec& spec, const ConstantEstimate& estimate,
                        double tol = 1e-9);

}  // namespace fvpopt
