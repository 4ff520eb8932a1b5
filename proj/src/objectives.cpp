#include "fvpopt/objectives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

ObjectiveSpec::ObjectiveSpec(std::string name, std::size_t dim, ValueFn value,
                             GradientFn gradient, double rho, double lipschitz_k,
                             std::optional<Vector> unconstrained_minimizer)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      rho_(rho),
      lipschitz_k_(lipschitz_k),
      minimizer_(std::move(unconstrained_minimizer)) {
  if (dim_ == 0) throw UsageError(fmt::format("objective '{}': dimension must be positive", name_));
  if (!value_ || !gradient_) {
    throw UsageError(fmt::format("objective '{}': value and gradient are required", name_));
  }
  if (!(rho_ > 0.0) || !(lipschitz_k_ >= rho_) || !std::isfinite(lipschitz_k_)) {
    throw UsageError(fmt::format("objective '{}': need 0 < rho <= K, got rho = {}, K = {}", name_,
                                 rho_, lipschitz_k_));
  }
}

void ObjectiveSpec::check_dim(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw UsageError(
        fmt::format("objective '{}': point of dimension {} in R^{}", name_, x.size(), dim_));
  }
}

double ObjectiveSpec::value(const Vector& x) const {
  check_dim(x);
  return value_(x);
}

Vector ObjectiveSpec::gradient(const Vector& x) const {
  check_dim(x);
  return gradient_(x);
}

ObjectiveSpec ObjectiveSpec::with_constants(double rho, double lipschitz_k) const {
  return ObjectiveSpec(name_, dim_, value_, gradient_, rho, lipschitz_k, minimizer_);
}

ObjectiveSpec make_quadratic(const Matrix& q, const Vector& b) {
  if (q.rows() == 0 || q.rows() != q.cols()) {
    throw UsageError(fmt::format("make_quadratic: Q must be square, got {}x{}", q.rows(), q.cols()));
  }
  if (b.size() != q.rows()) {
    throw UsageError(
        fmt::format("make_quadratic: b has dimension {}, Q is {}x{}", b.size(), q.rows(), q.cols()));
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw UsageError("make_quadratic: Q is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  if (eig.info() != Eigen::Success) throw UsageError("make_quadratic: eigensolver failed");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) {
    throw UsageError(fmt::format("make_quadratic: Q is not positive definite (lambda_min = {})", lo));
  }

  Vector minimizer = q.ldlt().solve(b);
  return ObjectiveSpec(
      "quadratic", static_cast<std::size_t>(q.rows()),
      [q, b](const Vector& x) { return 0.5 * x.dot(q * x) - b.dot(x); },
      [q, b](const Vector& x) -> Vector { return q * x - b; }, lo, hi, std::move(minimizer));
}

ObjectiveSpec make_squared_distance(const Vector& target) {
  if (target.size() == 0) throw UsageError("make_squared_distance: empty target");
  return ObjectiveSpec(
      "squared_distance", static_cast<std::size_t>(target.size()),
      [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); },
      [target](const Vector& x) -> Vector { return x - target; }, 1.0, 1.0, target);
}

ObjectiveSpec make_separable_sum(const std::vector<ObjectiveSpec>& locals) {
  if (locals.empty()) throw UsageError("make_separable_sum: no local objectives");
  const std::size_t d = locals.front().dim();
  double rho = std::numeric_limits<double>::infinity();
  double k = 0.0;
  bool have_minimizers = true;
  for (const ObjectiveSpec& f : locals) {
    if (f.dim() != d) {
      throw UsageError(fmt::format("make_separable_sum: local dimensions differ ({} vs {})", d,
                                   f.dim()));
    }
    rho = std::min(rho, f.rho());
    k = std::max(k, f.lipschitz_k());
    have_minimizers = have_minimizers && f.unconstrained_minimizer().has_value();
  }
  const auto di = static_cast<Eigen::Index>(d);
  const auto m = static_cast<Eigen::Index>(locals.size());

  std::optional<Vector> minimizer;
  if (have_minimizers) {
    Vector stacked(m * di);
    for (Eigen::Index i = 0; i < m; ++i) {
      stacked.segment(i * di, di) = *locals[static_cast<std::size_t>(i)].unconstrained_minimizer();
    }
    minimizer = std::move(stacked);
  }

  return ObjectiveSpec(
      fmt::format("separable_sum({})", locals.size()), d * locals.size(),
      [locals, di](const Vector& x) {
        double total = 0.0;
        for (std::size_t i = 0; i < locals.size(); ++i) {
          total += locals[i].value(x.segment(static_cast<Eigen::Index>(i) * di, di));
        }
        return total;
      },
      [locals, di](const Vector& x) -> Vector {
        Vector g(x.size());
        for (std::size_t i = 0; i < locals.size(); ++i) {
          const auto offset = static_cast<Eigen::Index>(i) * di;
          g.segment(offset, di) = locals[i].gradient(x.segment(offset, di));
        }
        return g;
      },
      rho, k, std::move(minimizer));
}

double check_gradient(const ObjectiveSpec& spec, const Vector& x, double h) {
  if (!(h > 0.0)) throw UsageError(fmt::format("check_gradient: step h = {} must be positive", h));
  const Vector g = spec.gradient(x);
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = spec.value(probe);
    probe[i] = x[i] - h;
    const double down = spec.value(probe);
    probe[i] = x[i];
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
  }
  return worst;
}

ConstantEstimate estimate_constants(const ObjectiveSpec& spec, std::size_t samples, Rng& rng) {
  if (samples < 2) throw UsageError("estimate_constants: need at least 2 samples");
  constexpr std::array<double, 3> kScales{0.1, 1.0, 10.0};
  ConstantEstimate est;
  est.rho_hat = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const double scale = kScales[s % kScales.size()];
    const Vector x = gaussian_vector(spec.dim(), scale, rng);
    const Vector y = gaussian_vector(spec.dim(), scale, rng);
    const Vector dx = x - y;
    const double dx_sq = dx.squaredNorm();
    if (dx_sq == 0.0) continue;
    const Vector dg = spec.gradient(x) - spec.gradient(y);
    est.rho_hat = std::min(est.rho_hat, dx.dot(dg) / dx_sq);
    est.k_hat = std::max(est.k_hat, norm(dg) / std::sqrt(dx_sq));
    ++est.pairs_used;
  }
  if (est.pairs_used == 0) throw SamplingError("estimate_constants: every sampled pair coincided");
  return est;
}

void validate_constants(const ObjectiveSpec& spec, const ConstantEstimate& estimate, double tol) {
  if (estimate.rho_hat < spec.rho() - tol) {
    throw ConfigError(fmt::format(
        "objective '{}': declared rho = {} exceeds the observed monotonicity {} (strong "
        "convexity modulus overstated)",
        spec.name(), spec.rho(), estimate.rho_hat));
  }
  if (estimate.k_hat > spec.lipschitz_k() + tol) {
    throw ConfigError(fmt::format(
        "objective '{}': observed gradient Lipschitz ratio {} exceeds declared K = {}",
        spec.name(), estimate.k_hat, spec.lipschitz_k()));
  }
}

}  // namespace fvpopt
