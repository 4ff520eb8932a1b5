#include "fvpopt/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>
#include <fmt/format.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

namespace {

constexpr std::array<double, 3> kScales{0.1, 1.0, 10.0};
constexpr double kFixedTol = 1e-10;

std::string describe(const Vector& x) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += fmt::format("{}{:.17g}", i ? ", " : "", x[i]);
  return s + "]";
}

std::string describe(const OmegaStar& omega) {
  if (omega.params.empty()) return fmt::format("{}", omega.label);
  return fmt::format("[{}]", fmt::join(omega.params, ", "));
}

void require_witness(const RandomOperator& op, const char* who) {
  if (op.witnesses().empty()) {
    throw UsageError(fmt::format("{}: operator '{}' declares no witness", who, op.name()));
  }
}

void require_same_space(const RandomOperator& base, const RandomOperator& averaged) {
  if (base.dim() != averaged.dim()) {
    throw UsageError("averaged operator and base act on different dimensions");
  }
}

// Tracks the worst sample of a "lhs <= rhs" property.
class WorstCase {
 public:
  explicit WorstCase(std::string name) { report_.property_name = std::move(name); }

  template <typename Describe>
  void add(double violation, Describe&& describe_inputs) {
    ++report_.samples;
    if (violation > report_.worst_violation || report_.samples == 1) {
      report_.worst_violation = violation;
      report_.witness_input = describe_inputs();
    }
  }

  PropertyReport finish() && { return std::move(report_); }

 private:
  PropertyReport report_;
};

std::vector<OmegaStar> panel(const SampleSpace& space, Rng& rng, std::size_t panel_size) {
  if (space.is_finite()) return space.enumerate();
  std::vector<OmegaStar> draws;
  draws.reserve(panel_size);
  for (std::size_t k = 0; k < panel_size; ++k) draws.push_back(space.sample(rng));
  return draws;
}

}  // namespace

PropertyReport check_quasi_nonexpansive(const RandomOperator& op, std::size_t samples, Rng& rng) {
  require_witness(op, "check_quasi_nonexpansive");
  WorstCase worst("quasi_nonexpansive");
  const auto& witnesses = op.witnesses();
  for (std::size_t s = 0; s < samples; ++s) {
    const OmegaStar omega = op.space().sample(rng);
    const Vector x = gaussian_vector(op.dim(), kScales[s % kScales.size()], rng);
    const Vector& z = witnesses[s % witnesses.size()];
    const double violation = norm(op.apply(omega, x) - z) - norm(x - z);
    worst.add(violation, [&] {
      return fmt::format("omega={}, x={}, witness={}", describe(omega), describe(x),
                         s % witnesses.size());
    });
  }
  return std::move(worst).finish();
}

PropertyReport check_averaged_descent(const RandomOperator& op, double eta, std::size_t samples,
                                      Rng& rng) {
  return check_averaged_descent(op, average_relaxed(op, eta).as_random_operator(), eta, samples,
                                rng);
}

PropertyReport check_averaged_descent(const RandomOperator& base, const RandomOperator& averaged,
                                      double eta, std::size_t samples, Rng& rng) {
  require_witness(base, "check_averaged_descent");
  require_same_space(base, averaged);
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw UsageError(fmt::format("check_averaged_descent: eta = {} outside (0, 1]", eta));
  }
  WorstCase worst("averaged_descent");
  const auto& witnesses = base.witnesses();
  for (std::size_t s = 0; s < samples; ++s) {
    const OmegaStar omega = base.space().sample(rng);
    const Vector x = gaussian_vector(base.dim(), kScales[s % kScales.size()], rng);
    const Vector& z = witnesses[s % witnesses.size()];
    const Vector tx = base.apply(omega, x);
    const Vector that_x = averaged.apply(omega, x);
    const double lhs = 0.5 * eta * (x - tx).squaredNorm();
    const double rhs = inner(x - that_x, x - z);
    const double violation = lhs - rhs;
    worst.add(violation, [&] {
      return fmt::format("omega={}, x={}, witness={}, lhs={:.17g}, rhs={:.17g}", describe(omega),
                         describe(x), s % witnesses.size(), lhs, rhs);
    });
  }
  return std::move(worst).finish();
}

PropertyReport check_averaged_quasi_nonexpansive(const RandomOperator& op, double eta,
                                                 std::size_t samples, Rng& rng) {
  return check_averaged_quasi_nonexpansive(average_relaxed(op, eta).as_random_operator(), samples,
                                           rng);
}

PropertyReport check_averaged_quasi_nonexpansive(const RandomOperator& averaged,
                                                 std::size_t samples, Rng& rng) {
  PropertyReport report = check_quasi_nonexpansive(averaged, samples, rng);
  report.property_name = "averaged_quasi_nonexpansive";
  return report;
}

PropertyReport check_fixed_set_agreement(const RandomOperator& op, double eta,
                                         const std::vector<Vector>& candidates, Rng& rng,
                                         std::size_t panel_size) {
  return check_fixed_set_agreement(op, average_relaxed(op, eta).as_random_operator(), candidates,
                                   rng, panel_size);
}

PropertyReport check_fixed_set_agreement(const RandomOperator& base, const RandomOperator& averaged,
                                         const std::vector<Vector>& candidates, Rng& rng,
                                         std::size_t panel_size) {
  if (candidates.empty()) throw UsageError("check_fixed_set_agreement: no candidates");
  require_same_space(base, averaged);
  const std::vector<OmegaStar> omegas = panel(base.space(), rng, panel_size);

  WorstCase worst("fixed_set_agreement");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Vector& c = candidates[k];
    double moved_t = 0.0;
    double moved_that = 0.0;
    for (const OmegaStar& omega : omegas) {
      moved_t = std::max(moved_t, norm(base.apply(omega, c) - c));
      moved_that = std::max(moved_that, norm(averaged.apply(omega, c) - c));
    }
    const bool fixed_t = moved_t <= kFixedTol;
    const bool fixed_that = moved_that <= kFixedTol;
    const double violation = fixed_t == fixed_that ? 0.0 : std::max(moved_t, moved_that);
    worst.add(violation, [&] {
      return fmt::format("candidate {}={}, moved_by_T={:.3e}, moved_by_T_hat={:.3e}", k,
                         describe(c), moved_t, moved_that);
    });
  }
  return std::move(worst).finish();
}

MsConsistencyReport check_as_implies_ms(const std::vector<std::vector<double>>& run_errors,
                                        double bound) {
  if (run_errors.empty()) throw UsageError("check_as_implies_ms: no realizations");
  const std::size_t length = run_errors.front().size();
  if (length == 0) throw UsageError("check_as_implies_ms: empty error sequences");

  MsConsistencyReport report;
  for (std::size_t r = 0; r < run_errors.size(); ++r) {
    if (run_errors[r].size() != length) {
      throw UsageError(fmt::format(
          "check_as_implies_ms: realization {} has {} entries, expected {}", r,
          run_errors[r].size(), length));
    }
    for (double e : run_errors[r]) {
      if (!std::isfinite(e) || e < 0.0 || e > bound) {
        report.verdict = MsVerdict::rejected_input;
        report.message =
            fmt::format("realization {} violates the boundedness premise (entry {})", r, e);
        return report;
      }
    }
  }

  const double count = static_cast<double>(run_errors.size());
  report.mse.assign(length, 0.0);
  report.mean_tail_sup.assign(length, 0.0);
  for (const auto& errors : run_errors) {
    double tail_sup = 0.0;
    for (std::size_t k = length; k-- > 0;) {
      tail_sup = std::max(tail_sup, errors[k]);
      report.mse[k] += errors[k] * errors[k] / count;
      report.mean_tail_sup[k] += tail_sup * tail_sup / count;
    }
  }

  for (std::size_t k = 0; k < length; ++k) {
    // Entrywise e_n^2 <= (sup_{m>=n} e_m)^2; the means inherit it up to rounding.
    if (report.mse[k] > report.mean_tail_sup[k] * (1.0 + 1e-12)) {
      report.verdict = MsVerdict::fail;
      report.message = fmt::format("MSE exceeds the mean squared tail supremum at index {}", k);
      return report;
    }
  }
  const double first = report.mse.front();
  const double last = report.mse.back();
  if (last == 0.0 || last < first) {
    report.verdict = MsVerdict::pass;
    report.message = fmt::format("MSE {:.3e} -> {:.3e}", first, last);
  } else {
    report.verdict = MsVerdict::fail;
    report.message = fmt::format("MSE does not decrease ({:.3e} -> {:.3e})", first, last);
  }
  return report;
}

}  // namespace fvpopt
