#include "fvpopt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <variant>

#include <fmt/core.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

bool EnsembleRun::diverged() const {
  return std::any_of(failures.begin(), failures.end(),
                     [](const RealizationFailure& f) { return f.divergence; });
}

EnsembleRun run_ensemble(const ObjectiveSpec& objective, const RandomOperator& op,
                         const AlgorithmConfig& config, const std::optional<Vector>& oracle,
                         std::size_t realizations, std::uint64_t base_seed, std::size_t threads) {
  if (realizations == 0) throw UsageError("run_ensemble: need at least one realization");
  // Configuration problems are shared by every realization; report them once.
  validate_config(config, objective);

  using Outcome = std::variant<RunRecord, RealizationFailure>;
  std::vector<Outcome> outcomes(realizations);

  auto run_one = [&](std::size_t r) {
    AlgorithmConfig local = config;
    local.seed = derive_seed(base_seed, r);
    try {
      RunRecord record = run(objective, op, local, oracle);
      record.realization_id = r;
      outcomes[r] = std::move(record);
    } catch (const DivergenceError& e) {
      outcomes[r] = RealizationFailure{r, true, e.step(), e.what()};
    } catch (const Error& e) {
      outcomes[r] = RealizationFailure{r, false, std::nullopt, e.what()};
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, realizations);
  if (threads == 1) {
    for (std::size_t r = 0; r < realizations; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < realizations; r = next++) run_one(r);
      });
    }
  }

  EnsembleRun result;
  for (Outcome& o : outcomes) {
    if (auto* rec = std::get_if<RunRecord>(&o)) {
      result.records.push_back(std::move(*rec));
    } else {
      result.failures.push_back(std::move(std::get<RealizationFailure>(o)));
    }
  }
  return result;
}

namespace {

double curve_value(const std::vector<CurvePoint>& curve, std::size_t n, const char* which) {
  const auto it = std::find_if(curve.begin(), curve.end(),
                               [n](const CurvePoint& p) { return p.n == n; });
  if (it == curve.end()) {
    throw UsageError(fmt::format("{}: index {} is not on the recording grid", which, n));
  }
  return it->value;
}

}  // namespace

double EnsembleSummary::mse_at(std::size_t n) const { return curve_value(mse_curve, n, "mse_at"); }

double EnsembleSummary::as_proxy_at(std::size_t n) const {
  return curve_value(as_proxy_curve, n, "as_proxy_at");
}

EnsembleSummary summarize(std::span<const RunRecord> records, double tol) {
  if (records.empty()) throw UsageError("summarize: no records");
  const std::vector<std::size_t>& grid = records.front().recorded_indices;
  for (const RunRecord& r : records) {
    if (r.recorded_indices != grid) {
      throw UsageError(fmt::format("summarize: realization {} uses a different recording grid",
                                   r.realization_id));
    }
    if (r.errors.size() != grid.size()) {
      throw UsageError(fmt::format("summarize: realization {} has no oracle errors",
                                   r.realization_id));
    }
  }

  const std::size_t length = grid.size();
  const double count = static_cast<double>(records.size());
  std::vector<double> mse(length, 0.0);
  std::vector<std::size_t> within(length, 0);
  for (const RunRecord& r : records) {
    double tail_max = 0.0;
    for (std::size_t k = length; k-- > 0;) {
      tail_max = std::max(tail_max, r.errors[k]);
      mse[k] += r.errors[k] * r.errors[k];
      if (tail_max <= tol) ++within[k];
    }
  }

  EnsembleSummary summary;
  summary.realizations = records.size();
  summary.tol = tol;
  summary.mse_curve.reserve(length);
  summary.as_proxy_curve.reserve(length);
  for (std::size_t k = 0; k < length; ++k) {
    summary.mse_curve.push_back({grid[k], mse[k] / count});
    summary.as_proxy_curve.push_back({grid[k], static_cast<double>(within[k]) / count});
  }
  return summary;
}

}  // namespace fvpopt
