#pragma once

#include <optional>

#include "violin/bandit.hpp"

namespace violin {

// (eps, 6 sqrt(zeta_3rd eps)) when zeta_3rd > 0 (requires eps <= min(1, zeta_3rd/16));
// (eps, -1/2) for families with zeta_3rd = 0.
StationaryThresholds paired_thresholds(const SmoothnessConstants& s, double eps);

struct LocalMaxSet {
  enum class Status { Found, Empty, Analytic } status = Status::Empty;
  std::vector<Vec> members;
  double worst_value = 0.0;
};

LocalMaxSet find_local_max_set(const ModelParams& env, const StationaryThresholds& th, std::size_t budget,
                               std::uint64_t seed);

struct LocalRegretSeries {
  double signed_sum = 0.0;
  double clipped_sum = 0.0;
  Vec prefix;
};

class EmptyLocalMaxSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnsupportedFamily : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LocalRegretSeries local_regret(const RunLedger& ledger, const LocalMaxSet& set);
LocalRegretSeries local_regret(const RunLedger& ledger, double worst_value);

// Analytic maximizer of eta(env, .) for families where it is known.
std::optional<Vec> optimal_action(const ModelParams& env);
// Cumulative gap to the analytic optimum; prefix series in `prefix`.
double standard_regret(const RunLedger& ledger, const ModelParams& env, Vec* prefix = nullptr);

}  // namespace violin
