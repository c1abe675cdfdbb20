#pragma once

// Bounded compass (coordinate pattern) search over per-user phases, shared
// by the relaxed-region grid polish and the multicast primal polish.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

namespace slp::precoders::detail {

struct PhaseSearchResult {
  std::vector<double> phases;
  double value = 0.0;
  int evaluations = 0;
};

// `objective` maps a phase vector to a power, or nullopt when infeasible.
// Moves one coordinate at a time by +-step (clamped to [lower, upper]) and
// accepts strict improvements only; the step halves when no move helps.
template <class Objective>
PhaseSearchResult compass_search(Objective&& objective, std::vector<double> start,
                                 double start_value, std::span<const double> lower,
                                 std::span<const double> upper, double initial_step,
                                 double final_step, int max_evaluations = 20000) {
  PhaseSearchResult out{std::move(start), start_value, 0};
  const std::size_t n = out.phases.size();
  double step = initial_step;
  std::vector<double> cand;
  while (step >= final_step && out.evaluations < max_evaluations) {
    bool improved = false;
    for (std::size_t j = 0; j < n && !improved; ++j) {
      for (const double dir : {1.0, -1.0}) {
        cand = out.phases;
        cand[j] = std::clamp(out.phases[j] + dir * step, lower[j], upper[j]);
        if (cand[j] == out.phases[j]) continue;
        ++out.evaluations;
        const std::optional<double> v = objective(cand);
        if (v && *v < out.value) {
          out.phases = cand;
          out.value = *v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return out;
}

}  // namespace slp::precoders::detail
