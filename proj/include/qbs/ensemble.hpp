#pragma once

#include <cstdint>
#include <vector>

#include "qbs/config.hpp"

namespace qbs {

struct PathState {
  double x = 0.0;
  double spread = 0.0;  // unused by the 1-D model

  friend bool operator==(const PathState&, const PathState&) = default;
};

/// N simulated paths plus the proportional returns r_k = (x_k - x_{k-1}) / x_{k-1}
/// recorded after every completed step (`returns[k-1]` holds step k).
struct ParticleEnsemble {
  std::vector<PathState> states;
  std::vector<std::vector<double>> returns;
  std::int64_t step_index = 0;

  std::size_t size() const noexcept { return states.size(); }

  static ParticleEnsemble at_start(const ModelConfig& config);

  friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;
};

/// Per-step engine diagnostics. Returns for the step live in the ensemble.
struct StepRecord {
  std::int64_t step_index = 0;
  std::vector<double> factors;
  bool bootstrap = false;  // factor fixed at 1 (first step or classical limit)

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

}  // namespace qbs
