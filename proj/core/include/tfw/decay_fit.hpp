#pragma once

// Log-linear regression log y = log C - gamma r for exponential decay curves.

#include <vector>

namespace tfw {

struct DecayPoint {
  double r = 0.0;
  double y = 0.0;
};

struct DecayFit {
  /// Points actually used (y > floor), in input order.
  std::vector<DecayPoint> points;
  double floor = 1e-12;
  double c = 0.0;
  double gamma = 0.0;
  double r_squared = 0.0;
  /// Set when log y has no variance (or r has none); gamma = 0 and r_squared = 0 then.
  bool degenerate = false;
};

inline constexpr std::size_t kMinDecayPoints = 5;

/// Least-squares fit in (r, log y). Throws TooFewPoints if fewer than five
/// finite points lie above the floor.
DecayFit decay_fit(std::vector<DecayPoint> const& points, double floor = 1e-12);

}  // namespace tfw
