#include "tfw/decay_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfw/errors.hpp"

namespace tfw {

DecayFit decay_fit(std::vector<DecayPoint> const& points, double floor) {
  DecayFit fit;
  fit.floor = floor;
  for (auto const& p : points) {
    if (std::isfinite(p.r) && std::isfinite(p.y) && p.y > floor && p.y > 0.0) fit.points.push_back(p);
  }
  if (fit.points.size() < kMinDecayPoints) {
    throw TooFewPoints("decay_fit: " + std::to_string(fit.points.size()) + " points above the floor, need " +
                       std::to_string(kMinDecayPoints));
  }
  double const count = static_cast<double>(fit.points.size());
  double mr = 0.0;
  double ml = 0.0;
  for (auto const& p : fit.points) {
    mr += p.r;
    ml += std::log(p.y);
  }
  mr /= count;
  ml /= count;
  double srr = 0.0;
  double srl = 0.0;
  double sll = 0.0;
  for (auto const& p : fit.points) {
    double const dr = p.r - mr;
    double const dl = std::log(p.y) - ml;
    srr += dr * dr;
    srl += dr * dl;
    sll += dl * dl;
  }
  // Variance of log y at rounding level counts as none.
  double const log_scale = std::max(1.0, std::abs(ml));
  if (srr <= 0.0 || sll <= count * 1e-26 * log_scale * log_scale) {
    fit.degenerate = true;
    fit.gamma = 0.0;
    fit.c = std::exp(ml);
    fit.r_squared = 0.0;
    return fit;
  }
  double const slope = srl / srr;
  fit.gamma = -slope;
  fit.c = std::exp(ml - slope * mr);
  fit.r_squared = std::clamp(srl * srl / (srr * sll), 0.0, 1.0);
  return fit;
}

}  // namespace tfw
