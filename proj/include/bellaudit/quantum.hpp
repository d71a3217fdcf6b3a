#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bellaudit/core.hpp"

namespace bellaudit {

// ---------------------------------------------------------------------------
// Detection model
// ---------------------------------------------------------------------------

/// Detector efficiencies eta1, eta2, joint collimator pass probability f,
/// and the pair-correlation magnitude F. All live in [0, 1]; F <= 1 keeps
/// every joint probability nonnegative.
struct DetectorParams {
  double eta1 = 1.0;
  double eta2 = 1.0;
  double f = 1.0;
  double F = 1.0;

  DetectorParams() = default;
  DetectorParams(double eta1_, double eta2_, double f_, double F_)
      : eta1(eta1_), eta2(eta2_), f(f_), F(F_) {
    for (double v : {eta1, eta2, f, F}) {
      if (!(v >= 0.0) || !(v <= 1.0)) {
        throw std::invalid_argument("DetectorParams: values must be in [0, 1]");
      }
    }
  }
};

/// Joint outcome distribution over {+, -, none}^2 for one polarizer
/// difference. Entries are nonnegative and sum to 1; the double-detection
/// mass is eta1*eta2*f for every difference angle, so the total coincidence
/// measure is direction-independent by construction.
class OutcomeTable {
 public:
  static OutcomeTable from_probabilities(
      const std::array<std::array<double, 3>, 3>& p, Angle delta) {
    double sum = 0.0;
    for (const auto& row : p) {
      for (double v : row) {
        if (!(v >= 0.0)) {
          throw std::invalid_argument("OutcomeTable: negative entry");
        }
        sum += v;
      }
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("OutcomeTable: entries must sum to 1");
    }
    OutcomeTable t;
    t.p_ = p;
    t.delta_ = delta;
    return t;
  }

  double prob(Outcome o1, Outcome o2) const {
    return p_[static_cast<std::size_t>(o1)][static_cast<std::size_t>(o2)];
  }

  /// Total double-detection probability (both photons registered).
  double coincidence_mass() const {
    return p_[0][0] + p_[0][1] + p_[1][0] + p_[1][1];
  }

  Angle setting_difference() const { return delta_; }

 private:
  OutcomeTable() = default;
  std::array<std::array<double, 3>, 3> p_{};
  Angle delta_;
};

/// Quantum outcome distribution for one setting pair: the photon pair passes
/// collimation with probability f; each transmitted photon is then detected
/// independently with its detector efficiency; conditional on a double
/// detection the signed results follow (1/4)[1 + r q F cos 2 delta].
inline OutcomeTable outcome_table(const DetectorParams& dp, Angle delta) {
  const double c2 = std::cos(2.0 * delta.radians());
  const double coincidence = dp.eta1 * dp.eta2 * dp.f;
  std::array<std::array<double, 3>, 3> p{};
  for (int r : {+1, -1}) {
    for (int q : {+1, -1}) {
      const double value = 0.25 * coincidence * (1.0 + r * q * dp.F * c2);
      p[static_cast<std::size_t>(outcome_for(r))]
       [static_cast<std::size_t>(outcome_for(q))] = value;
    }
  }
  const auto kNone = static_cast<std::size_t>(Outcome::NoDetect);
  for (int r : {+1, -1}) {
    p[static_cast<std::size_t>(outcome_for(r))][kNone] =
        0.5 * dp.f * dp.eta1 * (1.0 - dp.eta2);
    p[kNone][static_cast<std::size_t>(outcome_for(r))] =
        0.5 * dp.f * dp.eta2 * (1.0 - dp.eta1);
  }
  p[kNone][kNone] = (1.0 - dp.f) + dp.f * (1.0 - dp.eta1) * (1.0 - dp.eta2);
  return OutcomeTable::from_probabilities(p, delta);
}

// ---------------------------------------------------------------------------
// Predicted functional values
// ---------------------------------------------------------------------------

/// Experimental extended combination predicted by the detection model:
/// assembles the six signed joint probabilities over the configuration's
/// difference angles (the two same-direction terms use a zero difference).
inline double extended_ch_qm(const DetectorParams& dp, const AngleConfig& cfg,
                             OutcomeSelector sel = {}) {
  double total = 0.0;
  for (const auto& term : extended_ch_terms()) {
    const double delta = cfg.direction(term.pair.s1).radians() -
                         cfg.direction(term.pair.s2).radians();
    const OutcomeTable table = outcome_table(dp, Angle(delta));
    const Outcome o1 = outcome_for(term.first_uses_r ? sel.r() : sel.q());
    const Outcome o2 = outcome_for(term.second_uses_r ? sel.r() : sel.q());
    total += term.sign * table.prob(o1, o2);
  }
  return total;
}

/// Closed form of extended_ch_qm on the one-parameter configuration with
/// r = q = +1:
///   (1/4) eta1 eta2 f F (3 cos phi - cos 3 phi - 2).
inline double extended_ch_closed_form(const DetectorParams& dp, double phi) {
  return 0.25 * dp.eta1 * dp.eta2 * dp.f * dp.F *
         (3.0 * std::cos(phi) - std::cos(3.0 * phi) - 2.0);
}

/// The efficiency-free violation margin g(phi) = 3 cos phi - cos 3 phi - 2.
/// g > 0 means the model prediction exceeds the local upper bound of the
/// extended inequality, whatever the efficiencies.
///
/// Evaluated as 4 sin^2(phi/2) (2 cos^2 phi + 2 cos phi - 1), the factored
/// equivalent: the difference form cancels catastrophically near the
/// tangential root at phi = 0 (it underflows to exactly zero below about
/// 1e-8), which would blind the interval search there.
inline double violation_margin(double phi) {
  const double s = std::sin(0.5 * phi);
  const double c = std::cos(phi);
  return 4.0 * s * s * (2.0 * c * c + 2.0 * c - 1.0);
}

// ---------------------------------------------------------------------------
// Violation geometry on [0, pi]
// ---------------------------------------------------------------------------

struct ViolationInterval {
  double phi_lo;
  double phi_hi;
};

namespace detail {
// Boundary of {g > 0} inside [lo, hi]; requires g(lo) and g(hi) to straddle
// zero in the (positive_side ? +/- : -/+) orientation. Plain bisection.
inline double bisect_margin_boundary(double lo, double hi, bool lo_positive,
                                     double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const bool mid_positive = violation_margin(mid) > 0.0;
    if (mid_positive == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Locates the maximal interval of [0, pi] on which the margin is positive.
/// The margin vanishes tangentially at 0 and crosses zero once beyond the
/// peak, so a moderate scan grid resolves the sign structure and bisection
/// sharpens both endpoints to `tol`.
inline ViolationInterval find_violation_interval(double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  constexpr int kGrid = 4096;
  int first = -1;
  int last = -1;
  for (int i = 0; i <= kGrid; ++i) {
    const double phi = kPi * i / kGrid;
    if (violation_margin(phi) > 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) {
    throw std::logic_error("violation interval vanished");  // g(pi/4) > 0
  }
  double lo = kPi * first / kGrid;
  if (first > 0) {
    lo = detail::bisect_margin_boundary(kPi * (first - 1) / kGrid, lo,
                                        /*lo_positive=*/false, tol);
  }
  double hi = kPi * last / kGrid;
  if (last < kGrid) {
    hi = detail::bisect_margin_boundary(hi, kPi * (last + 1) / kGrid,
                                        /*lo_positive=*/true, tol);
  }
  return {lo, hi};
}

struct MaxViolation {
  double phi_star;
  double g_star;
};

namespace detail {
// d/dphi of the margin; its sign stays numerically meaningful much closer to
// the peak than margin differences do (the margin itself is flat to double
// precision within ~5e-9 of the top).
inline double margin_slope(double phi) {
  return 3.0 * (std::sin(3.0 * phi) - std::sin(phi));
}
}  // namespace detail

/// Peak of the margin: coarse grid over [0, pi], golden-section search on the
/// bracketing cell pair, then a slope-sign bisection to pin the stationary
/// point itself (value comparisons alone cannot resolve the location of a
/// quadratic top below ~5e-9).
inline MaxViolation find_max_violation(double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  constexpr int kGrid = 4096;
  int best = 0;
  double best_value = violation_margin(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double value = violation_margin(kPi * i / kGrid);
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  const double cell_lo = kPi * (best > 0 ? best - 1 : 0) / kGrid;
  const double cell_hi = kPi * (best < kGrid ? best + 1 : kGrid) / kGrid;

  double lo = cell_lo;
  double hi = cell_hi;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = violation_margin(x1);
  double f2 = violation_margin(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = violation_margin(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = violation_margin(x1);
    }
  }
  double phi_star = 0.5 * (lo + hi);

  if (detail::margin_slope(cell_lo) > 0.0 &&
      detail::margin_slope(cell_hi) < 0.0) {
    double a = cell_lo;
    double b = cell_hi;
    while (true) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;  // bracket at machine resolution
      if (detail::margin_slope(mid) > 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    phi_star = 0.5 * (a + b);
  }
  return {phi_star, violation_margin(phi_star)};
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

struct ScanPoint {
  double phi;
  double margin_g;  // efficiency-free margin at phi
  double sprime;    // model prediction including all efficiency factors
};

struct ViolationScan {
  std::vector<ScanPoint> points;
  std::optional<MaxViolation> peak;  // grid argmax of the margin
};

/// Tabulates the margin and the full model prediction over a strictly
/// increasing grid of phi values.
inline ViolationScan scan_violation(const DetectorParams& dp,
                                    const std::vector<double>& phi_grid,
                                    OutcomeSelector sel = {}) {
  if (phi_grid.empty()) {
    throw std::invalid_argument("scan: empty phi grid");
  }
  for (std::size_t i = 1; i < phi_grid.size(); ++i) {
    if (!(phi_grid[i] > phi_grid[i - 1])) {
      throw std::invalid_argument("scan: grid must be strictly increasing");
    }
  }
  ViolationScan scan;
  scan.points.reserve(phi_grid.size());
  for (double phi : phi_grid) {
    const double g = violation_margin(phi);
    const double sprime = extended_ch_qm(dp, AngleConfig::from_phi(phi), sel);
    scan.points.push_back({phi, g, sprime});
    if (!scan.peak || g > scan.peak->g_star) {
      scan.peak = MaxViolation{phi, g};
    }
  }
  return scan;
}

}  // namespace bellaudit
