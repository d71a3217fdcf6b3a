#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bellaudit {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Polarizer directions
// ---------------------------------------------------------------------------

/// A linear-polarizer direction, canonicalized to [0, pi). Linear polarization
/// is pi-periodic and every quantity in this library depends on directions
/// only through cos 2(difference), so the canonical representative is
/// lossless.
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : radians_(canonicalize(radians)) {}

  static Angle from_degrees(double degrees) {
    return Angle(degrees * kPi / 180.0);
  }

  double radians() const { return radians_; }
  double degrees() const { return radians_ * 180.0 / kPi; }

 private:
  static double canonicalize(double radians) {
    if (!std::isfinite(radians)) {
      throw std::invalid_argument("Angle: value must be finite");
    }
    double r = std::fmod(radians, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r = 0.0;  // r + pi can round up to pi for tiny negative r
    return r + 0.0;         // maps -0.0 to +0.0
  }

  double radians_ = 0.0;
};

// ---------------------------------------------------------------------------
// Detector-setting slots
// ---------------------------------------------------------------------------

enum class Side { One, Two };
enum class SettingLabel { A, APrime, B, BPrime };

/// One detector-setting slot. Side 1 measures along a, a' or b; side 2 along
/// b, b' or a'. Exactly six (side, label) combinations are valid.
struct Setting {
  Side side;
  SettingLabel label;

  friend constexpr bool operator==(Setting, Setting) = default;
};

inline constexpr Setting kSide1A{Side::One, SettingLabel::A};
inline constexpr Setting kSide1APrime{Side::One, SettingLabel::APrime};
inline constexpr Setting kSide1B{Side::One, SettingLabel::B};
inline constexpr Setting kSide2B{Side::Two, SettingLabel::B};
inline constexpr Setting kSide2BPrime{Side::Two, SettingLabel::BPrime};
inline constexpr Setting kSide2APrime{Side::Two, SettingLabel::APrime};

/// Canonical slot order used for vertex enumeration and serialization.
inline constexpr std::array<Setting, 6> kSettingSlots = {
    kSide1A, kSide1APrime, kSide1B, kSide2B, kSide2BPrime, kSide2APrime};

inline std::size_t slot_index(Setting s) {
  for (std::size_t i = 0; i < kSettingSlots.size(); ++i) {
    if (kSettingSlots[i] == s) return i;
  }
  throw std::invalid_argument("Setting: no detector slot for this side/label");
}

// ---------------------------------------------------------------------------
// Outcomes and result selection
// ---------------------------------------------------------------------------

/// Detector outcome: a + click, a - click, or no click at all.
enum class Outcome : int { Plus = 0, Minus = 1, NoDetect = 2 };

/// Which coincidence results the functionals select: r for the first photon,
/// q for the second, each +1 or -1.
class OutcomeSelector {
 public:
  constexpr OutcomeSelector() = default;
  OutcomeSelector(int r, int q) : r_(checked(r)), q_(checked(q)) {}

  int r() const { return r_; }
  int q() const { return q_; }

 private:
  static int checked(int sign) {
    if (sign != 1 && sign != -1) {
      throw std::invalid_argument("OutcomeSelector: signs must be +1 or -1");
    }
    return sign;
  }

  int r_ = 1;
  int q_ = 1;
};

inline Outcome outcome_for(int sign) {
  return sign > 0 ? Outcome::Plus : Outcome::Minus;
}

// ---------------------------------------------------------------------------
// Single-photon response
// ---------------------------------------------------------------------------

/// Per-slot detection probabilities (pPlus, pMinus) for one value of the
/// hidden variable. The no-detection probability is implicit:
/// p0 = 1 - pPlus - pMinus, so 0 <= pPlus, pMinus and pPlus + pMinus <= 1 is
/// enforced at every write. A default-constructed assignment never detects.
class SinglesAssignment {
 public:
  SinglesAssignment() = default;

  SinglesAssignment& set(Setting s, double p_plus, double p_minus) {
    if (!(p_plus >= 0.0) || !(p_minus >= 0.0) ||
        !(p_plus + p_minus <= 1.0 + kProbSlack)) {
      throw std::invalid_argument(
          "SinglesAssignment: needs pPlus, pMinus >= 0 and pPlus + pMinus <= 1");
    }
    probs_[slot_index(s)] = {p_plus, p_minus};
    return *this;
  }

  double prob(Setting s, Outcome o) const {
    const auto& [plus, minus] = probs_[slot_index(s)];
    switch (o) {
      case Outcome::Plus:
        return plus;
      case Outcome::Minus:
        return minus;
      case Outcome::NoDetect:
        return std::max(0.0, 1.0 - plus - minus);
    }
    throw std::logic_error("unreachable");
  }

  /// Total detection probability at one slot; 1 - alpha is the no-detection
  /// probability.
  double alpha(Setting s) const {
    const auto& [plus, minus] = probs_[slot_index(s)];
    return std::min(1.0, plus + minus);
  }

 private:
  static constexpr double kProbSlack = 1e-12;
  std::array<std::pair<double, double>, 6> probs_{};
};

/// Extreme point of the per-slot probability box: every slot definitely
/// fires +, definitely fires -, or definitely misses.
enum class Trit : int { NoDetectDef = 0, PlusDef = 1, MinusDef = 2 };

struct VertexStrategy {
  std::array<Trit, 6> trits{};  // indexed by canonical slot order

  SinglesAssignment to_assignment() const {
    SinglesAssignment a;
    for (std::size_t i = 0; i < trits.size(); ++i) {
      switch (trits[i]) {
        case Trit::PlusDef:
          a.set(kSettingSlots[i], 1.0, 0.0);
          break;
        case Trit::MinusDef:
          a.set(kSettingSlots[i], 0.0, 1.0);
          break;
        case Trit::NoDetectDef:
          break;
      }
    }
    return a;
  }

  friend constexpr bool operator==(const VertexStrategy&,
                                   const VertexStrategy&) = default;
};

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleMember {
  double weight;
  SinglesAssignment strategy;
};

/// Finite weighted mixture of single-photon responses: the discrete stand-in
/// for a hidden-variable density. Weights are nonnegative and sum to 1.
class Ensemble {
 public:
  explicit Ensemble(std::vector<EnsembleMember> members)
      : members_(std::move(members)) {
    double sum = 0.0;
    for (const auto& m : members_) {
      if (!(m.weight >= 0.0)) {
        throw std::invalid_argument("Ensemble: weights must be nonnegative");
      }
      sum += m.weight;
    }
    if (std::abs(sum - 1.0) > kWeightTolerance) {
      throw std::invalid_argument("Ensemble: weights must sum to 1");
    }
  }

  /// Rescales arbitrary nonnegative weights so they sum to 1.
  static Ensemble normalized(std::vector<EnsembleMember> members) {
    double sum = 0.0;
    for (const auto& m : members) sum += m.weight;
    if (!(sum > 0.0)) {
      throw std::invalid_argument("Ensemble: total weight must be positive");
    }
    for (auto& m : members) m.weight /= sum;
    return Ensemble(std::move(members));
  }

  static Ensemble point_mass(SinglesAssignment strategy) {
    return Ensemble({{1.0, std::move(strategy)}});
  }

  const std::vector<EnsembleMember>& members() const { return members_; }

 private:
  static constexpr double kWeightTolerance = 1e-12;
  std::vector<EnsembleMember> members_;
};

// ---------------------------------------------------------------------------
// Setting pairs and the audited functional terms
// ---------------------------------------------------------------------------

/// A joint measurement configuration: s1 on side 1, s2 on side 2.
struct SettingPair {
  Setting s1;
  Setting s2;

  SettingPair(Setting first, Setting second) : s1(first), s2(second) {
    if (first.side != Side::One || second.side != Side::Two) {
      throw std::invalid_argument(
          "SettingPair: first setting must be side 1, second side 2");
    }
    slot_index(first);
    slot_index(second);
  }

  friend bool operator==(const SettingPair&, const SettingPair&) = default;
};

/// One signed term of the experimental functional: the joint probability at
/// `pair` of the outcomes picked by (first_uses_r ? r : q, second_uses_r ?
/// r : q).
struct FunctionalTerm {
  SettingPair pair;
  double sign;
  bool first_uses_r;
  bool second_uses_r;
};

/// The six terms of the extended functional, in evaluation order:
/// +P_rq(a,b) - P_rq(a,b') + P_rq(a',b) + P_rq(a',b')
/// - P_rr(a',a') - P_qq(b,b).
inline const std::array<FunctionalTerm, 6>& extended_ch_terms() {
  static const std::array<FunctionalTerm, 6> terms = {{
      {{kSide1A, kSide2B}, +1.0, true, false},
      {{kSide1A, kSide2BPrime}, -1.0, true, false},
      {{kSide1APrime, kSide2B}, +1.0, true, false},
      {{kSide1APrime, kSide2BPrime}, +1.0, true, false},
      {{kSide1APrime, kSide2APrime}, -1.0, true, true},
      {{kSide1B, kSide2B}, -1.0, false, false},
  }};
  return terms;
}

// ---------------------------------------------------------------------------
// Polarizer configurations
// ---------------------------------------------------------------------------

/// The four polarizer directions of one experiment.
struct AngleConfig {
  Angle a;
  Angle b;
  Angle a_prime;
  Angle b_prime;

  /// One-parameter family with |a-b| = |a'-b| = |a'-b'| = phi/2 and
  /// |a-b'| = 3*phi/2.
  static AngleConfig from_phi(double phi) {
    return {Angle(phi / 2.0), Angle(0.0), Angle(-phi / 2.0), Angle(-phi)};
  }

  Angle direction(Setting s) const {
    switch (s.label) {
      case SettingLabel::A:
        return a;
      case SettingLabel::APrime:
        return a_prime;
      case SettingLabel::B:
        return b;
      case SettingLabel::BPrime:
        return b_prime;
    }
    throw std::logic_error("unreachable");
  }
};

// ---------------------------------------------------------------------------
// Hidden-variable-level functionals
// ---------------------------------------------------------------------------

/// Total detection probability (the inefficiency measure) at one slot.
inline double alpha(const SinglesAssignment& assign, Setting s) {
  return assign.alpha(s);
}

/// Classic CH combination at fixed hidden variable. With x = p_r1(a),
/// x' = p_r1(a'), y = p_q2(b), y' = p_q2(b'):
///   x (y - y') + x' (y + y') - x' - y
/// which lies in [-1, 0] whenever each probability lies in [0, 1].
inline double ch_value(const SinglesAssignment& assign,
                       OutcomeSelector sel = {}) {
  const Outcome o1 = outcome_for(sel.r());
  const Outcome o2 = outcome_for(sel.q());
  const double x = assign.prob(kSide1A, o1);
  const double xp = assign.prob(kSide1APrime, o1);
  const double y = assign.prob(kSide2B, o2);
  const double yp = assign.prob(kSide2BPrime, o2);
  return x * (y - yp) + xp * (y + yp) - xp - y;
}

/// Extended combination at fixed hidden variable: the two single-probability
/// terms of ch_value are replaced by the same-direction products, using
/// u = p_r2(a') and v = p_q1(b):
///   x (y - y') + x' (y + y') - x' u - v y.
inline double extended_ch_value(const SinglesAssignment& assign,
                                OutcomeSelector sel = {}) {
  const Outcome o1 = outcome_for(sel.r());
  const Outcome o2 = outcome_for(sel.q());
  const double x = assign.prob(kSide1A, o1);
  const double xp = assign.prob(kSide1APrime, o1);
  const double y = assign.prob(kSide2B, o2);
  const double yp = assign.prob(kSide2BPrime, o2);
  const double u = assign.prob(kSide2APrime, o1);
  const double v = assign.prob(kSide1B, o2);
  return x * (y - yp) + xp * (y + yp) - xp * u - v * y;
}

/// Joint outcome probability at fixed hidden variable; the two sides respond
/// independently (factorizability).
inline double joint_probability(const SinglesAssignment& assign,
                                const SettingPair& pair, Outcome o1,
                                Outcome o2) {
  return assign.prob(pair.s1, o1) * assign.prob(pair.s2, o2);
}

// ---------------------------------------------------------------------------
// Experimental-level (ensemble-averaged) quantities
// ---------------------------------------------------------------------------

inline double ensemble_joint_probability(const Ensemble& ens,
                                         const SettingPair& pair, Outcome o1,
                                         Outcome o2) {
  double total = 0.0;
  for (const auto& m : ens.members()) {
    total += m.weight * joint_probability(m.strategy, pair, o1, o2);
  }
  return total;
}

inline double ensemble_single_probability(const Ensemble& ens, Setting s,
                                          Outcome o) {
  double total = 0.0;
  for (const auto& m : ens.members()) {
    total += m.weight * m.strategy.prob(s, o);
  }
  return total;
}

/// Total coincidence-detection measure M for one setting pair: the ensemble
/// average of alpha(s1) * alpha(s2), which equals the sum of the four +/-
/// joint detection probabilities.
inline double coincidence_measure(const Ensemble& ens,
                                  const SettingPair& pair) {
  double total = 0.0;
  for (const auto& m : ens.members()) {
    total += m.weight * m.strategy.alpha(pair.s1) * m.strategy.alpha(pair.s2);
  }
  return total;
}

/// Experimental-level extended combination: the six signed ensemble-averaged
/// joint probabilities of extended_ch_terms(). Linear in the ensemble, so it
/// equals the weighted average of extended_ch_value.
inline double extended_ch_experimental(const Ensemble& ens,
                                       OutcomeSelector sel = {}) {
  double total = 0.0;
  for (const auto& term : extended_ch_terms()) {
    const Outcome o1 = outcome_for(term.first_uses_r ? sel.r() : sel.q());
    const Outcome o2 = outcome_for(term.second_uses_r ? sel.r() : sel.q());
    total += term.sign * ensemble_joint_probability(ens, term.pair, o1, o2);
  }
  return total;
}

/// Experimental-level classic CH combination: four signed joint terms plus
/// the two averaged single-photon terms.
inline double ch_experimental(const Ensemble& ens, OutcomeSelector sel = {}) {
  const Outcome o1 = outcome_for(sel.r());
  const Outcome o2 = outcome_for(sel.q());
  double total = 0.0;
  total += ensemble_joint_probability(ens, {kSide1A, kSide2B}, o1, o2);
  total -= ensemble_joint_probability(ens, {kSide1A, kSide2BPrime}, o1, o2);
  total += ensemble_joint_probability(ens, {kSide1APrime, kSide2B}, o1, o2);
  total += ensemble_joint_probability(ens, {kSide1APrime, kSide2BPrime}, o1, o2);
  total -= ensemble_single_probability(ens, kSide1APrime, o1);
  total -= ensemble_single_probability(ens, kSide2B, o2);
  return total;
}

}  // namespace bellaudit
