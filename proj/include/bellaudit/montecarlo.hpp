#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bellaudit/core.hpp"
#include "bellaudit/quantum.hpp"
#include "bellaudit/rng.hpp"

namespace bellaudit {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SimConfig {
  DetectorParams detector;
  AngleConfig angles;
  std::uint64_t events_per_pair = 0;
  std::uint64_t seed = 0;
  OutcomeSelector selector{};
};

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

class CountMatrix {
 public:
  void add(Outcome o1, Outcome o2, std::uint64_t n = 1) {
    counts_[static_cast<std::size_t>(o1)][static_cast<std::size_t>(o2)] += n;
    total_ += n;
  }

  std::uint64_t count(Outcome o1, Outcome o2) const {
    return counts_[static_cast<std::size_t>(o1)][static_cast<std::size_t>(o2)];
  }

  std::uint64_t total() const { return total_; }

  /// Merging is associative and commutative, so blocks simulated in any
  /// split can be recombined.
  void merge(const CountMatrix& other) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) counts_[i][j] += other.counts_[i][j];
    }
    total_ += other.total_;
  }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

 private:
  std::array<std::array<std::uint64_t, 3>, 3> counts_{};
  std::uint64_t total_ = 0;
};

/// Fixed category order for the inverse-CDF draw:
/// ++, +-, +0, -+, --, -0, 0+, 0-, 00. Part of the reproducibility contract.
inline constexpr std::array<std::pair<Outcome, Outcome>, 9> kSamplingOrder = {{
    {Outcome::Plus, Outcome::Plus},
    {Outcome::Plus, Outcome::Minus},
    {Outcome::Plus, Outcome::NoDetect},
    {Outcome::Minus, Outcome::Plus},
    {Outcome::Minus, Outcome::Minus},
    {Outcome::Minus, Outcome::NoDetect},
    {Outcome::NoDetect, Outcome::Plus},
    {Outcome::NoDetect, Outcome::Minus},
    {Outcome::NoDetect, Outcome::NoDetect},
}};

/// Draws n pair events from one outcome table. Each event consumes exactly
/// one generator output, so a block's counts depend only on the stream's
/// starting state.
inline CountMatrix simulate_pair_block(const OutcomeTable& table,
                                       std::uint64_t n, SplitMix64& stream) {
  std::array<double, 9> cumulative{};
  double acc = 0.0;
  for (std::size_t k = 0; k < 9; ++k) {
    acc += table.prob(kSamplingOrder[k].first, kSamplingOrder[k].second);
    cumulative[k] = acc;
  }
  cumulative[8] = std::numeric_limits<double>::infinity();  // absorb rounding

  CountMatrix counts;
  for (std::uint64_t e = 0; e < n; ++e) {
    const double u = stream.next_double();
    std::size_t k = 0;
    while (u >= cumulative[k]) ++k;
    counts.add(kSamplingOrder[k].first, kSamplingOrder[k].second);
  }
  return counts;
}

// ---------------------------------------------------------------------------
// The six-pair experiment
// ---------------------------------------------------------------------------

struct PairEstimate {
  SettingPair pair;
  double delta = 0.0;  // polarizer difference actually used (radians)
  CountMatrix counts;
  std::array<std::array<double, 3>, 3> p_hat{};
  std::array<std::array<double, 3>, 3> std_err{};
  double m_hat = 0.0;      // observed double-detection fraction
  double m_std_err = 0.0;
};

struct PairZScore {
  std::size_t i = 0;
  std::size_t j = 0;
  double z = 0.0;
};

struct SimReport {
  SimConfig config;
  std::vector<PairEstimate> pairs;  // six, in functional-term order
  double sprime_estimate = 0.0;
  double sprime_std_error = 0.0;
  std::vector<PairZScore> a_test_z;  // all 15 pairwise comparisons
};

namespace detail {
inline double binomial_se(double p, double n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}
}  // namespace detail

/// Simulates the six audited setting pairs, each from its own substream
/// (stream index = term position), and assembles estimates.
///
/// Error model: per-entry binomial standard errors; the functional's error
/// combines the six selected entries in quadrature, which treats pairs as
/// independent (true) and ignores the within-table covariance of entries
/// from the same table (conservative here, where each term reads a single
/// entry per table). The direction-independence z-scores compare the
/// double-detection fractions of every two pairs.
inline SimReport run_experiment(const SimConfig& cfg) {
  if (cfg.events_per_pair < 1) {
    throw std::invalid_argument("SimConfig: events_per_pair must be >= 1");
  }
  const auto& terms = extended_ch_terms();
  const double n = static_cast<double>(cfg.events_per_pair);

  SimReport report;
  report.config = cfg;
  report.pairs.reserve(terms.size());

  double estimate = 0.0;
  double variance = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const double delta = cfg.angles.direction(terms[t].pair.s1).radians() -
                         cfg.angles.direction(terms[t].pair.s2).radians();
    const OutcomeTable table = outcome_table(cfg.detector, Angle(delta));
    SplitMix64 stream = substream(cfg.seed, t);

    PairEstimate pe{terms[t].pair};
    pe.delta = table.setting_difference().radians();
    pe.counts = simulate_pair_block(table, cfg.events_per_pair, stream);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const auto o1 = static_cast<Outcome>(i);
        const auto o2 = static_cast<Outcome>(j);
        pe.p_hat[i][j] = static_cast<double>(pe.counts.count(o1, o2)) / n;
        pe.std_err[i][j] = detail::binomial_se(pe.p_hat[i][j], n);
      }
    }
    // single division on the integer coincidence count: pairs with equal
    // counts get bit-identical fractions, so degenerate comparisons stay 0/0
    const std::uint64_t coincidences =
        pe.counts.count(Outcome::Plus, Outcome::Plus) +
        pe.counts.count(Outcome::Plus, Outcome::Minus) +
        pe.counts.count(Outcome::Minus, Outcome::Plus) +
        pe.counts.count(Outcome::Minus, Outcome::Minus);
    pe.m_hat = static_cast<double>(coincidences) / n;
    pe.m_std_err = detail::binomial_se(pe.m_hat, n);

    const Outcome o1 =
        outcome_for(terms[t].first_uses_r ? cfg.selector.r() : cfg.selector.q());
    const Outcome o2 = outcome_for(terms[t].second_uses_r ? cfg.selector.r()
                                                          : cfg.selector.q());
    const double p = pe.p_hat[static_cast<std::size_t>(o1)]
                             [static_cast<std::size_t>(o2)];
    estimate += terms[t].sign * p;
    variance += p * (1.0 - p) / n;

    report.pairs.push_back(std::move(pe));
  }
  report.sprime_estimate = estimate;
  report.sprime_std_error = std::sqrt(variance);

  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < report.pairs.size(); ++j) {
      const double diff =
          std::abs(report.pairs[i].m_hat - report.pairs[j].m_hat);
      const double se = std::hypot(report.pairs[i].m_std_err,
                                   report.pairs[j].m_std_err);
      double z = 0.0;
      if (diff > 0.0) {
        z = se > 0.0 ? diff / se : std::numeric_limits<double>::infinity();
      }
      report.a_test_z.push_back({i, j, z});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Direction-independence check
// ---------------------------------------------------------------------------

struct AssumptionACheck {
  bool pass = false;
  double max_z = 0.0;
  std::vector<PairZScore> violations;  // comparisons with z >= threshold
};

/// Passes iff every pairwise z lies strictly below the threshold, so a zero
/// threshold always fails.
inline AssumptionACheck check_assumption_a(const SimReport& report,
                                           double z_threshold) {
  AssumptionACheck out;
  out.pass = true;
  for (const auto& entry : report.a_test_z) {
    out.max_z = std::max(out.max_z, entry.z);
    if (!(entry.z < z_threshold)) {
      out.pass = false;
      out.violations.push_back(entry);
    }
  }
  return out;
}

}  // namespace bellaudit
