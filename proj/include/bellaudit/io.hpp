#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellaudit/core.hpp"
#include "bellaudit/lhv_audit.hpp"
#include "bellaudit/montecarlo.hpp"
#include "bellaudit/quantum.hpp"

namespace bellaudit {

using ordered_json = nlohmann::ordered_json;

// All numeric file output carries 12 significant digits: enough for every
// tolerance in the toolchain to survive a round trip, and stable to compare
// byte for byte.
inline std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(fmt12(v).c_str(), nullptr);
}

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

inline std::string to_string(AuditMode mode) {
  return mode == AuditMode::SymmetricSource ? "symmetric" : "unconstrained";
}

inline AuditMode audit_mode_from_string(const std::string& s) {
  if (s == "symmetric") return AuditMode::SymmetricSource;
  if (s == "unconstrained") return AuditMode::Unconstrained;
  throw std::invalid_argument("unknown audit mode '" + s + "'");
}

inline std::string to_string(OutcomeSelector sel) {
  std::string s;
  s += sel.r() > 0 ? '+' : '-';
  s += sel.q() > 0 ? '+' : '-';
  return s;
}

inline OutcomeSelector selector_from_string(const std::string& s) {
  if (s.size() != 2 || (s[0] != '+' && s[0] != '-') ||
      (s[1] != '+' && s[1] != '-')) {
    throw std::invalid_argument("selector must be one of ++, +-, -+, --");
  }
  return {s[0] == '+' ? +1 : -1, s[1] == '+' ? +1 : -1};
}

inline const char* outcome_symbol(Outcome o) {
  switch (o) {
    case Outcome::Plus:
      return "+";
    case Outcome::Minus:
      return "-";
    case Outcome::NoDetect:
      return "0";
  }
  return "?";
}

inline std::string setting_name(Setting s) {
  switch (s.label) {
    case SettingLabel::A:
      return "a";
    case SettingLabel::APrime:
      return "a'";
    case SettingLabel::B:
      return "b";
    case SettingLabel::BPrime:
      return "b'";
  }
  return "?";
}

inline std::string pair_name(const SettingPair& pair) {
  return setting_name(pair.s1) + ":" + setting_name(pair.s2);
}

// ---------------------------------------------------------------------------
// Strict object parsing
// ---------------------------------------------------------------------------

inline void require_keys(const ordered_json& obj,
                         std::initializer_list<const char*> allowed,
                         const std::string& context) {
  if (!obj.is_object()) {
    throw std::invalid_argument(context + ": expected a JSON object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(context + ": unknown field '" + it.key() +
                                  "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Selectors, detector parameters, angle configurations
// ---------------------------------------------------------------------------

inline ordered_json selector_to_json(OutcomeSelector sel) {
  return ordered_json{{"r", sel.r()}, {"q", sel.q()}};
}

inline OutcomeSelector selector_from_json(const ordered_json& j) {
  require_keys(j, {"r", "q"}, "selector");
  return {j.at("r").get<int>(), j.at("q").get<int>()};
}

inline ordered_json detector_to_json(const DetectorParams& dp) {
  return ordered_json{{"eta1", round12(dp.eta1)},
                      {"eta2", round12(dp.eta2)},
                      {"f", round12(dp.f)},
                      {"F", round12(dp.F)}};
}

inline DetectorParams detector_from_json(const ordered_json& j) {
  require_keys(j, {"eta1", "eta2", "f", "F"}, "detector");
  return {j.at("eta1").get<double>(), j.at("eta2").get<double>(),
          j.at("f").get<double>(), j.at("F").get<double>()};
}

/// Angle configurations serialize as the four directions in radians. Input
/// accepts either that form or a compact {"phi": ...} for the standard
/// one-parameter family; a "unit" field ("rad" default, or "deg") applies to
/// all angle values in the object.
inline ordered_json angles_to_json(const AngleConfig& cfg) {
  return ordered_json{{"a", round12(cfg.a.radians())},
                      {"b", round12(cfg.b.radians())},
                      {"a_prime", round12(cfg.a_prime.radians())},
                      {"b_prime", round12(cfg.b_prime.radians())},
                      {"unit", "rad"}};
}

inline AngleConfig angles_from_json(const ordered_json& j) {
  require_keys(j, {"a", "b", "a_prime", "b_prime", "phi", "unit"}, "angles");
  double scale = 1.0;
  if (j.contains("unit")) {
    const std::string unit = j.at("unit").get<std::string>();
    if (unit == "deg") {
      scale = kPi / 180.0;
    } else if (unit != "rad") {
      throw std::invalid_argument("angles: unit must be 'rad' or 'deg'");
    }
  }
  if (j.contains("phi")) {
    if (j.contains("a") || j.contains("b") || j.contains("a_prime") ||
        j.contains("b_prime")) {
      throw std::invalid_argument(
          "angles: give either 'phi' or the four directions, not both");
    }
    return AngleConfig::from_phi(j.at("phi").get<double>() * scale);
  }
  return {Angle(j.at("a").get<double>() * scale),
          Angle(j.at("b").get<double>() * scale),
          Angle(j.at("a_prime").get<double>() * scale),
          Angle(j.at("b_prime").get<double>() * scale)};
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

namespace detail {
inline const std::array<const char*, 6>& slot_keys() {
  static const std::array<const char*, 6> keys = {
      "side1_a", "side1_a_prime", "side1_b",
      "side2_b", "side2_b_prime", "side2_a_prime"};
  return keys;
}
}  // namespace detail

inline ordered_json assignment_to_json(const SinglesAssignment& a) {
  ordered_json j;
  for (std::size_t i = 0; i < kSettingSlots.size(); ++i) {
    const Setting s = kSettingSlots[i];
    j[detail::slot_keys()[i]] = {round12(a.prob(s, Outcome::Plus)),
                                 round12(a.prob(s, Outcome::Minus))};
  }
  return j;
}

inline SinglesAssignment assignment_from_json(const ordered_json& j) {
  require_keys(j,
               {"side1_a", "side1_a_prime", "side1_b", "side2_b",
                "side2_b_prime", "side2_a_prime"},
               "strategy");
  SinglesAssignment a;
  for (std::size_t i = 0; i < kSettingSlots.size(); ++i) {
    const auto& entry = j.at(detail::slot_keys()[i]);
    if (!entry.is_array() || entry.size() != 2) {
      throw std::invalid_argument("strategy: each slot needs [pPlus, pMinus]");
    }
    a.set(kSettingSlots[i], entry[0].get<double>(), entry[1].get<double>());
  }
  return a;
}

inline ordered_json ensemble_to_json(const Ensemble& ens) {
  ordered_json members = ordered_json::array();
  for (const auto& m : ens.members()) {
    members.push_back(ordered_json{{"weight", round12(m.weight)},
                                   {"strategy", assignment_to_json(m.strategy)}});
  }
  return ordered_json{{"members", members}};
}

inline Ensemble ensemble_from_json(const ordered_json& j) {
  require_keys(j, {"members"}, "ensemble");
  std::vector<EnsembleMember> members;
  for (const auto& entry : j.at("members")) {
    require_keys(entry, {"weight", "strategy"}, "ensemble member");
    members.push_back({entry.at("weight").get<double>(),
                       assignment_from_json(entry.at("strategy"))});
  }
  return Ensemble::normalized(std::move(members));
}

// ---------------------------------------------------------------------------
// LP certificates
// ---------------------------------------------------------------------------

/// Certificate schema: {mode, selector, objective, m, weights, residuals,
/// tolerance} with weights as sparse [vertexIndex, weight] pairs; only
/// nonzero weights are listed.
inline ordered_json certificate_to_json(const LpCertificate& cert) {
  ordered_json weights = ordered_json::array();
  for (std::size_t v = 0; v < cert.weights.size(); ++v) {
    if (cert.weights[v] != 0.0) {
      weights.push_back(
          ordered_json::array({v, round12(cert.weights[v])}));
    }
  }
  ordered_json residuals = ordered_json::array();
  for (double r : cert.residuals) residuals.push_back(round12(r));
  return ordered_json{{"mode", to_string(cert.mode)},
                      {"selector", selector_to_json(cert.selector)},
                      {"objective", round12(cert.objective_value)},
                      {"m", round12(cert.m_value)},
                      {"weights", weights},
                      {"residuals", residuals},
                      {"tolerance", round12(cert.tolerance)}};
}

inline LpCertificate certificate_from_json(const ordered_json& j) {
  require_keys(j,
               {"mode", "selector", "objective", "m", "weights", "residuals",
                "tolerance"},
               "certificate");
  LpCertificate cert;
  cert.mode = audit_mode_from_string(j.at("mode").get<std::string>());
  cert.selector = selector_from_json(j.at("selector"));
  cert.objective_value = j.at("objective").get<double>();
  cert.m_value = j.at("m").get<double>();
  cert.tolerance = j.at("tolerance").get<double>();
  cert.weights.assign(vertex_count(cert.mode), 0.0);
  for (const auto& entry : j.at("weights")) {
    if (!entry.is_array() || entry.size() != 2) {
      throw std::invalid_argument(
          "certificate: weights must be [vertexIndex, weight] pairs");
    }
    const auto v = entry[0].get<std::size_t>();
    if (v >= cert.weights.size()) {
      throw std::invalid_argument("certificate: vertex index out of range");
    }
    cert.weights[v] = entry[1].get<double>();
  }
  for (const auto& r : j.at("residuals")) {
    cert.residuals.push_back(r.get<double>());
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Simulation configs and reports
// ---------------------------------------------------------------------------

inline ordered_json sim_config_to_json(const SimConfig& cfg) {
  return ordered_json{{"detector", detector_to_json(cfg.detector)},
                      {"angles", angles_to_json(cfg.angles)},
                      {"events_per_pair", cfg.events_per_pair},
                      {"seed", cfg.seed},
                      {"selector", selector_to_json(cfg.selector)}};
}

inline SimConfig sim_config_from_json(const ordered_json& j) {
  require_keys(j, {"detector", "angles", "events_per_pair", "seed", "selector"},
               "config");
  SimConfig cfg;
  cfg.detector = detector_from_json(j.at("detector"));
  cfg.angles = angles_from_json(j.at("angles"));
  cfg.events_per_pair = j.at("events_per_pair").get<std::uint64_t>();
  if (cfg.events_per_pair < 1) {
    throw std::invalid_argument("config: events_per_pair must be >= 1");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("selector")) cfg.selector = selector_from_json(j.at("selector"));
  return cfg;
}

inline ordered_json report_to_json(const SimReport& report) {
  ordered_json pairs = ordered_json::array();
  for (const auto& pe : report.pairs) {
    ordered_json counts = ordered_json::array();
    ordered_json probs = ordered_json::array();
    ordered_json errs = ordered_json::array();
    for (std::size_t i = 0; i < 3; ++i) {
      ordered_json crow = ordered_json::array();
      ordered_json prow = ordered_json::array();
      ordered_json erow = ordered_json::array();
      for (std::size_t j = 0; j < 3; ++j) {
        crow.push_back(
            pe.counts.count(static_cast<Outcome>(i), static_cast<Outcome>(j)));
        prow.push_back(round12(pe.p_hat[i][j]));
        erow.push_back(round12(pe.std_err[i][j]));
      }
      counts.push_back(crow);
      probs.push_back(prow);
      errs.push_back(erow);
    }
    pairs.push_back(ordered_json{{"pair", pair_name(pe.pair)},
                                 {"delta", round12(pe.delta)},
                                 {"total", pe.counts.total()},
                                 {"counts", counts},
                                 {"probabilities", probs},
                                 {"std_errors", errs},
                                 {"m_estimate", round12(pe.m_hat)},
                                 {"m_std_error", round12(pe.m_std_err)}});
  }
  ordered_json zscores = ordered_json::array();
  double max_z = 0.0;
  for (const auto& entry : report.a_test_z) {
    max_z = std::max(max_z, entry.z);
    zscores.push_back(
        ordered_json{{"pair_i", pair_name(report.pairs[entry.i].pair)},
                     {"pair_j", pair_name(report.pairs[entry.j].pair)},
                     {"z", round12(entry.z)}});
  }
  return ordered_json{
      {"config", sim_config_to_json(report.config)},
      {"pairs", pairs},
      {"sprime_estimate", round12(report.sprime_estimate)},
      {"sprime_std_error", round12(report.sprime_std_error)},
      {"assumption_a",
       ordered_json{{"z_scores", zscores}, {"max_z", round12(max_z)}}}};
}

// ---------------------------------------------------------------------------
// CSV outputs
// ---------------------------------------------------------------------------

inline void write_scan_csv(std::ostream& os, const ViolationScan& scan,
                           const DetectorParams& dp) {
  os << "phi,margin_g,sprime,eta1,eta2,f,F\n";
  for (const auto& point : scan.points) {
    os << fmt12(point.phi) << ',' << fmt12(point.margin_g) << ','
       << fmt12(point.sprime) << ',' << fmt12(dp.eta1) << ','
       << fmt12(dp.eta2) << ',' << fmt12(dp.f) << ',' << fmt12(dp.F) << '\n';
  }
}

inline void write_counts_csv(std::ostream& os, const SimReport& report) {
  os << "pair,o1,o2,count\n";
  for (const auto& pe : report.pairs) {
    for (const auto& [o1, o2] : kSamplingOrder) {
      os << pair_name(pe.pair) << ',' << outcome_symbol(o1) << ','
         << outcome_symbol(o2) << ',' << pe.counts.count(o1, o2) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Small file helpers
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace bellaudit
