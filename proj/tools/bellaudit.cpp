// bellaudit command-line front end.
//
// Subcommands:
//   audit     extremize the extended CH combination over local models (LP)
//   qscan     tabulate the quantum prediction and its violation region
//   simulate  event-level Monte Carlo of the six-pair experiment
//   certify   re-check a previously emitted LP certificate
//
// Exit codes: 0 success, 2 invalid input, 3 assertion/verification failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellaudit/core.hpp"
#include "bellaudit/io.hpp"
#include "bellaudit/lhv_audit.hpp"
#include "bellaudit/montecarlo.hpp"
#include "bellaudit/quantum.hpp"

namespace fs = std::filesystem;
using namespace bellaudit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitCheckFailed = 3;

std::string selector_tag(OutcomeSelector sel) {
  std::string tag;
  tag += sel.r() > 0 ? 'p' : 'm';
  tag += sel.q() > 0 ? 'p' : 'm';
  return tag;
}

void ensure_parent_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  ensure_parent_dir(path);
  write_text_file(path.string(), dump_json(j));
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

struct AuditOptions {
  std::string mode = "symmetric";
  std::string selector = "++";
  std::string out_dir = ".";
  double tol = 1e-9;
  bool assert_bounds = false;
};

int run_audit(const AuditOptions& opt) {
  const AuditMode mode = audit_mode_from_string(opt.mode);
  const OutcomeSelector sel = selector_from_string(opt.selector);

  LpCertificate certs[2];
  bool verified[2];
  const LpSense senses[2] = {LpSense::Maximize, LpSense::Minimize};
  const char* sense_names[2] = {"max", "min"};
  fs::path cert_paths[2];

  for (int k = 0; k < 2; ++k) {
    const LpProblem problem = build_audit_lp(mode, senses[k], sel);
    certs[k] = solve_simplex(problem, opt.tol);
    verified[k] = verify_certificate(certs[k], problem, opt.tol).pass;
    cert_paths[k] = fs::path(opt.out_dir) /
                    ("audit_" + opt.mode + "_" + selector_tag(sel) + "_" +
                     sense_names[k] + ".json");
    write_json_file(cert_paths[k], certificate_to_json(certs[k]));
  }

  const double maximum = certs[0].objective_value;
  const double minimum = certs[1].objective_value;
  const bool upper_ok = maximum <= 0.0 + opt.tol;
  const bool lower_ok = minimum >= -1.0 - opt.tol;

  const ordered_json summary{
      {"mode", opt.mode},
      {"selector", selector_to_json(sel)},
      {"tolerance", round12(opt.tol)},
      {"max",
       ordered_json{{"objective", round12(maximum)},
                    {"m", round12(certs[0].m_value)},
                    {"verified", verified[0]},
                    {"certificate", cert_paths[0].filename().string()}}},
      {"min",
       ordered_json{{"objective", round12(minimum)},
                    {"m", round12(certs[1].m_value)},
                    {"verified", verified[1]},
                    {"certificate", cert_paths[1].filename().string()}}},
      {"bounds", ordered_json{{"upper", 0.0},
                              {"lower", -1.0},
                              {"within", upper_ok && lower_ok}}}};
  const fs::path summary_path =
      fs::path(opt.out_dir) /
      ("audit_" + opt.mode + "_" + selector_tag(sel) + "_summary.json");
  write_json_file(summary_path, summary);

  std::cout << "audit mode=" << opt.mode << " selector=" << opt.selector
            << " max=" << fmt12(maximum) << " min=" << fmt12(minimum)
            << " (certificates "
            << (verified[0] && verified[1] ? "verified" : "NOT VERIFIED")
            << ")\n";

  if (!verified[0] || !verified[1]) {
    std::cerr << "internal certificate verification failed\n";
    return kExitCheckFailed;
  }
  if (opt.assert_bounds && !(upper_ok && lower_ok)) {
    const int bad = upper_ok ? 1 : 0;
    std::cout << "bound violated: " << sense_names[bad] << " objective "
              << fmt12(certs[bad].objective_value) << " outside [-1, 0]\n";
    std::cout << "witness ensemble:\n"
              << dump_json(ensemble_to_json(certificate_ensemble(certs[bad])));
    return kExitCheckFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// qscan
// ---------------------------------------------------------------------------

struct QscanOptions {
  double phi_min = 0.0;
  double phi_max = kPi;
  bool phi_max_set = false;
  unsigned steps = 1000;
  bool degrees = false;
  double eta1 = 1.0, eta2 = 1.0, f = 1.0, F = 1.0;
  std::string selector = "++";
  std::string out_csv = "qscan.csv";
  std::string summary_path;
  double tol = 1e-10;
};

int run_qscan(const QscanOptions& opt) {
  const OutcomeSelector sel = selector_from_string(opt.selector);
  const DetectorParams dp(opt.eta1, opt.eta2, opt.f, opt.F);

  double lo = opt.phi_min;
  double hi = opt.phi_max_set ? opt.phi_max : (opt.degrees ? 180.0 : kPi);
  if (opt.degrees) {
    lo *= kPi / 180.0;
    hi *= kPi / 180.0;
  }
  if (!(hi > lo)) {
    std::cerr << "qscan: phi-max must exceed phi-min\n";
    return kExitInvalidInput;
  }

  std::vector<double> grid(opt.steps);
  for (unsigned i = 0; i < opt.steps; ++i) {
    grid[i] = lo + (hi - lo) * i / (opt.steps - 1);
  }
  const ViolationScan scan = scan_violation(dp, grid, sel);

  {
    ensure_parent_dir(opt.out_csv);
    std::ostringstream csv;
    write_scan_csv(csv, scan, dp);
    write_text_file(opt.out_csv, csv.str());
  }

  const ViolationInterval interval = find_violation_interval(opt.tol);
  const MaxViolation peak = find_max_violation(opt.tol);

  // The margin curve is efficiency-free; whether the model value itself goes
  // positive additionally needs a nonzero eta1*eta2*f*F prefactor.
  double sprime_max = scan.points.front().sprime;
  double sprime_argmax = scan.points.front().phi;
  double first_positive = 0.0, last_positive = 0.0;
  bool violated = false;
  for (const auto& point : scan.points) {
    if (point.sprime > sprime_max) {
      sprime_max = point.sprime;
      sprime_argmax = point.phi;
    }
    if (point.sprime > 0.0) {
      if (!violated) first_positive = point.phi;
      last_positive = point.phi;
      violated = true;
    }
  }
  ordered_json sprime_summary{{"max", round12(sprime_max)},
                              {"argmax_phi", round12(sprime_argmax)},
                              {"violated", violated}};
  if (violated) {
    sprime_summary["phi_first"] = round12(first_positive);
    sprime_summary["phi_last"] = round12(last_positive);
  }

  const ordered_json summary{
      {"selector", selector_to_json(sel)},
      {"detector", detector_to_json(dp)},
      {"grid", ordered_json{{"phi_min", round12(lo)},
                            {"phi_max", round12(hi)},
                            {"steps", opt.steps}}},
      {"margin", ordered_json{{"phi_lo", round12(interval.phi_lo)},
                              {"phi_hi", round12(interval.phi_hi)},
                              {"phi_star", round12(peak.phi_star)},
                              {"g_star", round12(peak.g_star)}}},
      {"sprime", sprime_summary}};

  const std::string summary_path = opt.summary_path.empty()
                                       ? (fs::path(opt.out_csv)
                                              .replace_extension()
                                              .string() +
                                          "_summary.json")
                                       : opt.summary_path;
  write_json_file(summary_path, summary);

  std::cout << "qscan wrote " << scan.points.size() << " points to "
            << opt.out_csv << "; margin peak g=" << fmt12(peak.g_star)
            << " at phi=" << fmt12(peak.phi_star) << ", positive on ("
            << fmt12(interval.phi_lo) << ", " << fmt12(interval.phi_hi)
            << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string config_path;
  std::string out_path = "simulate_report.json";
  std::string counts_path;
  double z_threshold = 4.0;
};

int run_simulate(const SimulateOptions& opt) {
  const ordered_json parsed = ordered_json::parse(read_text_file(opt.config_path));
  const SimConfig cfg = sim_config_from_json(parsed);

  const SimReport report = run_experiment(cfg);
  write_json_file(opt.out_path, report_to_json(report));

  const std::string counts_path =
      opt.counts_path.empty()
          ? fs::path(opt.out_path).replace_extension().string() + "_counts.csv"
          : opt.counts_path;
  {
    ensure_parent_dir(counts_path);
    std::ostringstream csv;
    write_counts_csv(csv, report);
    write_text_file(counts_path, csv.str());
  }

  const AssumptionACheck a_check = check_assumption_a(report, opt.z_threshold);
  std::cout << "sprime = " << fmt12(report.sprime_estimate) << " +/- "
            << fmt12(report.sprime_std_error) << "\n";
  std::cout << "direction independence: max z = " << fmt12(a_check.max_z)
            << " -> " << (a_check.pass ? "pass" : "FAIL") << " (threshold "
            << fmt12(opt.z_threshold) << ")\n";
  std::cout << "report written to " << opt.out_path << ", counts to "
            << counts_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

struct CertifyOptions {
  std::string certificate_path;
  double tol = -1.0;  // negative: use the certificate's stored tolerance
};

int run_certify(const CertifyOptions& opt) {
  const ordered_json parsed =
      ordered_json::parse(read_text_file(opt.certificate_path));
  const LpCertificate cert = certificate_from_json(parsed);
  const double tol = opt.tol >= 0.0 ? opt.tol : cert.tolerance;

  const LpProblem problem =
      build_audit_lp(cert.mode, LpSense::Maximize, cert.selector);
  const CertificateCheck check = verify_certificate(cert, problem, tol);

  std::cout << "certificate " << opt.certificate_path << ": objective "
            << fmt12(cert.objective_value) << ", recomputed "
            << fmt12(check.objective_recomputed) << ", max residual "
            << fmt12(check.max_abs_residual) << "\n";
  if (!check.pass) {
    std::cout << "verification FAILED: " << check.failure << "\n";
    return kExitCheckFailed;
  }
  std::cout << "verification passed (tolerance " << fmt12(tol) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extended CH inequality auditor, predictor and simulator"};
  app.require_subcommand(1);

  const std::vector<std::string> selectors = {"++", "+-", "-+", "--"};

  AuditOptions audit_opt;
  CLI::App* audit = app.add_subcommand(
      "audit", "extremize the extended combination over local models");
  audit->add_option("--mode", audit_opt.mode, "symmetric | unconstrained")
      ->check(CLI::IsMember({"symmetric", "unconstrained"}));
  audit->add_option("--selector", audit_opt.selector, "result pair r q")
      ->check(CLI::IsMember(selectors));
  audit->add_option("--out", audit_opt.out_dir, "output directory");
  audit->add_option("--tol", audit_opt.tol, "solver and check tolerance")
      ->check(CLI::PositiveNumber);
  audit->add_flag("--assert-bounds", audit_opt.assert_bounds,
                  "exit 3 unless both optima lie in [-1, 0]");

  QscanOptions qscan_opt;
  CLI::App* qscan = app.add_subcommand(
      "qscan", "scan the quantum prediction over the difference angle");
  qscan->add_option("--phi-min", qscan_opt.phi_min, "grid start");
  qscan->add_option("--phi-max", qscan_opt.phi_max, "grid end")
      ->each([&](const std::string&) { qscan_opt.phi_max_set = true; });
  qscan->add_option("--steps", qscan_opt.steps, "grid size (>= 2)")
      ->check(CLI::Range(2u, 100000000u));
  qscan->add_flag("--degrees", qscan_opt.degrees,
                  "interpret phi bounds in degrees");
  qscan->add_option("--eta1", qscan_opt.eta1, "detector 1 efficiency");
  qscan->add_option("--eta2", qscan_opt.eta2, "detector 2 efficiency");
  qscan->add_option("--f", qscan_opt.f, "collimator pass probability");
  qscan->add_option("--F", qscan_opt.F, "correlation magnitude");
  qscan->add_option("--selector", qscan_opt.selector, "result pair r q")
      ->check(CLI::IsMember(selectors));
  qscan->add_option("--out", qscan_opt.out_csv, "scan CSV path");
  qscan->add_option("--summary", qscan_opt.summary_path, "summary JSON path");
  qscan->add_option("--tol", qscan_opt.tol, "root/peak location tolerance")
      ->check(CLI::PositiveNumber);

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "event-level Monte Carlo of the six-pair experiment");
  simulate->add_option("--config", sim_opt.config_path, "JSON config path")
      ->required();
  simulate->add_option("--out", sim_opt.out_path, "report JSON path");
  simulate->add_option("--counts", sim_opt.counts_path, "counts CSV path");
  simulate->add_option("--z-threshold", sim_opt.z_threshold,
                       "direction-independence z threshold");

  CertifyOptions certify_opt;
  CLI::App* certify =
      app.add_subcommand("certify", "re-check an emitted LP certificate");
  certify->add_option("--certificate", certify_opt.certificate_path,
                      "certificate JSON path")
      ->required();
  certify->add_option("--tol", certify_opt.tol, "verification tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (audit->parsed()) return run_audit(audit_opt);
    if (qscan->parsed()) return run_qscan(qscan_opt);
    if (simulate->parsed()) return run_simulate(sim_opt);
    if (certify->parsed()) return run_certify(certify_opt);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}
