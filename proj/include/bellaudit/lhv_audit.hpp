#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellaudit/core.hpp"
#include "bellaudit/simplex.hpp"

namespace bellaudit {

// ---------------------------------------------------------------------------
// Hidden-variable model classes
// ---------------------------------------------------------------------------

/// Unconstrained: all six detector slots respond independently.
/// SymmetricSource: both photons respond identically to a common direction,
/// so the side-1 and side-2 trits for a' are tied, likewise for b (the
/// perfect-correlation reading of a parallel-polarization source).
enum class AuditMode { Unconstrained, SymmetricSource };

namespace detail {
// Free trit positions per mode, in canonical slot order. SymmetricSource
// copies slot 1 (side1 a') into slot 5 (side2 a') and slot 2 (side1 b) into
// slot 3 (side2 b).
inline constexpr std::array<std::size_t, 6> kFreeSlotsUnconstrained = {0, 1, 2,
                                                                       3, 4, 5};
inline constexpr std::array<std::size_t, 4> kFreeSlotsSymmetric = {0, 1, 2, 4};
}  // namespace detail

inline std::size_t vertex_count(AuditMode mode) {
  return mode == AuditMode::Unconstrained ? 729 : 81;  // 3^6 and 3^4
}

/// All extreme points of the per-slot probability box for the given model
/// class, in a fixed order: the vertex index is a base-3 numeral over the
/// free slots (most significant first), with digits
/// NoDetectDef=0, PlusDef=1, MinusDef=2. Index 0 never detects anything.
inline std::vector<VertexStrategy> enumerate_vertex_strategies(AuditMode mode) {
  std::vector<VertexStrategy> out;
  out.reserve(vertex_count(mode));
  const bool tied = mode == AuditMode::SymmetricSource;
  const std::size_t digits = tied ? 4 : 6;
  for (std::size_t index = 0; index < vertex_count(mode); ++index) {
    VertexStrategy v;
    std::size_t rest = index;
    for (std::size_t d = digits; d-- > 0;) {
      const std::size_t slot = tied ? detail::kFreeSlotsSymmetric[d]
                                    : detail::kFreeSlotsUnconstrained[d];
      v.trits[slot] = static_cast<Trit>(rest % 3);
      rest /= 3;
    }
    if (tied) {
      v.trits[slot_index(kSide2APrime)] = v.trits[slot_index(kSide1APrime)];
      v.trits[slot_index(kSide2B)] = v.trits[slot_index(kSide1B)];
    }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise CH bounds
// ---------------------------------------------------------------------------

struct PointwiseExtremes {
  double min;
  double max;
};

/// Exact extremes of the classic CH combination over the 16 extreme
/// assignments of its four probabilities (each 0 or 1). Comes out as
/// (-1, 0) for every selector; all arithmetic is exact on small integers.
inline PointwiseExtremes ch_pointwise_extremes(OutcomeSelector sel = {}) {
  const std::array<Setting, 4> slots = {kSide1A, kSide1APrime, kSide2B,
                                        kSide2BPrime};
  PointwiseExtremes ext{0.0, 0.0};
  bool first = true;
  for (unsigned mask = 0; mask < 16; ++mask) {
    SinglesAssignment assign;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if ((mask >> i) & 1u) {
        const int sign = slots[i].side == Side::One ? sel.r() : sel.q();
        assign.set(slots[i], sign > 0 ? 1.0 : 0.0, sign > 0 ? 0.0 : 1.0);
      }
    }
    const double value = ch_value(assign, sel);
    if (first || value < ext.min) ext.min = value;
    if (first || value > ext.max) ext.max = value;
    first = false;
  }
  return ext;
}

// ---------------------------------------------------------------------------
// The audit linear program
// ---------------------------------------------------------------------------

/// Equality-form LP over nonnegative variables: one column per vertex
/// strategy plus a trailing column for the shared coincidence measure m.
/// Row 0 normalizes the weights; rows 1..6 force the coincidence measure of
/// each audited setting pair to equal m (the direction-independence
/// assumption). m <= 1 is implied by the normalization, since every
/// alpha-product is at most 1.
struct LpProblem {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_matrix;
  std::vector<double> eq_rhs;
  LpSense sense = LpSense::Maximize;
  AuditMode mode = AuditMode::Unconstrained;
  OutcomeSelector selector{};

  std::size_t columns() const { return objective.size(); }
  std::size_t rows() const { return eq_matrix.size(); }
};

/// Extremize the ensemble-averaged extended combination over the model
/// class: objective coefficient of vertex v is extended_ch_value at v,
/// constraint coefficients are its per-pair alpha products.
inline LpProblem build_audit_lp(AuditMode mode, LpSense sense,
                                OutcomeSelector sel = {}) {
  const std::vector<VertexStrategy> vertices = enumerate_vertex_strategies(mode);
  const std::size_t n = vertices.size() + 1;  // + m column
  const auto& terms = extended_ch_terms();

  LpProblem p;
  p.sense = sense;
  p.mode = mode;
  p.selector = sel;
  p.objective.assign(n, 0.0);
  p.eq_matrix.assign(1 + terms.size(), std::vector<double>(n, 0.0));
  p.eq_rhs.assign(1 + terms.size(), 0.0);
  p.eq_rhs[0] = 1.0;

  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const SinglesAssignment assign = vertices[v].to_assignment();
    p.objective[v] = extended_ch_value(assign, sel);
    p.eq_matrix[0][v] = 1.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      p.eq_matrix[1 + t][v] =
          assign.alpha(terms[t].pair.s1) * assign.alpha(terms[t].pair.s2);
    }
  }
  for (std::size_t t = 0; t < terms.size(); ++t) {
    p.eq_matrix[1 + t][n - 1] = -1.0;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnboundedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MismatchedProblem : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An optimum plus everything needed to re-check it without trusting the
/// solver: the full weight vector, the shared measure m, the achieved
/// objective, and per-row constraint residuals.
struct LpCertificate {
  AuditMode mode = AuditMode::Unconstrained;
  OutcomeSelector selector{};
  std::vector<double> weights;  // one per vertex strategy
  double m_value = 0.0;
  double objective_value = 0.0;
  std::vector<double> residuals;  // one per constraint row
  double tolerance = 0.0;
};

namespace detail {
inline std::vector<double> certificate_point(const LpCertificate& cert) {
  std::vector<double> x = cert.weights;
  x.push_back(cert.m_value);
  return x;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

/// Solves the LP and packages the optimum as a certificate. The all-no-detect
/// point mass with m = 0 is always feasible for audit problems, so anything
/// else signals a construction bug.
inline LpCertificate solve_simplex(const LpProblem& p, double tol = 1e-9) {
  const SimplexSolution sol =
      simplex_solve(p.objective, p.eq_matrix, p.eq_rhs, p.sense, tol);
  if (sol.status == SimplexStatus::Infeasible) {
    throw InfeasibleError("audit LP infeasible: constraint construction bug");
  }
  if (sol.status == SimplexStatus::Unbounded) {
    throw UnboundedError("audit LP unbounded: normalization row missing");
  }

  LpCertificate cert;
  cert.mode = p.mode;
  cert.selector = p.selector;
  cert.weights.assign(sol.x.begin(), sol.x.end() - 1);
  cert.m_value = sol.x.back();
  cert.objective_value = detail::dot(p.objective, sol.x);
  cert.residuals.resize(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    cert.residuals[i] = detail::dot(p.eq_matrix[i], sol.x) - p.eq_rhs[i];
  }
  cert.tolerance = tol;
  return cert;
}

inline const char* audit_row_name(std::size_t row) {
  static const std::array<const char*, 7> names = {
      "normalization", "pair a:b",   "pair a:b'", "pair a':b",
      "pair a':b'",    "pair a':a'", "pair b:b"};
  return row < names.size() ? names[row] : "row";
}

struct CertificateCheck {
  bool pass = false;
  double objective_recomputed = 0.0;
  double objective_mismatch = 0.0;
  double max_residual_mismatch = 0.0;
  double max_abs_residual = 0.0;
  double weight_sum = 0.0;
  std::string failure;  // empty iff pass; names the first offending quantity
};

/// Recomputes the objective and every residual of the certificate point from
/// the problem data alone and compares against the stored values. For audit
/// problems the problem data itself comes straight from vertex enumeration,
/// so a fresh build_audit_lp gives a solver-independent check.
inline CertificateCheck verify_certificate(const LpCertificate& cert,
                                           const LpProblem& p, double tol) {
  if (cert.weights.size() + 1 != p.columns() ||
      cert.residuals.size() != p.rows()) {
    throw MismatchedProblem(
        "certificate dimensions do not match the problem");
  }
  const std::vector<double> x = detail::certificate_point(cert);

  CertificateCheck check;
  check.objective_recomputed = detail::dot(p.objective, x);
  check.objective_mismatch =
      std::abs(check.objective_recomputed - cert.objective_value);
  for (double w : cert.weights) check.weight_sum += w;

  std::size_t worst_row = 0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double r = detail::dot(p.eq_matrix[i], x) - p.eq_rhs[i];
    const double mismatch = std::abs(r - cert.residuals[i]);
    if (mismatch > check.max_residual_mismatch) {
      check.max_residual_mismatch = mismatch;
      worst_row = i;
    }
    check.max_abs_residual = std::max(check.max_abs_residual, std::abs(r));
  }

  const double residual_budget = std::max(tol, cert.tolerance);
  for (double w : cert.weights) {
    if (w < -tol) {
      check.failure = "negative weight";
      return check;
    }
  }
  if (check.objective_mismatch > tol) {
    check.failure = "objective mismatch " +
                    std::to_string(check.objective_mismatch);
    return check;
  }
  if (check.max_residual_mismatch > tol) {
    check.failure = std::string("residual mismatch at ") +
                    (p.rows() == 7 ? audit_row_name(worst_row) : "row") +
                    " (" + std::to_string(check.max_residual_mismatch) + ")";
    return check;
  }
  if (check.max_abs_residual > residual_budget) {
    check.failure = "constraint residual above tolerance";
    return check;
  }
  check.pass = true;
  return check;
}

/// Nonzero-weight members of a certificate as an explicit ensemble; the
/// witness one hands to someone who wants to re-check an optimum by hand.
inline Ensemble certificate_ensemble(const LpCertificate& cert) {
  const std::vector<VertexStrategy> vertices =
      enumerate_vertex_strategies(cert.mode);
  if (vertices.size() != cert.weights.size()) {
    throw MismatchedProblem("certificate weight count does not match mode");
  }
  std::vector<EnsembleMember> members;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (cert.weights[v] > 0.0) {
      members.push_back({cert.weights[v], vertices[v].to_assignment()});
    }
  }
  return Ensemble::normalized(std::move(members));
}

}  // namespace bellaudit
