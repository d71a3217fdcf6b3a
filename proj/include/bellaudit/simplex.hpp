#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bellaudit {

enum class LpSense { Maximize, Minimize };

enum class SimplexStatus { Optimal, Infeasible, Unbounded };

struct SimplexSolution {
  SimplexStatus status = SimplexStatus::Optimal;
  std::vector<double> x;
  double objective = 0.0;  // c . x in the requested sense
  int iterations = 0;
};

// Two-phase dense-tableau simplex for
//
//     extremize c.x   subject to   A x = b,  x >= 0.
//
// Entering and leaving variables follow Bland's smallest-index rule, so the
// method terminates on degenerate problems (the audit LPs have six zero
// right-hand sides). Phase 1 runs on one artificial variable per row; basic
// artificials left at zero are pivoted out, and rows whose structural
// coefficients have all been eliminated are dropped as redundant.
class DenseSimplex {
 public:
  DenseSimplex(const std::vector<double>& c,
               const std::vector<std::vector<double>>& A,
               const std::vector<double>& b, LpSense sense, double eps)
      : n_(c.size()), rows_(A.size()), rhs_(n_ + A.size()), eps_(eps),
        cost_(c) {
    if (b.size() != rows_) {
      throw std::invalid_argument("simplex: rhs size must match row count");
    }
    if (sense == LpSense::Maximize) {
      for (double& v : cost_) v = -v;  // minimize internally
    }
    tableau_.assign(rows_, std::vector<double>(rhs_ + 1, 0.0));
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (A[i].size() != n_) {
        throw std::invalid_argument("simplex: ragged constraint matrix");
      }
      const double flip = b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) tableau_[i][j] = flip * A[i][j];
      tableau_[i][n_ + i] = 1.0;
      tableau_[i][rhs_] = flip * b[i];
      basis_[i] = static_cast<int>(n_ + i);
    }
  }

  SimplexSolution solve() {
    SimplexSolution out;

    // Phase 1: minimize the sum of artificials.
    obj_.assign(rhs_ + 1, 0.0);
    for (const auto& row : tableau_) {
      for (std::size_t j = 0; j < n_; ++j) obj_[j] -= row[j];
      obj_[rhs_] -= row[rhs_];
    }
    const int phase1 = iterate();
    if (phase1 < 0) {
      throw std::logic_error("simplex: phase 1 cannot be unbounded");
    }
    out.iterations += phase1;
    if (-obj_[rhs_] > eps_) {
      out.status = SimplexStatus::Infeasible;
      return out;
    }
    drop_artificials();

    // Phase 2: reduced costs of the real objective.
    obj_.assign(rhs_ + 1, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = cost_[j];
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= rhs_; ++j) obj_[j] -= cb * tableau_[i][j];
    }
    const int phase2 = iterate();
    if (phase2 < 0) {
      out.status = SimplexStatus::Unbounded;
      return out;
    }
    out.iterations += phase2;

    out.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (basis_[i] < static_cast<int>(n_)) {
        out.x[basis_[i]] = std::max(0.0, tableau_[i][rhs_]);
      }
    }
    double value = 0.0;
    for (std::size_t j = 0; j < n_; ++j) value += cost_[j] * out.x[j];
    out.objective = value;  // caller flips sign back for maximization
    return out;
  }

 private:
  // Bland: smallest-index structural column with negative reduced cost.
  // Artificials never re-enter.
  int entering() const {
    for (std::size_t j = 0; j < n_; ++j) {
      if (obj_[j] < -eps_) return static_cast<int>(j);
    }
    return -1;
  }

  // Minimum-ratio row; ties broken by smallest basis index (Bland).
  int leaving(int e) const {
    int row = -1;
    double best = 0.0;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      const double a = tableau_[i][e];
      if (a <= eps_) continue;
      const double ratio = tableau_[i][rhs_] / a;
      if (row < 0 || ratio < best ||
          (ratio == best && basis_[i] < basis_[row])) {
        row = static_cast<int>(i);
        best = ratio;
      }
    }
    return row;
  }

  void pivot(std::size_t row, int col) {
    auto& pr = tableau_[row];
    const double inv = 1.0 / pr[col];
    for (double& v : pr) v *= inv;
    pr[col] = 1.0;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (i != row) eliminate(tableau_[i], pr, col);
    }
    eliminate(obj_, pr, col);
    basis_[row] = col;
  }

  static void eliminate(std::vector<double>& target,
                        const std::vector<double>& pivot_row, int col) {
    const double factor = target[col];
    if (factor == 0.0) return;
    for (std::size_t j = 0; j < target.size(); ++j) {
      target[j] -= factor * pivot_row[j];
    }
    target[col] = 0.0;
  }

  // Returns pivot count, or -1 on unboundedness.
  int iterate() {
    int count = 0;
    while (true) {
      const int e = entering();
      if (e < 0) return count;
      const int r = leaving(e);
      if (r < 0) return -1;
      pivot(static_cast<std::size_t>(r), e);
      if (++count > kMaxIterations) {
        throw std::logic_error("simplex: iteration cap hit");
      }
    }
  }

  // At the phase-1 optimum every basic artificial sits at zero; replace it
  // with any structural column, or drop the row as redundant.
  void drop_artificials() {
    for (std::size_t i = 0; i < tableau_.size();) {
      if (basis_[i] < static_cast<int>(n_)) {
        ++i;
        continue;
      }
      int col = -1;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(tableau_[i][j]) > eps_) {
          col = static_cast<int>(j);
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
        ++i;
      } else {
        tableau_.erase(tableau_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  static constexpr int kMaxIterations = 200000;

  std::size_t n_;     // structural columns
  std::size_t rows_;  // rows at construction; tableau_ may shrink
  std::size_t rhs_;   // fixed rhs column index
  double eps_;
  std::vector<double> cost_;
  std::vector<std::vector<double>> tableau_;
  std::vector<int> basis_;
  std::vector<double> obj_;
};

inline SimplexSolution simplex_solve(const std::vector<double>& c,
                                     const std::vector<std::vector<double>>& A,
                                     const std::vector<double>& b,
                                     LpSense sense, double eps = 1e-9) {
  DenseSimplex solver(c, A, b, sense, eps);
  SimplexSolution sol = solver.solve();
  if (sol.status == SimplexStatus::Optimal && sense == LpSense::Maximize) {
    sol.objective = -sol.objective;
  }
  return sol;
}

}  // namespace bellaudit
