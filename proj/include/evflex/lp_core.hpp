#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace evflex::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, eq, ge };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct RowEntry {
  int var;
  double coeff;
};

struct Row {
  std::string name;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
  std::vector<RowEntry> entries;
};

// Minimization model. Rows are stored sparsely; explicit zeros are rejected
// at build time so the invariant "sparse rows carry no explicit zeros" holds
// by construction.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double cost);
  int add_row(std::string name, RowSense sense, double rhs);
  void add_entry(int row, int var, double coeff);
  void row_rhs_add(int row, double delta) { rows_.at(row).rhs += delta; }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_[j]; }
  Variable& variable(int j) { return vars_[j]; }
  const Row& row(int i) const { return rows_[i]; }

  void set_objective_offset(double v) { offset_ = v; }
  void add_objective_offset(double v) { offset_ += v; }
  double objective_offset() const { return offset_; }

  // Throws ConfigError on violated invariants (bad bounds, dangling refs).
  void validate() const;

  std::size_t num_nonzeros() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;              // includes the LP's constant offset
  std::vector<double> x;               // primal values per variable
  std::vector<double> row_dual;        // y per row: d(objective)/d(rhs)
  std::vector<double> reduced_cost;    // per variable
  std::vector<double> row_activity;    // a_i . x per row
  std::int64_t iterations = 0;
  // For infeasible models: rows that could not be satisfied at phase-1 end,
  // with their residual violation, largest first.
  std::vector<std::pair<int, double>> infeasible_rows;
  // For unbounded models: the variable whose improving direction diverges.
  int unbounded_var = -1;

  // Canonical byte serialization, used by determinism tests.
  std::string to_bytes() const;
};

struct Tolerances {
  double feas = 1e-7;   // absolute bound/row feasibility
  double opt = 1e-9;    // reduced-cost threshold
  double gap = 1e-6;    // relative primal/dual gap
};

// Reference solver: revised simplex with bounded variables, sparse LU basis
// factorization with product-form updates, Dantzig pricing and a Bland-rule
// fallback on degenerate stretches. Deterministic: ties break on the lowest
// variable index.
Solution solve(const LinearProgram& lp, const Tolerances& tol = {});

struct CheckReport {
  bool ok = true;
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_dual_violation = 0.0;       // sign errors in duals / reduced costs
  double max_comp_slack_violation = 0.0;
  double duality_gap_rel = 0.0;
  std::vector<std::string> violations;
};

// Independent optimality check: primal feasibility, dual feasibility,
// complementary slackness and the primal/dual objective gap, computed from
// scratch (no solver internals). Used by the acceptance suite on every solve.
CheckReport verify(const LinearProgram& lp, const Solution& sol, const Tolerances& tol = {});

// Plain-text interchange format (debug dumps and the external-solver file
// boundary). Grammar, one item per line, '#' comments allowed:
//   minimize
//   offset <value>
//   var <name> <lower> <upper> <cost>
//   row <name> <le|eq|ge> <rhs> [<coeff> <varname>]...
// Bounds use 'inf'/'-inf' for infinities. Round-trips exactly.
void write_lp_text(const LinearProgram& lp, std::ostream& out);
LinearProgram read_lp_text(std::istream& in);
void write_lp_text_file(const LinearProgram& lp, const std::string& path);
LinearProgram read_lp_text_file(const std::string& path);

// Solution interchange for the external-solver boundary:
//   status <optimal|infeasible|unbounded>
//   objective <value>
//   x <index> <value>        (one per variable)
//   dual <index> <value>     (one per row)
void write_solution_text(const Solution& sol, std::ostream& out);
Solution read_solution_text(std::istream& in);

// Pluggable solve boundary. The reference backend is the in-process simplex;
// a file-exchange backend can delegate to an external solver process. All
// shipped code paths use the reference backend.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual Solution solve(const LinearProgram& lp, const Tolerances& tol) = 0;
};

class ReferenceSimplexBackend final : public SolverBackend {
 public:
  Solution solve(const LinearProgram& lp, const Tolerances& tol) override;
};

// Writes the model as lp-text, runs `command <problem> <solution>`, reads the
// solution text back. Duals must be supplied by the external tool; callers
// that need verified duals should run verify() on the result.
class FileExchangeBackend final : public SolverBackend {
 public:
  explicit FileExchangeBackend(std::string command, std::string work_dir);
  Solution solve(const LinearProgram& lp, const Tolerances& tol) override;

 private:
  std::string command_;
  std::string work_dir_;
};

}  // namespace evflex::lp
