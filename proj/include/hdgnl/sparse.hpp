#ifndef HDGNL_SPARSE_HPP
#define HDGNL_SPARSE_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hdgnl/common.hpp"

namespace hdgnl
{

struct Triplet
{
  int row = 0;
  int col = 0;
  complex value;
};

// Square complex matrix in compressed row storage. Column indices are sorted and
// unique within each row.
class SparseMatrix
{
public:
  SparseMatrix() = default;

  // Duplicates are summed; the result is in canonical sorted form. Throws
  // Error(Argument) for an index outside [0, n).
  static SparseMatrix from_triplets(int n, std::span<const Triplet> triplets);

  int size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<int> &row_offsets() const { return row_ptr_; }
  const std::vector<int> &column_indices() const { return col_idx_; }
  const std::vector<complex> &values() const { return values_; }

  // y = A x
  void multiply(std::span<const complex> x, std::span<complex> y) const;
  std::vector<complex> multiply(std::span<const complex> x) const;

  complex coeff(int row, int col) const;
  double max_abs() const;
  bool same_pattern(const SparseMatrix &other) const;

private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<complex> values_;
};

enum class Ordering
{
  Natural,
  MinDegree
};

Ordering ordering_from_string(const std::string &s);

// Fill-reducing symmetric permutation of the pattern of A + A^T (SuiteSparse AMD).
std::vector<int> min_degree_ordering(const SparseMatrix &a);

struct FactorDiagnostics
{
  double min_pivot = 0.0;
  double growth = 0.0;  // max |U| / max |A|
  std::size_t nnz_l = 0;
  std::size_t nnz_u = 0;
  int off_diagonal_pivots = 0;
};

// Left-looking sparse LU (Gilbert-Peierls) with threshold partial pivoting. Columns
// are processed in the order of a symmetric fill-reducing permutation and the
// diagonal entry is kept as pivot whenever it is within `pivot_threshold` of the
// largest candidate.
class SparseLU
{
public:
  explicit SparseLU(Ordering ordering = Ordering::MinDegree, double pivot_threshold = 0.1);

  // Computes the column ordering; reused by later factorize() calls on matrices with
  // the same pattern.
  void analyze(const SparseMatrix &a);
  // Throws Error(Numerical) on a zero pivot.
  void factorize(const SparseMatrix &a);
  void solve(std::span<const complex> b, std::span<complex> x) const;

  int size() const { return n_; }
  const FactorDiagnostics &diagnostics() const { return diag_; }
  const std::vector<int> &column_order() const { return q_; }
  // Original row index of pivot k.
  int pivot_row(int k) const { return prow_[k]; }

  // Factors in compressed column storage; L has a unit diagonal stored first in
  // each column. Row indices are pivot positions.
  const std::vector<int> &l_offsets() const { return lp_; }
  const std::vector<int> &l_indices() const { return li_; }
  const std::vector<complex> &l_values() const { return lx_; }
  const std::vector<int> &u_offsets() const { return up_; }
  const std::vector<int> &u_indices() const { return ui_; }
  const std::vector<complex> &u_values() const { return ux_; }

private:
  Ordering ordering_;
  double threshold_;
  int n_ = 0;
  bool analyzed_ = false;
  std::vector<int> pattern_ptr_, pattern_idx_;
  std::vector<int> q_, pinv_, prow_;
  std::vector<int> lp_, li_, up_, ui_;
  std::vector<complex> lx_, ux_;
  FactorDiagnostics diag_;
};

enum class SolverEngine
{
  Builtin,
  Umfpack
};

SolverEngine solver_engine_from_string(const std::string &s);
const char *to_string(SolverEngine e);

// Pluggable direct solver. An instance keeps its symbolic analysis between
// factorize() calls with an unchanged sparsity pattern.
class DirectSolver
{
public:
  virtual ~DirectSolver() = default;
  virtual void factorize(const SparseMatrix &a) = 0;
  virtual void solve(std::span<const complex> b, std::span<complex> x) const = 0;
  virtual FactorDiagnostics diagnostics() const = 0;
  virtual const char *name() const = 0;
};

struct SolverOptions
{
  SolverEngine engine = SolverEngine::Builtin;
  Ordering ordering = Ordering::MinDegree;
  double pivot_threshold = 0.1;
  int refinement_steps = 1;
  double refinement_trigger = 1e-11;
};

std::unique_ptr<DirectSolver> make_solver(const SolverOptions &options);

struct SolveReport
{
  std::vector<complex> x;
  double residual = 0.0;  // ||A x - b|| / ||b|| (0 for b = 0)
  int refinements = 0;
};

// Factorizes (through `solver`) and solves A x = b, applying up to
// options.refinement_steps steps of iterative refinement while the relative residual
// exceeds options.refinement_trigger.
SolveReport solve_system(const SparseMatrix &a, std::span<const complex> b, DirectSolver &solver,
                         const SolverOptions &options);

// Same with a solver that has already been factorized for `a`.
SolveReport solve_factored(const SparseMatrix &a, std::span<const complex> b,
                           const DirectSolver &solver, const SolverOptions &options);

double relative_residual(const SparseMatrix &a, std::span<const complex> x,
                         std::span<const complex> b);

// MatrixMarket "coordinate complex general" text.
std::string to_matrix_market(const SparseMatrix &a);
void write_matrix_market(const SparseMatrix &a, const std::string &path);

}  // namespace hdgnl

#endif  // HDGNL_SPARSE_HPP
