#include "hdgnl/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <amd.h>
#include <umfpack.h>

namespace hdgnl
{

SparseMatrix SparseMatrix::from_triplets(int n, std::span<const Triplet> triplets)
{
  if (n < 0)
  {
    fail(ErrorKind::Argument, "from_triplets: negative dimension");
  }
  SparseMatrix m;
  m.n_ = n;
  std::vector<int> count(n + 1, 0);
  for (const Triplet &t : triplets)
  {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
    {
      fail(ErrorKind::Argument, "from_triplets: index (" + std::to_string(t.row) + ", " +
                                    std::to_string(t.col) + ") out of range for n = " +
                                    std::to_string(n));
    }
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row (stable), then sort each row by column and merge duplicates.
  std::vector<int> cols(triplets.size());
  std::vector<complex> vals(triplets.size());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (const Triplet &t : triplets)
  {
    const int p = next[t.row]++;
    cols[p] = t.col;
    vals[p] = t.value;
  }

  m.row_ptr_.assign(n + 1, 0);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<int> order;
  for (int r = 0; r < n; ++r)
  {
    const int b = count[r], e = count[r + 1];
    order.resize(e - b);
    std::iota(order.begin(), order.end(), b);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return cols[x] < cols[y]; });
    for (std::size_t k = 0; k < order.size(); ++k)
    {
      const int p = order[k];
      if (k > 0 && cols[p] == m.col_idx_.back())
      {
        m.values_.back() += vals[p];
      }
      else
      {
        m.col_idx_.push_back(cols[p]);
        m.values_.push_back(vals[p]);
      }
    }
    m.row_ptr_[r + 1] = static_cast<int>(m.col_idx_.size());
  }
  return m;
}

void SparseMatrix::multiply(std::span<const complex> x, std::span<complex> y) const
{
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
  {
    fail(ErrorKind::Argument, "SparseMatrix::multiply: dimension mismatch");
  }
  for (int r = 0; r < n_; ++r)
  {
    complex s = 0.0;
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
    {
      s += values_[p] * x[col_idx_[p]];
    }
    y[r] = s;
  }
}

std::vector<complex> SparseMatrix::multiply(std::span<const complex> x) const
{
  std::vector<complex> y(n_);
  multiply(x, y);
  return y;
}

complex SparseMatrix::coeff(int row, int col) const
{
  auto b = col_idx_.begin() + row_ptr_[row];
  auto e = col_idx_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(b, e, col);
  if (it == e || *it != col)
  {
    return 0.0;
  }
  return values_[it - col_idx_.begin()];
}

double SparseMatrix::max_abs() const
{
  double m = 0.0;
  for (const complex &v : values_)
  {
    m = std::max(m, std::abs(v));
  }
  return m;
}

bool SparseMatrix::same_pattern(const SparseMatrix &other) const
{
  return n_ == other.n_ && row_ptr_ == other.row_ptr_ && col_idx_ == other.col_idx_;
}

Ordering ordering_from_string(const std::string &s)
{
  if (s == "natural")
  {
    return Ordering::Natural;
  }
  if (s == "min_degree" || s == "amd")
  {
    return Ordering::MinDegree;
  }
  fail(ErrorKind::Validation, "solver.ordering: unknown ordering '" + s + "'");
}

std::vector<int> min_degree_ordering(const SparseMatrix &a)
{
  const int n = a.size();
  std::vector<int> perm(n);
  if (n == 0)
  {
    return perm;
  }
  double control[AMD_CONTROL], info[AMD_INFO];
  amd_defaults(control);
  // The CSR pattern is the CSC pattern of A^T; AMD orders A + A^T either way.
  const int status = amd_order(n, a.row_offsets().data(), a.column_indices().data(), perm.data(),
                               control, info);
  if (status != AMD_OK && status != AMD_OK_BUT_JUMBLED)
  {
    fail(ErrorKind::Numerical, "AMD ordering failed with status " + std::to_string(status));
  }
  return perm;
}

SparseLU::SparseLU(Ordering ordering, double pivot_threshold)
    : ordering_(ordering), threshold_(pivot_threshold)
{
  if (!(pivot_threshold > 0.0 && pivot_threshold <= 1.0))
  {
    fail(ErrorKind::Argument, "SparseLU: pivot threshold must lie in (0, 1]");
  }
}

void SparseLU::analyze(const SparseMatrix &a)
{
  n_ = a.size();
  pattern_ptr_ = a.row_offsets();
  pattern_idx_ = a.column_indices();
  if (ordering_ == Ordering::MinDegree)
  {
    q_ = min_degree_ordering(a);
  }
  else
  {
    q_.resize(n_);
    std::iota(q_.begin(), q_.end(), 0);
  }
  analyzed_ = true;
}

void SparseLU::factorize(const SparseMatrix &a)
{
  if (!analyzed_ || a.size() != n_ || a.row_offsets() != pattern_ptr_ ||
      a.column_indices() != pattern_idx_)
  {
    analyze(a);
  }
  const int n = n_;

  // Column access to A: transpose of the CSR arrays.
  std::vector<int> ap(n + 1, 0), ai(a.nonzeros());
  std::vector<complex> ax(a.nonzeros());
  {
    const auto &rp = a.row_offsets();
    const auto &ci = a.column_indices();
    const auto &v = a.values();
    for (int c : ci)
    {
      ++ap[c + 1];
    }
    std::partial_sum(ap.begin(), ap.end(), ap.begin());
    std::vector<int> next(ap.begin(), ap.end() - 1);
    for (int r = 0; r < n; ++r)
    {
      for (int p = rp[r]; p < rp[r + 1]; ++p)
      {
        const int dst = next[ci[p]]++;
        ai[dst] = r;
        ax[dst] = v[p];
      }
    }
  }

  lp_.assign(n + 1, 0);
  up_.assign(n + 1, 0);
  li_.clear();
  lx_.clear();
  ui_.clear();
  ux_.clear();
  li_.reserve(4 * a.nonzeros());
  lx_.reserve(4 * a.nonzeros());
  ui_.reserve(4 * a.nonzeros());
  ux_.reserve(4 * a.nonzeros());
  pinv_.assign(n, -1);
  prow_.assign(n, -1);
  diag_ = FactorDiagnostics{};
  diag_.min_pivot = std::numeric_limits<double>::infinity();
  const double amax = a.max_abs();
  double umax = 0.0;

  std::vector<complex> x(n, 0.0);
  std::vector<int> xi(n), stack(n), child(n), mark(n, -1);

  for (int k = 0; k < n; ++k)
  {
    lp_[k] = static_cast<int>(li_.size());
    up_[k] = static_cast<int>(ui_.size());
    const int col = q_[k];

    // Reach of A(:, col) in the graph of L (depth-first, topological order in
    // xi[top..n)).
    int top = n;
    for (int p = ap[col]; p < ap[col + 1]; ++p)
    {
      const int start = ai[p];
      if (mark[start] == k)
      {
        continue;
      }
      int head = 0;
      stack[0] = start;
      while (head >= 0)
      {
        const int j = stack[head];
        const int jp = pinv_[j];
        if (mark[j] != k)
        {
          mark[j] = k;
          child[head] = jp < 0 ? 0 : lp_[jp] + 1;
        }
        bool done = true;
        if (jp >= 0)
        {
          const int end = lp_[jp + 1];
          for (int &c = child[head]; c < end; ++c)
          {
            const int i = li_[c];
            if (mark[i] == k)
            {
              continue;
            }
            ++c;
            stack[++head] = i;
            done = false;
            break;
          }
        }
        if (done)
        {
          --head;
          xi[--top] = j;
        }
      }
    }

    // Sparse triangular solve x = L \ A(:, col).
    for (int p = top; p < n; ++p)
    {
      x[xi[p]] = 0.0;
    }
    for (int p = ap[col]; p < ap[col + 1]; ++p)
    {
      x[ai[p]] = ax[p];
    }
    for (int p = top; p < n; ++p)
    {
      const int j = xi[p];
      const int jp = pinv_[j];
      if (jp < 0)
      {
        continue;
      }
      const complex xj = x[j];
      for (int c = lp_[jp] + 1; c < lp_[jp + 1]; ++c)
      {
        x[li_[c]] -= lx_[c] * xj;
      }
    }

    // Pivot selection.
    int ipiv = -1;
    double best = -1.0;
    for (int p = top; p < n; ++p)
    {
      const int i = xi[p];
      if (pinv_[i] < 0)
      {
        const double v = std::abs(x[i]);
        if (v > best)
        {
          best = v;
          ipiv = i;
        }
      }
      else
      {
        ui_.push_back(pinv_[i]);
        ux_.push_back(x[i]);
        umax = std::max(umax, std::abs(x[i]));
      }
    }
    if (ipiv < 0 || !(best > 0.0))
    {
      fail(ErrorKind::Numerical, "sparse LU: zero pivot in column " + std::to_string(col) +
                                     " (step " + std::to_string(k) + " of " +
                                     std::to_string(n) + ")");
    }
    if (pinv_[col] < 0 && mark[col] == k && std::abs(x[col]) >= threshold_ * best)
    {
      ipiv = col;
    }
    else if (ipiv != col)
    {
      ++diag_.off_diagonal_pivots;
    }
    const complex pivot = x[ipiv];
    ui_.push_back(k);
    ux_.push_back(pivot);
    umax = std::max(umax, std::abs(pivot));
    diag_.min_pivot = std::min(diag_.min_pivot, std::abs(pivot));
    pinv_[ipiv] = k;
    prow_[k] = ipiv;
    li_.push_back(ipiv);
    lx_.push_back(1.0);
    for (int p = top; p < n; ++p)
    {
      const int i = xi[p];
      if (pinv_[i] < 0)
      {
        li_.push_back(i);
        lx_.push_back(x[i] / pivot);
      }
      x[i] = 0.0;
    }
  }
  lp_[n] = static_cast<int>(li_.size());
  up_[n] = static_cast<int>(ui_.size());
  for (int &i : li_)
  {
    i = pinv_[i];
  }
  diag_.nnz_l = li_.size();
  diag_.nnz_u = ui_.size();
  diag_.growth = amax > 0.0 ? umax / amax : 0.0;
  if (n == 0)
  {
    diag_.min_pivot = 0.0;
  }
}

void SparseLU::solve(std::span<const complex> b, std::span<complex> x) const
{
  const int n = n_;
  if (static_cast<int>(b.size()) != n || static_cast<int>(x.size()) != n)
  {
    fail(ErrorKind::Argument, "SparseLU::solve: dimension mismatch");
  }
  std::vector<complex> y(n);
  for (int i = 0; i < n; ++i)
  {
    y[pinv_[i]] = b[i];
  }
  for (int j = 0; j < n; ++j)
  {
    const complex yj = y[j];
    for (int p = lp_[j] + 1; p < lp_[j + 1]; ++p)
    {
      y[li_[p]] -= lx_[p] * yj;
    }
  }
  for (int j = n - 1; j >= 0; --j)
  {
    // Diagonal is the last entry of U's column j.
    const int last = up_[j + 1] - 1;
    y[j] /= ux_[last];
    const complex yj = y[j];
    for (int p = up_[j]; p < last; ++p)
    {
      y[ui_[p]] -= ux_[p] * yj;
    }
  }
  for (int k = 0; k < n; ++k)
  {
    x[q_[k]] = y[k];
  }
}

SolverEngine solver_engine_from_string(const std::string &s)
{
  if (s == "builtin")
  {
    return SolverEngine::Builtin;
  }
  if (s == "umfpack")
  {
    return SolverEngine::Umfpack;
  }
  fail(ErrorKind::Validation, "solver.engine: unknown engine '" + s + "'");
}

const char *to_string(SolverEngine e)
{
  return e == SolverEngine::Builtin ? "builtin" : "umfpack";
}

namespace
{

class BuiltinSolver final : public DirectSolver
{
public:
  explicit BuiltinSolver(const SolverOptions &o) : lu_(o.ordering, o.pivot_threshold) {}
  void factorize(const SparseMatrix &a) override { lu_.factorize(a); }
  void solve(std::span<const complex> b, std::span<complex> x) const override { lu_.solve(b, x); }
  FactorDiagnostics diagnostics() const override { return lu_.diagnostics(); }
  const char *name() const override { return "builtin"; }

private:
  SparseLU lu_;
};

// UMFPACK works on compressed columns; the CSR arrays of A are the CSC arrays of A^T,
// so A^T is factorized and systems are solved with the array transpose.
class UmfpackSolver final : public DirectSolver
{
public:
  explicit UmfpackSolver(const SolverOptions &o)
  {
    umfpack_zi_defaults(control_);
    control_[UMFPACK_PIVOT_TOLERANCE] = o.pivot_threshold;
    if (o.ordering == Ordering::Natural)
    {
      control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_NONE;
    }
  }
  ~UmfpackSolver() override { release(true); }

  void factorize(const SparseMatrix &a) override
  {
    const bool same = symbolic_ != nullptr && a.row_offsets() == ptr_ && a.column_indices() == idx_;
    release(!same);
    ptr_ = a.row_offsets();
    idx_ = a.column_indices();
    values_ = a.values();
    n_ = a.size();
    double info[UMFPACK_INFO];
    const double *ax = reinterpret_cast<const double *>(values_.data());
    if (!symbolic_)
    {
      int st = umfpack_zi_symbolic(n_, n_, ptr_.data(), idx_.data(), ax, nullptr, &symbolic_,
                                   control_, info);
      if (st != UMFPACK_OK)
      {
        symbolic_ = nullptr;
        fail(ErrorKind::Numerical, "UMFPACK symbolic analysis failed with status " +
                                       std::to_string(st));
      }
    }
    int st = umfpack_zi_numeric(ptr_.data(), idx_.data(), ax, nullptr, symbolic_, &numeric_,
                                control_, info);
    if (st != UMFPACK_OK)
    {
      numeric_ = nullptr;
      fail(ErrorKind::Numerical, "UMFPACK numeric factorization failed with status " +
                                     std::to_string(st));
    }
    diag_ = FactorDiagnostics{};
    diag_.nnz_l = static_cast<std::size_t>(info[UMFPACK_LNZ]);
    diag_.nnz_u = static_cast<std::size_t>(info[UMFPACK_UNZ]);
    diag_.min_pivot = info[UMFPACK_RCOND];
  }

  void solve(std::span<const complex> b, std::span<complex> x) const override
  {
    if (static_cast<int>(b.size()) != n_ || static_cast<int>(x.size()) != n_)
    {
      fail(ErrorKind::Argument, "UMFPACK solve: dimension mismatch");
    }
    double info[UMFPACK_INFO];
    const double *ax = reinterpret_cast<const double *>(values_.data());
    int st = umfpack_zi_solve(UMFPACK_Aat, ptr_.data(), idx_.data(), ax, nullptr,
                              reinterpret_cast<double *>(x.data()), nullptr,
                              reinterpret_cast<const double *>(b.data()), nullptr, numeric_,
                              control_, info);
    if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix)
    {
      fail(ErrorKind::Numerical, "UMFPACK solve failed with status " + std::to_string(st));
    }
  }

  FactorDiagnostics diagnostics() const override { return diag_; }
  const char *name() const override { return "umfpack"; }

private:
  void release(bool symbolic)
  {
    if (numeric_)
    {
      umfpack_zi_free_numeric(&numeric_);
      numeric_ = nullptr;
    }
    if (symbolic && symbolic_)
    {
      umfpack_zi_free_symbolic(&symbolic_);
      symbolic_ = nullptr;
    }
  }

  double control_[UMFPACK_CONTROL];
  void *symbolic_ = nullptr;
  void *numeric_ = nullptr;
  int n_ = 0;
  std::vector<int> ptr_, idx_;
  std::vector<complex> values_;
  FactorDiagnostics diag_;
};

double norm2(std::span<const complex> v)
{
  double s = 0.0;
  for (const complex &z : v)
  {
    s += std::norm(z);
  }
  return std::sqrt(s);
}

}  // namespace

std::unique_ptr<DirectSolver> make_solver(const SolverOptions &options)
{
  if (options.engine == SolverEngine::Umfpack)
  {
    return std::make_unique<UmfpackSolver>(options);
  }
  return std::make_unique<BuiltinSolver>(options);
}

double relative_residual(const SparseMatrix &a, std::span<const complex> x,
                         std::span<const complex> b)
{
  std::vector<complex> r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    r[i] -= b[i];
  }
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

SolveReport solve_factored(const SparseMatrix &a, std::span<const complex> b,
                           const DirectSolver &solver, const SolverOptions &options)
{
  const int n = a.size();
  if (static_cast<int>(b.size()) != n)
  {
    fail(ErrorKind::Argument, "solve: right-hand side has wrong dimension");
  }
  SolveReport rep;
  rep.x.assign(n, 0.0);
  const double nb = norm2(b);
  if (nb == 0.0)
  {
    return rep;
  }
  solver.solve(b, rep.x);
  std::vector<complex> r(n), dx(n);
  for (;;)
  {
    a.multiply(rep.x, r);
    for (int i = 0; i < n; ++i)
    {
      r[i] = b[i] - r[i];
    }
    rep.residual = norm2(r) / nb;
    if (rep.residual <= options.refinement_trigger || rep.refinements >= options.refinement_steps)
    {
      break;
    }
    solver.solve(r, dx);
    for (int i = 0; i < n; ++i)
    {
      rep.x[i] += dx[i];
    }
    ++rep.refinements;
  }
  return rep;
}

SolveReport solve_system(const SparseMatrix &a, std::span<const complex> b, DirectSolver &solver,
                         const SolverOptions &options)
{
  solver.factorize(a);
  return solve_factored(a, b, solver, options);
}

std::string to_matrix_market(const SparseMatrix &a)
{
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.size() << ' ' << a.size() << ' ' << a.nonzeros() << '\n';
  char buf[96];
  const auto &rp = a.row_offsets();
  for (int r = 0; r < a.size(); ++r)
  {
    for (int p = rp[r]; p < rp[r + 1]; ++p)
    {
      const complex v = a.values()[p];
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", r + 1, a.column_indices()[p] + 1,
                    v.real(), v.imag());
      os << buf;
    }
  }
  return os.str();
}

void write_matrix_market(const SparseMatrix &a, const std::string &path)
{
  std::ofstream f(path);
  if (!f)
  {
    fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  }
  f << to_matrix_market(a);
  if (!f)
  {
    fail(ErrorKind::Io, "write to '" + path + "' failed");
  }
}

}  // namespace hdgnl
