#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "hdgnl/sparse.hpp"

using namespace hdgnl;

namespace
{

using DenseC = Eigen::MatrixXcd;

DenseC to_dense(const SparseMatrix &a)
{
  DenseC d = DenseC::Zero(a.size(), a.size());
  for (int r = 0; r < a.size(); ++r)
  {
    for (int p = a.row_offsets()[r]; p < a.row_offsets()[r + 1]; ++p)
    {
      d(r, a.column_indices()[p]) = a.values()[p];
    }
  }
  return d;
}

// Random sparse complex matrix with a dominant diagonal (about `per_row` entries per
// row).
std::vector<Triplet> random_triplets(int n, int per_row, double diag, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
  {
    t.push_back({i, i, complex(diag + u(rng), u(rng))});
    for (int k = 0; k < per_row; ++k)
    {
      const int j = col(rng);
      t.push_back({i, j, complex(u(rng), u(rng))});
      t.push_back({j, i, complex(u(rng), u(rng))});
    }
  }
  return t;
}

std::vector<complex> random_vector(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<complex> v(n);
  for (auto &z : v)
  {
    z = complex(u(rng), u(rng));
  }
  return v;
}

double rel_diff(const std::vector<complex> &a, const std::vector<complex> &b)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / (den > 0.0 ? den : 1.0));
}

}  // namespace

TEST_CASE("from_triplets sums duplicates")
{
  std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
  SparseMatrix a = SparseMatrix::from_triplets(1, t);
  CHECK(a.nonzeros() == 1);
  CHECK(a.coeff(0, 0) == complex(3.0, 0.0));
}

TEST_CASE("from_triplets with no entries")
{
  SparseMatrix a = SparseMatrix::from_triplets(3, {});
  CHECK(a.size() == 3);
  CHECK(a.nonzeros() == 0);
  CHECK(a.row_offsets() == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("from_triplets rejects out-of-range indices")
{
  std::vector<Triplet> t{{0, 3, 1.0}};
  CHECK_THROWS_AS(SparseMatrix::from_triplets(3, t), Error);
}

TEST_CASE("from_triplets matches dense accumulation")
{
  const int n = 50;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> idx(0, n - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Triplet> t;
  DenseC dense = DenseC::Zero(n, n);
  for (int k = 0; k < 600; ++k)
  {
    Triplet tr{idx(rng), idx(rng), complex(u(rng), u(rng))};
    dense(tr.row, tr.col) += tr.value;
    t.push_back(tr);
  }
  SparseMatrix a = SparseMatrix::from_triplets(n, t);
  CHECK((to_dense(a) - dense).norm() < 1e-14);
  for (int r = 0; r < n; ++r)
  {
    for (int p = a.row_offsets()[r] + 1; p < a.row_offsets()[r + 1]; ++p)
    {
      CHECK(a.column_indices()[p - 1] < a.column_indices()[p]);
    }
  }
}

TEST_CASE("LU of the identity")
{
  std::vector<Triplet> t;
  for (int i = 0; i < 5; ++i)
  {
    t.push_back({i, i, 1.0});
  }
  SparseMatrix a = SparseMatrix::from_triplets(5, t);
  for (Ordering o : {Ordering::Natural, Ordering::MinDegree})
  {
    SparseLU lu(o);
    lu.factorize(a);
    CHECK(lu.diagnostics().nnz_l == 5);
    CHECK(lu.diagnostics().nnz_u == 5);
    std::vector<complex> b = random_vector(5, 1), x(5);
    lu.solve(b, x);
    CHECK(rel_diff(x, b) == 0.0);
  }
}

TEST_CASE("LU pivots a permutation matrix")
{
  std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, 1.0}};
  SparseMatrix a = SparseMatrix::from_triplets(2, t);
  SparseLU lu(Ordering::Natural);
  lu.factorize(a);
  std::vector<complex> b{complex(1, 2), complex(3, 4)}, x(2);
  lu.solve(b, x);
  CHECK(x[0] == b[1]);
  CHECK(x[1] == b[0]);
  CHECK(lu.diagnostics().off_diagonal_pivots == 2);
}

TEST_CASE("LU reports a singular matrix")
{
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 0, 1.0}};
  SparseMatrix a = SparseMatrix::from_triplets(2, t);
  SparseLU lu;
  CHECK_THROWS_AS(lu.factorize(a), Error);
}

TEST_CASE("LU factors reproduce the permuted matrix")
{
  const int n = 100;
  SparseMatrix a = SparseMatrix::from_triplets(n, random_triplets(n, 3, 8.0, 11));
  for (Ordering o : {Ordering::Natural, Ordering::MinDegree})
  {
    SparseLU lu(o);
    lu.factorize(a);
    DenseC l = DenseC::Zero(n, n), u = DenseC::Zero(n, n);
    for (int j = 0; j < n; ++j)
    {
      for (int p = lu.l_offsets()[j]; p < lu.l_offsets()[j + 1]; ++p)
      {
        l(lu.l_indices()[p], j) = lu.l_values()[p];
      }
      for (int p = lu.u_offsets()[j]; p < lu.u_offsets()[j + 1]; ++p)
      {
        u(lu.u_indices()[p], j) = lu.u_values()[p];
      }
    }
    DenseC dense = to_dense(a), paq(n, n);
    for (int i = 0; i < n; ++i)
    {
      for (int j = 0; j < n; ++j)
      {
        paq(i, j) = dense(lu.pivot_row(i), lu.column_order()[j]);
      }
    }
    CHECK((paq - l * u).norm() / dense.norm() < 1e-12);
  }
}

TEST_CASE("min-degree ordering does not increase fill")
{
  // 2D grid Laplacian-like pattern, where natural order fill is banded.
  const int m = 30, n = m * m;
  std::vector<Triplet> t;
  for (int i = 0; i < m; ++i)
  {
    for (int j = 0; j < m; ++j)
    {
      const int r = i * m + j;
      t.push_back({r, r, complex(4.0, 0.1)});
      if (i > 0) t.push_back({r, r - m, -1.0});
      if (i < m - 1) t.push_back({r, r + m, -1.0});
      if (j > 0) t.push_back({r, r - 1, -1.0});
      if (j < m - 1) t.push_back({r, r + 1, -1.0});
    }
  }
  SparseMatrix a = SparseMatrix::from_triplets(n, t);
  SparseLU nat(Ordering::Natural), amd(Ordering::MinDegree);
  nat.factorize(a);
  amd.factorize(a);
  const auto fill = [](const SparseLU &lu) { return lu.diagnostics().nnz_l + lu.diagnostics().nnz_u; };
  CHECK(fill(amd) <= fill(nat));
}

TEST_CASE("solve residual, linearity and ordering independence")
{
  const int n = 400;
  SparseMatrix a = SparseMatrix::from_triplets(n, random_triplets(n, 4, 10.0, 3));
  std::vector<complex> b1 = random_vector(n, 5), b2 = random_vector(n, 6);
  SolverOptions opt;
  auto s = make_solver(opt);
  SolveReport r1 = solve_system(a, b1, *s, opt);
  CHECK(r1.residual <= 1e-10);
  CHECK(relative_residual(a, r1.x, b1) <= 1e-10);

  const complex alpha(0.3, -1.7);
  std::vector<complex> comb(n);
  for (int i = 0; i < n; ++i)
  {
    comb[i] = alpha * b1[i] + b2[i];
  }
  std::vector<complex> x2(n), xc(n), lin(n);
  s->solve(b2, x2);
  s->solve(comb, xc);
  std::vector<complex> x1(n);
  s->solve(b1, x1);
  for (int i = 0; i < n; ++i)
  {
    lin[i] = alpha * x1[i] + x2[i];
  }
  CHECK(rel_diff(xc, lin) < 1e-12);

  SolverOptions nat = opt;
  nat.ordering = Ordering::Natural;
  auto sn = make_solver(nat);
  SolveReport rn = solve_system(a, b1, *sn, nat);
  CHECK(rel_diff(rn.x, r1.x) < 1e-11);
}

TEST_CASE("solve with zero right-hand side and identity")
{
  std::vector<Triplet> t;
  for (int i = 0; i < 4; ++i)
  {
    t.push_back({i, i, 1.0});
  }
  SparseMatrix a = SparseMatrix::from_triplets(4, t);
  SolverOptions opt;
  auto s = make_solver(opt);
  std::vector<complex> zero(4, 0.0);
  SolveReport r = solve_system(a, zero, *s, opt);
  for (auto z : r.x)
  {
    CHECK(z == complex(0.0, 0.0));
  }
  std::vector<complex> b = random_vector(4, 2);
  r = solve_factored(a, b, *s, opt);
  CHECK(rel_diff(r.x, b) == 0.0);
}

TEST_CASE("builtin and UMFPACK engines agree")
{
  const int n = 300;
  SparseMatrix a = SparseMatrix::from_triplets(n, random_triplets(n, 4, 6.0, 21));
  std::vector<complex> b = random_vector(n, 8);
  SolverOptions ob, ou;
  ou.engine = SolverEngine::Umfpack;
  auto sb = make_solver(ob);
  auto su = make_solver(ou);
  SolveReport rb = solve_system(a, b, *sb, ob);
  SolveReport ru = solve_system(a, b, *su, ou);
  CHECK(ru.residual < 1e-10);
  CHECK(rel_diff(rb.x, ru.x) < 1e-11);

  // Refactorization with the same pattern reuses the symbolic analysis.
  std::vector<Triplet> t = random_triplets(n, 4, 6.0, 21);
  for (auto &tr : t)
  {
    tr.value *= complex(1.0, 0.5);
  }
  SparseMatrix a2 = SparseMatrix::from_triplets(n, t);
  REQUIRE(a2.same_pattern(a));
  SolveReport ru2 = solve_system(a2, b, *su, ou);
  SolveReport rb2 = solve_system(a2, b, *sb, ob);
  CHECK(rel_diff(rb2.x, ru2.x) < 1e-11);
}

TEST_CASE("MatrixMarket output")
{
  std::vector<Triplet> t{{0, 0, complex(1.5, -2.0)}, {1, 0, 3.0}};
  SparseMatrix a = SparseMatrix::from_triplets(2, t);
  const std::string mm = to_matrix_market(a);
  CHECK(mm == "%%MatrixMarket matrix coordinate complex general\n2 2 2\n1 1 1.5 -2\n2 1 3 0\n");
}
