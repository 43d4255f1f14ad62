#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "birk/linops.hpp"
#include "birk/mask.hpp"
#include "oracles.hpp"

using namespace birk;
using test::dense_bbt;
using test::dense_v_matrix;
using test::random_matrix;
using test::svd_pinv;

TEST_CASE("BirkhoffMap applies row and column sums") {
  BirkhoffMap B(3);
  Matrix X = random_matrix(3, 3, 11);
  Vector y = B.apply(X);
  for (Index i = 0; i < 3; ++i) {
    CHECK(y(i) == doctest::Approx(X.row(i).sum()).epsilon(1e-14));
    CHECK(y(3 + i) == doctest::Approx(X.col(i).sum()).epsilon(1e-14));
  }
}

TEST_CASE("adjoint of zero is the zero matrix") {
  BirkhoffMap B(4);
  CHECK(B.adjoint(Vector::Zero(8)).norm() == 0.0);
}

TEST_CASE("apply and adjoint satisfy the inner-product identity") {
  for (Index n : {2, 3, 7}) {
    BirkhoffMap B(n);
    Matrix X = random_matrix(n, n, 100 + static_cast<std::uint64_t>(n));
    Vector y = random_matrix(2 * n, 1, 200 + static_cast<std::uint64_t>(n));
    const double lhs = B.apply(X).dot(y);
    const double rhs = (X.array() * B.adjoint(y).array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("add_adjoint accumulates alpha * (u e^T + e v^T)") {
  BirkhoffMap B(5);
  Vector y = random_matrix(10, 1, 3);
  Matrix out = random_matrix(5, 5, 4);
  Matrix expect = out + 0.7 * B.adjoint(y);
  B.add_adjoint(y, 0.7, out);
  CHECK((out - expect).norm() < 1e-13);
}

TEST_CASE("project_onto_range removes exactly the (e,-e) component") {
  BirkhoffMap B(6);
  Vector y = random_matrix(12, 1, 5);
  Vector p = B.project_onto_range(y);
  // Orthogonal to (e, -e):
  CHECK(std::abs(p.head(6).sum() - p.tail(6).sum()) < 1e-12);
  // Difference is a multiple of (e, -e):
  Vector d = y - p;
  CHECK((d.head(6).array() - d(0)).abs().maxCoeff() < 1e-13);
  CHECK((d.tail(6).array() + d(0)).abs().maxCoeff() < 1e-13);
  // Idempotent:
  CHECK((B.project_onto_range(p) - p).norm() < 1e-13);
}

TEST_CASE("solve_bbt_pinv: zero maps to zero") {
  BirkhoffMap B(4);
  CHECK(B.solve_bbt_pinv(Vector::Zero(8)).norm() == 0.0);
}

TEST_CASE("solve_bbt_pinv matches r = B(I_2)") {
  BirkhoffMap B(2);
  Vector r(4);
  r << 1, 1, 1, 1;
  Vector y = B.solve_bbt_pinv(r);
  Vector expect(4);
  expect << 0.25, 0.25, 0.25, 0.25;
  CHECK((y - expect).norm() < 1e-13);
}

TEST_CASE("solve_bbt_pinv matches the SVD pseudo-inverse on Range(B)") {
  for (Index n : {2, 3, 4, 6}) {
    BirkhoffMap B(n);
    Matrix pinv = svd_pinv(dense_bbt(n));
    for (std::uint64_t s = 0; s < 4; ++s) {
      Vector r = random_matrix(2 * n, 1, 40 + s);
      r = B.project_onto_range(r);  // mean-balanced halves, in Range(B)
      Vector y = B.solve_bbt_pinv(r);
      CHECK((y - pinv * r).norm() < 1e-12 * (1.0 + r.norm()));
    }
  }
}

TEST_CASE("solve_bbt_pinv rejects right-hand sides outside Range(B)") {
  BirkhoffMap B(3);
  Vector r(6);
  r << 1, 1, 1, -1, -1, -1;  // pure (e,-e) direction
  CHECK_THROWS_AS(B.solve_bbt_pinv(r), std::invalid_argument);
}

TEST_CASE("StructuredHessian matches the dense assembly") {
  std::mt19937_64 rng(77);
  for (Index n : {2, 3, 5, 6}) {
    for (int trial = 0; trial < 6; ++trial) {
      Matrix Z = random_matrix(n, n, rng());
      // Vary density: shift to make the mask sparse or dense.
      Z.array() += (trial - 3) * 0.6;
      BinaryMask mask = BinaryMask::from_nonnegative(Z);
      const double eps = (trial % 2) ? 0.25 : 0.0;
      StructuredHessian V(mask, eps);
      Matrix Vd = dense_v_matrix(mask) +
                  eps * Matrix::Identity(2 * n, 2 * n);
      Vector d = random_matrix(2 * n, 1, rng());
      CHECK((V.apply(d) - Vd * d).norm() < 1e-12 * (1.0 + d.norm()));
    }
  }
}

TEST_CASE("StructuredHessian handles the all-ones and empty masks") {
  Matrix pos = Matrix::Ones(4, 4);
  Matrix neg = -Matrix::Ones(4, 4);
  BinaryMask full = BinaryMask::from_nonnegative(pos);
  BinaryMask empty = BinaryMask::from_nonnegative(neg);
  CHECK(full.popcount() == 16);
  CHECK(empty.popcount() == 0);
  Vector d = random_matrix(8, 1, 9);
  CHECK((StructuredHessian(full, 0.0).apply(d) -
         dense_v_matrix(full) * d).norm() < 1e-12);
  CHECK(StructuredHessian(empty, 0.0).apply(d).norm() == 0.0);
  // Omega = 0 with eps = 0.5 gives the diagonal 0.5 * ones.
  DiagPreconditioner P = DiagPreconditioner::from_mask(empty, 0.5);
  CHECK((P.diag().array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("DiagPreconditioner carries [Omega e; Omega^T e] + eps") {
  Matrix Z = random_matrix(5, 5, 13);
  BinaryMask mask = BinaryMask::from_nonnegative(Z);
  DiagPreconditioner P = DiagPreconditioner::from_mask(mask, 0.125);
  Vector expect(10);
  expect.head(5) = mask.row_counts().array() + 0.125;
  expect.tail(5) = mask.col_counts().array() + 0.125;
  CHECK((P.diag() - expect).norm() == 0.0);
  Vector diag(4);
  diag << 2, 2, 2, 2;
  Vector r(4);
  r << 4, 2, 0, -2;
  Vector expect2(4);
  expect2 << 2, 1, 0, -1;
  CHECK((DiagPreconditioner(diag).solve(r) - expect2).norm() == 0.0);
}

TEST_CASE("pcg_solve: identity operator converges in one iteration") {
  auto op = [](const Vector& v) { return v; };
  Vector rhs = random_matrix(7, 1, 21);
  PcgResult res = pcg_solve(op, rhs, 1e-12, 50);
  CHECK(res.converged);
  CHECK(res.iters == 1);
  CHECK((res.x - rhs).norm() < 1e-12);
}

TEST_CASE("pcg_solve matches a dense SPD solve, with and without precond") {
  Matrix A = test::random_spd(9, 31);
  Vector rhs = random_matrix(9, 1, 32);
  Vector exact = A.ldlt().solve(rhs);
  auto op = [&](const Vector& v) { return Vector(A * v); };
  PcgResult plain = pcg_solve(op, rhs, 1e-13, 200);
  CHECK(plain.converged);
  CHECK((plain.x - exact).norm() < 1e-9 * (1.0 + exact.norm()));
  DiagPreconditioner P{Vector(A.diagonal())};
  PcgResult prec = pcg_solve(op, rhs, 1e-13, 200, &P);
  CHECK(prec.converged);
  CHECK((prec.x - exact).norm() < 1e-9 * (1.0 + exact.norm()));
}

TEST_CASE("pcg_solve on singular V returns the minimum-norm solution") {
  for (Index n : {2, 3, 5, 6}) {
    Matrix Z = random_matrix(n, n, 60 + static_cast<std::uint64_t>(n));
    BinaryMask mask = BinaryMask::from_nonnegative(Z);
    Matrix Vd = dense_v_matrix(mask);
    // rhs in Range(V): apply V to a random vector.
    Vector rhs = Vd * random_matrix(2 * n, 1, 70 + static_cast<std::uint64_t>(n));
    StructuredHessian V(mask, 0.0);
    PcgResult res = pcg_solve(V, rhs, 1e-14, 400);
    Vector mn = svd_pinv(Vd) * rhs;
    CHECK((res.x - mn).norm() < 1e-10 * (1.0 + mn.norm()));
  }
}

TEST_CASE("pcg_solve with V + eps I from the all-ones mask, n=2") {
  BinaryMask full = BinaryMask::from_nonnegative(Matrix::Ones(2, 2));
  StructuredHessian V(full, 0.0);
  Vector rhs(4);
  rhs << 1, 1, 1, 1;
  PcgResult res = pcg_solve(V, rhs, 1e-14, 100);
  Vector expect(4);
  expect << 0.25, 0.25, 0.25, 0.25;
  CHECK((res.x - expect).norm() < 1e-12);
}

TEST_CASE("deflated pcg keeps iterates orthogonal to (e,-e)") {
  const Index n = 6;
  Matrix Z = random_matrix(n, n, 81);
  BinaryMask mask = BinaryMask::from_nonnegative(Z);
  StructuredHessian V(mask, 1e-3);
  BirkhoffMap B(n);
  Vector rhs = B.project_onto_range(random_matrix(2 * n, 1, 82));
  DiagPreconditioner P = DiagPreconditioner::from_mask(mask, 1e-3);
  PcgResult res = pcg_solve(V, rhs, 1e-12, 400, &P, /*deflate=*/true);
  const double comp =
      std::abs(res.x.head(n).sum() - res.x.tail(n).sum()) / std::sqrt(2.0 * n);
  CHECK(comp <= 1e-10 * res.x.norm());
}
