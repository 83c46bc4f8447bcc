#include "core/hilbert.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace ethlab;
using namespace ethlab::hilbert;
using oracles::Rng;

namespace {

DensityMatrix bell_state_2x2() {
  const SpaceShape shape{2, 2};
  Vector amps = Vector::Zero(4);
  amps(0) = Complex(1 / std::sqrt(2.0), 0);  // |00>
  amps(3) = Complex(1 / std::sqrt(2.0), 0);  // |11>
  return PureState{Space::global, shape, amps}.to_density();
}

}  // namespace

TEST_CASE("partial trace of a product state returns the system factor") {
  Rng rng(11);
  const SpaceShape shape{3, 5};
  const Matrix rho_s = oracles::random_density(rng, 3);
  const Matrix rho_b = oracles::random_density(rng, 5);
  const Matrix rho = tensor_product(rho_s, rho_b);
  CHECK(max_abs(partial_trace_bath(rho, shape) - rho_s) < 1e-13);
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
  const DensityMatrix rho = bell_state_2x2();
  const DensityMatrix sys = partial_trace_bath(rho);
  CHECK(max_abs(sys.rho - 0.5 * Matrix::Identity(2, 2)) < 1e-14);
  sys.validate();
}

TEST_CASE("partial trace matches the index-sum oracle on random 4x4 states") {
  Rng rng(22);
  const SpaceShape shape{4, 4};
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix rho = oracles::random_density(rng, 16);
    const Matrix mine = partial_trace_bath(rho, shape);
    const Matrix ref = oracles::partial_trace_indexsum(rho, 4, 4);
    CHECK(max_abs(mine - ref) < 1e-13);
  }
}

TEST_CASE("partial trace rejects dimension mismatch") {
  const SpaceShape shape{2, 3};
  const Matrix rho = Matrix::Identity(5, 5) / 5.0;
  CHECK_THROWS_AS(partial_trace_bath(rho, shape), SpecError);
}

TEST_CASE("trace norm basics") {
  CHECK(trace_norm(Matrix::Zero(3, 3)) == doctest::Approx(0.0));

  // |0><0| - |1><1| has trace norm 2
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 1;
  x(1, 1) = -1;
  CHECK(trace_norm(x) == doctest::Approx(2.0));

  // |0><0| - |+><+| has eigenvalues +-1/sqrt(2)
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1;
  CHECK(trace_norm(zero - plus) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("trace norm rejects non-Hermitian input") {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = Complex(1.0, 0.0);  // strictly upper triangular
  CHECK_THROWS_AS(trace_norm(x), SpecError);
}

TEST_CASE("operator norm basics and power-iteration oracle") {
  CHECK(operator_norm(Matrix::Identity(7, 7)) == doctest::Approx(1.0));

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = -3;
  d(1, 1) = 2;
  CHECK(operator_norm(d) == doctest::Approx(3.0));

  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracles::random_hermitian(rng, 8);
    CHECK(operator_norm(x) ==
          doctest::Approx(oracles::operator_norm_power(x)).epsilon(1e-8));
  }
}

TEST_CASE("tensor product identities") {
  CHECK(max_abs(tensor_product(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) -
                Matrix::Identity(4, 4)) == 0.0);

  Rng rng(44);
  const Matrix a = oracles::random_matrix(rng, 2);
  const Matrix b = oracles::random_matrix(rng, 2);
  const Matrix ab = tensor_product(a, b);
  CHECK(std::abs(ab.trace() - a.trace() * b.trace()) < 1e-13);
  CHECK(max_abs(ab - oracles::kron_naive(a, b)) == 0.0);

  // composition with the index-sum oracle: Tr_B(A (x) B) = Tr(B) A
  const SpaceShape shape{2, 2};
  const Matrix reduced = partial_trace_bath(ab, shape);
  CHECK(max_abs(reduced - b.trace() * a) < 1e-13);
}

TEST_CASE("density matrix invariants are enforced") {
  const SpaceShape shape{2, 2};
  SUBCASE("trace deviation") {
    Matrix rho = Matrix::Identity(4, 4) / 4.0;
    rho(0, 0) += 1e-6;
    CHECK_THROWS_AS(make_density(Space::global, shape, rho), SpecError);
  }
  SUBCASE("negativity") {
    Matrix rho = Matrix::Identity(4, 4) / 2.0;
    rho(0, 0) = -0.5;
    CHECK_THROWS_AS(make_density(Space::global, shape, rho), SpecError);
  }
  SUBCASE("valid state passes") {
    Rng rng(55);
    const Matrix rho = oracles::random_density(rng, 4);
    CHECK_NOTHROW(make_density(Space::global, shape, rho));
  }
}

TEST_CASE("pure state normalization gate") {
  const SpaceShape shape{2, 2};
  Vector v = Vector::Zero(4);
  v(0) = Complex(1.0 + 1e-6, 0.0);
  CHECK_THROWS_AS((PureState{Space::global, shape, v}.validate()), SpecError);
}

// properties over random ensembles

TEST_CASE("partial trace preserves trace and positivity on random states") {
  Rng rng(66);
  const SpaceShape shape{2, 4};
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix rho = oracles::random_density(rng, 8);
    const Matrix sigma = partial_trace_bath(rho, shape);
    CHECK(std::abs(sigma.trace().real() - 1.0) < 1e-12);
    CHECK(std::abs(sigma.trace().imag()) < 1e-12);
    const auto ev = eigh_values(sigma, "test");
    CHECK(ev(0) > -1e-10);
  }
}

TEST_CASE("trace norm contracts under the partial trace") {
  Rng rng(77);
  const SpaceShape shape{2, 4};
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix rho = oracles::random_density(rng, 8);
    const Matrix sigma = oracles::random_density(rng, 8);
    const double global_dist = trace_norm(rho - sigma);
    const double reduced_dist =
        trace_norm(partial_trace_bath(rho, shape) - partial_trace_bath(sigma, shape));
    CHECK(reduced_dist <= global_dist + 1e-10);
  }
}

TEST_CASE("trace norm is a norm") {
  Rng rng(88);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix x = oracles::random_hermitian(rng, 6);
    const Matrix y = oracles::random_hermitian(rng, 6);
    CHECK(trace_norm(x + y) <= trace_norm(x) + trace_norm(y) + 1e-10);
    const double alpha = rng.uniform(-3.0, 3.0);
    CHECK(trace_norm(alpha * x) ==
          doctest::Approx(std::abs(alpha) * trace_norm(x)).epsilon(1e-10));
  }
}

TEST_CASE("operator norm <= trace norm <= rank * operator norm") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.index(6));
    const Matrix x = oracles::random_hermitian(rng, n);
    const double op = operator_norm(x);
    const double tr = trace_norm(x);
    CHECK(op <= tr + 1e-12);
    CHECK(tr <= static_cast<double>(n) * op + 1e-12);
  }
}
