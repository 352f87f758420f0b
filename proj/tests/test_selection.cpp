#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spx/model_selection.hpp"
#include "spx/synthetic.hpp"

using spx::Matrix;

TEST_CASE("choose_k_from_errors: forced walks") {
  CHECK(spx::choose_k_from_errors(std::vector<double>{10.0, 2.0, 1.9}, 1.5) == 2);
  CHECK(spx::choose_k_from_errors(std::vector<double>{1.0, 0.9, 0.85}, 1.5) == 1);
  CHECK(spx::choose_k_from_errors(std::vector<double>{5.0, 1.0, 0.1}, 1.5) == 3);
  CHECK(spx::choose_k_from_errors(std::vector<double>{1.0}, 1.5) == 1);
}

TEST_CASE("choose_k_from_errors: zero guards") {
  // a perfect fit is accepted unless the previous error is already perfect
  CHECK(spx::choose_k_from_errors(std::vector<double>{0.0, 0.0, 0.0}, 1.5) == 1);
  CHECK(spx::choose_k_from_errors(std::vector<double>{5.0, 0.0, 0.0}, 1.5) == 2);
  CHECK(spx::choose_k_from_errors(std::vector<double>{5.0, 1.0, 0.0}, 1.5) == 3);
}

TEST_CASE("choose_k_from_errors matches the scalar reference on random sequences") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> uniform(0.0, 4.0);
  std::uniform_int_distribution<int> len(1, 6);
  std::bernoulli_distribution zero(0.15);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> errors(len(rng));
    for (double& e : errors) e = zero(rng) ? 0.0 : uniform(rng);
    CHECK(spx::choose_k_from_errors(errors, 1.5) == oracle::reference_choose_k(errors, 1.5));
  }
}

TEST_CASE("select_k: constant cloud picks k = 1 via the zero-error guard") {
  Matrix features(10, 4);
  features.rowwise() = Eigen::RowVector4d(1.0, -2.0, 0.5, 3.0);
  spx::SelectionConfig config;
  const spx::SelectionResult result = spx::select_k(features, config);
  CHECK(result.chosen_k == 1);
  CHECK(result.errors[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(result.chosen().k == 1);
}

TEST_CASE("select_k: recorded errors are nonnegative and chosen_k within range") {
  std::mt19937_64 rng(102);
  const Matrix features = oracle::random_matrix(20, 5, rng);
  spx::SelectionConfig config;
  const spx::SelectionResult result = spx::select_k(features, config);
  CHECK(result.chosen_k >= 1);
  CHECK(result.chosen_k <= config.k_max);
  CHECK(result.errors.size() == 3);
  for (double e : result.errors) CHECK(e >= 0.0);
  CHECK(result.chosen_k ==
        oracle::reference_choose_k(result.errors, config.ratio_threshold));
}

TEST_CASE("select_k: recovers the true k on separated synthetic clouds") {
  int hits = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const int true_k = 1 + seed % 3;
    auto [features, truth] = spx::generate_synthetic(true_k, 150, 8, 0.0, 10.0, 1.0, seed);
    spx::SelectionConfig config;
    config.solver.seed = seed;
    if (spx::select_k(features, config).chosen_k == true_k) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("best_of_restarts: error non-increasing in the restart budget") {
  std::mt19937_64 rng(103);
  const Matrix features = oracle::random_matrix(30, 4, rng, 3.0);
  spx::SolverConfig config;
  config.seed = 17;
  double previous = std::numeric_limits<double>::infinity();
  for (int restarts : {1, 2, 4}) {
    const double err = spx::best_of_restarts(features, 2, restarts, config).recon_error;
    CHECK(err <= previous + 1e-15);
    previous = err;
  }
}

TEST_CASE("select_k: rejects too-small inputs") {
  const Matrix features = Matrix::Zero(2, 3);
  spx::SelectionConfig config;  // k_max 3 > 2 rows
  CHECK_THROWS_AS(spx::select_k(features, config), spx::InvalidInputError);
}
