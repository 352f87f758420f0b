#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "spx/evaluation.hpp"

using spx::Matrix;

namespace {

// one constant feature vector per class: perfectly separable, chosen_k = 1
spx::FeatureDataset separable_dataset(int n_classes, int per_class, int crops, int dim,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  spx::FeatureDataset dataset;
  for (int c = 0; c < n_classes; ++c) {
    spx::Vector center(dim);
    std::normal_distribution<double> gauss(0.0, 5.0);
    for (int d = 0; d < dim; ++d) center(d) = gauss(rng);
    for (int i = 0; i < per_class; ++i) {
      Matrix features(crops, dim);
      features.rowwise() = center.transpose();
      dataset.add_image({"c" + std::to_string(c) + "-i" + std::to_string(i),
                         "class" + std::to_string(c), features});
    }
  }
  return dataset;
}

spx::EvalConfig fast_config() {
  spx::EvalConfig config;
  config.n_episodes = 40;
  config.way = 3;
  config.queries_per_class = 2;
  config.selection.restarts_per_k = 1;
  config.selection.solver.outer_iters = 10;
  config.threads = 2;
  return config;
}

bool reports_equal(const spx::EvalReport& a, const spx::EvalReport& b) {
  if (a.accuracy_mean != b.accuracy_mean) return false;
  if (a.ci95_halfwidth != b.ci95_halfwidth) return false;
  if (a.episodes_used != b.episodes_used) return false;
  return a.episode_accuracies == b.episode_accuracies;
}

}  // namespace

TEST_CASE("match_vertices: permuted copy scores zero and recovers the permutation") {
  std::mt19937_64 rng(400);
  const Matrix truth = oracle::random_matrix(3, 5, rng);
  Matrix permuted(3, 5);
  permuted.row(0) = truth.row(2);
  permuted.row(1) = truth.row(0);
  permuted.row(2) = truth.row(1);
  const auto [assignment, err] = spx::match_vertices(permuted, truth);
  CHECK(err == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(assignment == std::vector<int>{2, 0, 1});
}

TEST_CASE("match_vertices: uniform shift gives the shift norm") {
  std::mt19937_64 rng(401);
  const Matrix truth = oracle::random_matrix(3, 4, rng);
  spx::Vector shift = oracle::random_matrix(4, 1, rng);
  shift *= 2.5 / shift.norm();
  Matrix moved = truth;
  moved.rowwise() += shift.transpose();
  const auto [assignment, err] = spx::match_vertices(moved, truth);
  CHECK(err == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("match_vertices agrees with exhaustive search") {
  std::mt19937_64 rng(402);
  for (int k : {1, 2, 3, 4, 5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix estimated = oracle::random_matrix(k, 4, rng);
      const Matrix truth = oracle::random_matrix(k, 4, rng);
      const auto [fast_assign, fast_err] = spx::match_vertices(estimated, truth);
      const auto [slow_assign, slow_err] = oracle::exhaustive_match(estimated, truth);
      CHECK(fast_err == doctest::Approx(slow_err).epsilon(1e-10));
    }
  }
}

TEST_CASE("match_vertices: shape mismatch throws") {
  CHECK_THROWS_AS(spx::match_vertices(Matrix::Zero(2, 3), Matrix::Zero(3, 3)),
                  spx::DimensionError);
}

TEST_CASE("recovery_score: k=1 noise-free is exact") {
  auto [features, truth] = spx::generate_synthetic(1, 50, 6, 0.0, 1.0, 1.0, 7);
  spx::SelectionConfig config;
  const spx::RecoveryReport report = spx::recovery_score(features, truth, config);
  CHECK(report.chosen_k == 1);
  CHECK(report.true_k == 1);
  REQUIRE(report.vertex_error.has_value());
  CHECK(*report.vertex_error < 1e-6);
}

TEST_CASE("recovery_score: three separated vertices are recovered") {
  auto [features, truth] = spx::generate_synthetic(3, 200, 8, 0.0, 10.0, 1.0, 21);
  spx::SelectionConfig config;
  config.solver.lambda = 0.001;
  config.solver.outer_iters = 250;
  const spx::RecoveryReport report = spx::recovery_score(features, truth, config);
  CHECK(report.chosen_k == 3);
  REQUIRE(report.vertex_error.has_value());
  CHECK(*report.vertex_error < 0.1);
  REQUIRE(report.weight_error.has_value());
  CHECK(*report.weight_error < 0.05);
}

TEST_CASE("run_episodes: perfectly separable dataset scores 1.0 with zero ci") {
  const spx::FeatureDataset dataset = separable_dataset(5, 4, 3, 6, 1);
  spx::EvalConfig config = fast_config();
  const spx::EvalReport report = spx::run_episodes(dataset, config);
  CHECK(report.accuracy_mean == 1.0);
  CHECK(report.ci95_halfwidth == 0.0);
  CHECK(report.episodes_used == config.n_episodes);
}

TEST_CASE("run_episodes: ci formula matches the definition") {
  // overlapping classes so per-episode accuracies actually vary
  std::mt19937_64 rng(403);
  spx::FeatureDataset dataset;
  for (int c = 0; c < 6; ++c) {
    for (int i = 0; i < 4; ++i) {
      Matrix features = oracle::random_matrix(3, 4, rng);
      features.array() += 0.3 * c;
      dataset.add_image({"c" + std::to_string(c) + "-i" + std::to_string(i),
                         "class" + std::to_string(c), features});
    }
  }
  spx::EvalConfig config = fast_config();
  const spx::EvalReport report = spx::run_episodes(dataset, config);
  const long n = report.episodes_used;
  double mean = 0.0;
  for (double a : report.episode_accuracies) mean += a;
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (double a : report.episode_accuracies) sq += (a - mean) * (a - mean);
  const double expected =
      n > 1 ? 1.96 * std::sqrt(sq / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))
            : 0.0;
  CHECK(report.ci95_halfwidth == doctest::Approx(expected).epsilon(1e-12));
  CHECK(report.accuracy_mean == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("run_episodes: deterministic per seed") {
  const spx::FeatureDataset dataset = separable_dataset(5, 4, 2, 4, 3);
  spx::EvalConfig config = fast_config();
  config.seed = 12345;
  const spx::EvalReport a = spx::run_episodes(dataset, config);
  const spx::EvalReport b = spx::run_episodes(dataset, config);
  CHECK(reports_equal(a, b));
}

TEST_CASE("run_episodes: cached and uncached runs are identical") {
  const spx::FeatureDataset dataset = separable_dataset(4, 3, 2, 4, 4);
  spx::EvalConfig config = fast_config();
  config.n_episodes = 10;
  config.cache_representations = true;
  const spx::EvalReport cached = spx::run_episodes(dataset, config);
  config.cache_representations = false;
  const spx::EvalReport uncached = spx::run_episodes(dataset, config);
  CHECK(reports_equal(cached, uncached));
}

TEST_CASE("run_episodes: relabeling classes changes no number") {
  std::mt19937_64 rng(405);
  spx::FeatureDataset dataset;
  spx::FeatureDataset relabeled;
  const std::vector<std::string> names = {"cat", "dog", "owl", "fox"};
  const std::vector<std::string> renames = {"x-17", "zq", "aa", "m"};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 4; ++i) {
      const Matrix features = oracle::random_matrix(3, 4, rng);
      const std::string id = "c" + std::to_string(c) + "-i" + std::to_string(i);
      dataset.add_image({id, names[c], features});
      relabeled.add_image({id, renames[c], features});
    }
  }
  spx::EvalConfig config = fast_config();
  config.n_episodes = 25;
  const spx::EvalReport a = spx::run_episodes(dataset, config);
  const spx::EvalReport b = spx::run_episodes(relabeled, config);
  CHECK(reports_equal(a, b));
}

TEST_CASE("run_episodes: k1 filter is a no-op when every image has one vertex") {
  const spx::FeatureDataset dataset = separable_dataset(5, 4, 2, 4, 5);
  spx::EvalConfig config = fast_config();
  config.n_episodes = 15;
  const spx::EvalReport plain = spx::run_episodes(dataset, config);
  config.k1_filter = true;
  const spx::EvalReport filtered = spx::run_episodes(dataset, config);
  CHECK(reports_equal(plain, filtered));
}

TEST_CASE("run_episodes: filtered pool too small reports pool sizes") {
  // two-vertex images: chosen_k should be 2, so the k1 filter empties the pool
  spx::FeatureDataset dataset;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i) {
      auto [features, truth] =
          spx::generate_synthetic(2, 30, 4, 0.0, 8.0, 1.0, 100 * c + i);
      dataset.add_image({"c" + std::to_string(c) + "-i" + std::to_string(i),
                         "class" + std::to_string(c), features});
    }
  }
  spx::EvalConfig config = fast_config();
  config.way = 3;
  config.queries_per_class = 1;
  config.k1_filter = true;
  try {
    spx::run_episodes(dataset, config);
    FAIL("expected InvalidInputError");
  } catch (const spx::InvalidInputError& e) {
    CHECK(std::string(e.what()).find("pool") != std::string::npos);
  }
}

TEST_CASE("run_lambda_sweep: one report per lambda") {
  const spx::FeatureDataset dataset = separable_dataset(4, 3, 2, 4, 6);
  spx::EvalConfig config = fast_config();
  config.n_episodes = 8;
  config.lambda_sweep = {0.01, 0.05, 0.2};
  const auto sweep = spx::run_lambda_sweep(dataset, config);
  REQUIRE(sweep.size() == 3);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CHECK(sweep[i].first == config.lambda_sweep[i]);
    CHECK(sweep[i].second.config.selection.solver.lambda == config.lambda_sweep[i]);
    CHECK(sweep[i].second.episodes_used == 8);
  }
}

TEST_CASE("EvalReport JSON round-trips") {
  namespace fs = std::filesystem;
  const spx::FeatureDataset dataset = separable_dataset(4, 3, 2, 4, 7);
  spx::EvalConfig config = fast_config();
  config.n_episodes = 6;
  const spx::EvalReport report = spx::run_episodes(dataset, config);
  const fs::path path =
      fs::temp_directory_path() / ("spx-report-" + std::to_string(std::random_device{}()) + ".json");
  spx::save_report(report, path);
  const spx::EvalReport loaded = spx::load_report(path);
  fs::remove(path);
  CHECK(reports_equal(report, loaded));
  CHECK(loaded.config.way == config.way);
  CHECK(loaded.config.selection.solver.outer_iters == config.selection.solver.outer_iters);
}
