#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spx/classifier.hpp"

using spx::Matrix;
using spx::Vector;

namespace {

spx::ImageRepresentation rep_of(const std::string& id, const Matrix& vertices) {
  spx::ImageRepresentation rep;
  rep.image_id = id;
  rep.shrunk_vertices = vertices;
  rep.crop_mean = vertices.colwise().mean();
  rep.chosen_k = static_cast<int>(vertices.rows());
  return rep;
}

Matrix random_vertices(std::mt19937_64& rng, int k, int dim) {
  return oracle::random_matrix(k, dim, rng, 2.0);
}

}  // namespace

TEST_CASE("shrink_vertices: alpha 1 is the identity, alpha 0 collapses to the mean") {
  std::mt19937_64 rng(200);
  const Matrix vertices = random_vertices(rng, 3, 4);
  const Vector mean = oracle::random_matrix(4, 1, rng);
  const Matrix kept = spx::shrink_vertices(vertices, mean, 1.0);
  CHECK((kept - vertices).norm() == 0.0);
  const Matrix collapsed = spx::shrink_vertices(vertices, mean, 0.0);
  for (int i = 0; i < 3; ++i) CHECK((collapsed.row(i).transpose() - mean).norm() == 0.0);
}

TEST_CASE("shrink_vertices: direct substitution") {
  Matrix vertices(1, 2);
  vertices << 2.0, 0.0;
  Vector mean(2);
  mean << 0.0, 0.0;
  const Matrix shrunk = spx::shrink_vertices(vertices, mean, 0.75);
  CHECK(shrunk(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(shrunk(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("shrink_vertices: dimension mismatch throws") {
  const Matrix vertices = Matrix::Zero(2, 3);
  const Vector mean = Vector::Zero(4);
  CHECK_THROWS_AS(spx::shrink_vertices(vertices, mean, 0.5), spx::DimensionError);
}

TEST_CASE("classify: exact vertex match wins with distance zero") {
  std::mt19937_64 rng(201);
  const Matrix shared = random_vertices(rng, 2, 5);
  std::vector<spx::SupportImage> supports;
  supports.push_back({rep_of("s0", random_vertices(rng, 3, 5)), "a"});
  supports.push_back({rep_of("s1", shared), "b"});
  const auto result = spx::classify(rep_of("q", shared.row(1)), supports);
  CHECK(result.predicted_label == "b");
  CHECK(result.best_distance == 0.0);
  CHECK(result.support_image_id == "s1");
  CHECK(result.support_vertex == 1);
}

TEST_CASE("classify: hand-enumerated three-support example") {
  Matrix s0(1, 2), s1(1, 2), s2(1, 2), q(1, 2);
  s0 << 0.0, 0.0;
  s1 << 10.0, 0.0;
  s2 << 0.0, 10.0;
  q << 1.0, 0.0;
  std::vector<spx::SupportImage> supports = {
      {rep_of("s0", s0), "zero"}, {rep_of("s1", s1), "right"}, {rep_of("s2", s2), "up"}};
  const auto result = spx::classify(rep_of("q", q), supports);
  CHECK(result.predicted_label == "zero");
  CHECK(result.best_distance == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(result.support_index == 0);
}

TEST_CASE("classify: empty supports throw") {
  std::mt19937_64 rng(202);
  CHECK_THROWS_AS(spx::classify(rep_of("q", random_vertices(rng, 1, 3)), {}),
                  spx::InvalidInputError);
}

TEST_CASE("classify: ties break toward the lowest support index") {
  Matrix v(1, 2);
  v << 1.0, 1.0;
  std::vector<spx::SupportImage> supports = {{rep_of("s0", v), "first"},
                                             {rep_of("s1", v), "second"}};
  const auto result = spx::classify(rep_of("q", v), supports);
  CHECK(result.predicted_label == "first");
  CHECK(result.support_index == 0);

  // within a support, the lower vertex index wins the tie
  Matrix two_equal(2, 2);
  two_equal << 1.0, 1.0, 1.0, 1.0;
  std::vector<spx::SupportImage> one = {{rep_of("s", two_equal), "s"}};
  const auto vertex_tie = spx::classify(rep_of("q", v), one);
  CHECK(vertex_tie.support_vertex == 0);
}

TEST_CASE("classify agrees with the brute-force oracle on random instances") {
  std::mt19937_64 rng(203);
  std::uniform_int_distribution<int> pick_k(1, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = 4;
    std::vector<spx::SupportImage> supports;
    for (int s = 0; s < 5; ++s) {
      supports.push_back(
          {rep_of("s" + std::to_string(s), random_vertices(rng, pick_k(rng), dim)),
           "label" + std::to_string(s)});
    }
    const auto query = rep_of("q", random_vertices(rng, pick_k(rng), dim));
    const auto fast = spx::classify(query, supports);
    const auto slow = oracle::brute_classify(query, supports);
    CHECK(fast.predicted_label == slow.label);
    CHECK(fast.best_distance == doctest::Approx(slow.distance).epsilon(1e-12));
    CHECK(fast.support_index == slow.support_index);
    CHECK(fast.support_vertex == slow.support_vertex);
    CHECK(fast.query_vertex == slow.query_vertex);
  }
}

TEST_CASE("classify: invariant under global rigid transforms") {
  std::mt19937_64 rng(204);
  const int dim = 4;
  // random rotation via QR
  Matrix gauss = oracle::random_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix rotation = qr.householderQ();
  if (rotation.determinant() < 0) rotation.col(0) *= -1.0;
  const Vector shift = oracle::random_matrix(dim, 1, rng, 3.0);

  std::uniform_int_distribution<int> pick_k(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<spx::SupportImage> supports, moved_supports;
    for (int s = 0; s < 4; ++s) {
      const Matrix v = random_vertices(rng, pick_k(rng), dim);
      Matrix moved = v * rotation.transpose();
      moved.rowwise() += shift.transpose();
      supports.push_back({rep_of("s" + std::to_string(s), v), "l" + std::to_string(s)});
      moved_supports.push_back({rep_of("s" + std::to_string(s), moved), "l" + std::to_string(s)});
    }
    const Matrix q = random_vertices(rng, pick_k(rng), dim);
    Matrix q_moved = q * rotation.transpose();
    q_moved.rowwise() += shift.transpose();
    CHECK(spx::classify(rep_of("q", q), supports).predicted_label ==
          spx::classify(rep_of("q", q_moved), moved_supports).predicted_label);
  }
}

TEST_CASE("classify with k=1 and alpha=0 equals nearest-mean classification") {
  std::mt19937_64 rng(205);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 6;
    std::vector<spx::SupportImage> supports;
    std::vector<Vector> means;
    for (int s = 0; s < 5; ++s) {
      const Matrix features = oracle::random_matrix(12, dim, rng);
      const Vector mean = features.colwise().mean();
      spx::ImageRepresentation rep;
      rep.image_id = "s" + std::to_string(s);
      rep.crop_mean = mean;
      rep.shrunk_vertices = spx::shrink_vertices(mean.transpose(), mean, 0.0);
      rep.chosen_k = 1;
      supports.push_back({rep, "l" + std::to_string(s)});
      means.push_back(mean);
    }
    const Matrix query_features = oracle::random_matrix(9, dim, rng);
    const Vector query_mean = query_features.colwise().mean();
    spx::ImageRepresentation query;
    query.image_id = "q";
    query.crop_mean = query_mean;
    query.shrunk_vertices = spx::shrink_vertices(query_mean.transpose(), query_mean, 0.0);
    query.chosen_k = 1;

    int nearest = 0;
    for (int s = 1; s < 5; ++s) {
      if ((means[s] - query_mean).norm() < (means[nearest] - query_mean).norm()) nearest = s;
    }
    CHECK(spx::classify(query, supports).predicted_label == supports[nearest].label);
  }
}
