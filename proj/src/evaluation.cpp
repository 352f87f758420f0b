#include "spx/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace spx {

namespace {

constexpr std::uint64_t kRepStream = 0x726570;      // per-image representation seeds
constexpr std::uint64_t kEpisodeStream = 0x657069;  // per-episode sampling seeds

void check_config(const EvalConfig& c) {
  if (c.n_episodes < 1) throw InvalidInputError("n_episodes must be >= 1");
  if (c.way < 1) throw InvalidInputError("way must be >= 1");
  if (c.queries_per_class < 1) throw InvalidInputError("queries_per_class must be >= 1");
  if (c.alpha < 0.0 || c.alpha > 1.0) throw InvalidInputError("alpha must be in [0, 1]");
  if (c.threads < 0) throw InvalidInputError("threads must be >= 0");
}

ImageRepresentation build_representation(const FeatureDataset& dataset, int index,
                                         const EvalConfig& config) {
  const ImageFeatures& image = dataset.image_at(index);
  SelectionConfig sel = config.selection;
  sel.solver.seed = derive_seed(config.seed, kRepStream, static_cast<std::uint64_t>(index));
  const SelectionResult result = select_k(image.features, sel);
  return make_representation(image.image_id, image.features, result.chosen(), config.alpha);
}

std::vector<ImageRepresentation> build_all_representations(const FeatureDataset& dataset,
                                                           const EvalConfig& config) {
  const int n = dataset.n_images();
  std::vector<ImageRepresentation> reps(n);
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));

  if (threads == 1) {
    for (int i = 0; i < n; ++i) reps[i] = build_representation(dataset, i, config);
    return reps;
  }

  // per-image seeds are derived by index, so work order cannot change results
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> failures(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          reps[i] = build_representation(dataset, i, config);
        }
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return reps;
}

}  // namespace

EvalReport run_episodes(const FeatureDataset& dataset, const EvalConfig& config) {
  check_config(config);
  if (dataset.n_images() == 0) throw InvalidInputError("empty dataset");

  // Representations are computed on the full dataset; the k1 filter only
  // shrinks the episode sampling pool.
  std::vector<ImageRepresentation> cached;
  const bool need_upfront = config.cache_representations || config.k1_filter;
  if (need_upfront) cached = build_all_representations(dataset, config);

  const FeatureDataset* pool = &dataset;
  FeatureDataset filtered;
  if (config.k1_filter) {
    for (int i = 0; i < dataset.n_images(); ++i) {
      if (cached[i].chosen_k == 1) filtered.add_image(dataset.image_at(i));
    }
    pool = &filtered;
  }

  auto rep_of = [&](const std::string& image_id) -> ImageRepresentation {
    const int index = dataset.index_of(image_id);
    if (config.cache_representations) return cached[index];
    return build_representation(dataset, index, config);
  };

  EvalReport report;
  report.config = config;
  report.episode_accuracies.reserve(config.n_episodes);
  const int queries_total = config.way * config.queries_per_class;

  for (long e = 0; e < config.n_episodes; ++e) {
    EpisodeSpec episode;
    try {
      episode = sample_episode(*pool, config.way, config.queries_per_class,
                               derive_seed(config.seed, kEpisodeStream, static_cast<std::uint64_t>(e)));
    } catch (const InvalidInputError& err) {
      if (!config.k1_filter) throw;
      std::ostringstream msg;
      msg << "k1-filtered pool too small for an episode: kept " << pool->n_images() << "/"
          << dataset.n_images() << " images in " << pool->class_labels().size() << "/"
          << dataset.class_labels().size() << " classes (" << err.what() << ")";
      throw InvalidInputError(msg.str());
    }

    std::vector<SupportImage> supports;
    supports.reserve(config.way);
    for (int slot = 0; slot < config.way; ++slot) {
      supports.push_back({rep_of(episode.support_ids[slot]), episode.class_labels[slot]});
    }

    int correct = 0;
    for (std::size_t q = 0; q < episode.query_ids.size(); ++q) {
      const ClassificationResult result = classify(rep_of(episode.query_ids[q]), supports);
      if (result.predicted_label == episode.class_labels[episode.query_class[q]]) ++correct;
    }
    report.episode_accuracies.push_back(static_cast<double>(correct) / queries_total);
  }

  report.episodes_used = static_cast<long>(report.episode_accuracies.size());
  double sum = 0.0;
  for (double a : report.episode_accuracies) sum += a;
  report.accuracy_mean = sum / static_cast<double>(report.episodes_used);
  if (report.episodes_used > 1) {
    double sq = 0.0;
    for (double a : report.episode_accuracies) {
      const double d = a - report.accuracy_mean;
      sq += d * d;
    }
    const double sample_std = std::sqrt(sq / static_cast<double>(report.episodes_used - 1));
    report.ci95_halfwidth = 1.96 * sample_std / std::sqrt(static_cast<double>(report.episodes_used));
  }
  return report;
}

std::vector<std::pair<double, EvalReport>> run_lambda_sweep(const FeatureDataset& dataset,
                                                            const EvalConfig& config) {
  if (config.lambda_sweep.empty()) throw InvalidInputError("lambda_sweep is empty");
  std::vector<std::pair<double, EvalReport>> out;
  for (double lambda : config.lambda_sweep) {
    EvalConfig point = config;
    point.lambda_sweep.clear();
    point.selection.solver.lambda = lambda;  // affects both selection and extraction
    out.emplace_back(lambda, run_episodes(dataset, point));
  }
  return out;
}

namespace {

// shortest augmenting path assignment (Jonker-Volgenant style), O(n^3);
// returns row -> column of the minimum-total-cost perfect matching
std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::pair<std::vector<int>, double> match_vertices(const Matrix& estimated, const Matrix& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols()) {
    std::ostringstream msg;
    msg << "estimated is " << estimated.rows() << "x" << estimated.cols() << ", truth is "
        << truth.rows() << "x" << truth.cols();
    throw DimensionError(msg.str());
  }
  const int k = static_cast<int>(estimated.rows());
  Matrix cost(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) cost(i, j) = (estimated.row(i) - truth.row(j)).norm();
  }
  std::vector<int> assignment = min_cost_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += cost(i, assignment[i]);
  return {std::move(assignment), total / k};
}

RecoveryReport recovery_score(const Matrix& features, const SyntheticTruth& truth,
                              const SelectionConfig& config) {
  RecoveryReport report;
  report.true_k = static_cast<int>(truth.true_vertices.rows());
  const SelectionResult selection = select_k(features, config);
  report.chosen_k = selection.chosen_k;
  if (report.chosen_k != report.true_k) return report;

  const SimplexModel& model = selection.chosen();
  auto [assignment, vertex_error] = match_vertices(model.vertices, truth.true_vertices);
  report.vertex_error = vertex_error;

  // line up estimated weight columns with the truth columns they matched
  Matrix aligned(model.weights.rows(), model.weights.cols());
  for (int k = 0; k < report.true_k; ++k) aligned.col(assignment[k]) = model.weights.col(k);
  report.weight_error =
      0.5 * (aligned - truth.true_weights).cwiseAbs().rowwise().sum().mean();
  return report;
}

namespace {

nlohmann::json config_to_json(const EvalConfig& c) {
  return {
      {"n_episodes", c.n_episodes},
      {"way", c.way},
      {"queries_per_class", c.queries_per_class},
      {"alpha", c.alpha},
      {"k1_filter", c.k1_filter},
      {"lambda_sweep", c.lambda_sweep},
      {"seed", c.seed},
      {"cache_representations", c.cache_representations},
      {"threads", c.threads},
      {"selection",
       {{"k_max", c.selection.k_max},
        {"ratio_threshold", c.selection.ratio_threshold},
        {"restarts_per_k", c.selection.restarts_per_k},
        {"solver",
         {{"lambda", c.selection.solver.lambda},
          {"outer_iters", c.selection.solver.outer_iters},
          {"w_steps_per_outer", c.selection.solver.w_steps_per_outer},
          {"learning_rate", c.selection.solver.learning_rate},
          {"objective_rel_tol", c.selection.solver.objective_rel_tol},
          {"ridge_eps", c.selection.solver.ridge_eps},
          {"seed", c.selection.solver.seed}}}}},
  };
}

EvalConfig config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  c.n_episodes = j.at("n_episodes").get<long>();
  c.way = j.at("way").get<int>();
  c.queries_per_class = j.at("queries_per_class").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.k1_filter = j.at("k1_filter").get<bool>();
  c.lambda_sweep = j.at("lambda_sweep").get<std::vector<double>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.cache_representations = j.at("cache_representations").get<bool>();
  c.threads = j.at("threads").get<int>();
  const auto& sel = j.at("selection");
  c.selection.k_max = sel.at("k_max").get<int>();
  c.selection.ratio_threshold = sel.at("ratio_threshold").get<double>();
  c.selection.restarts_per_k = sel.at("restarts_per_k").get<int>();
  const auto& solver = sel.at("solver");
  c.selection.solver.lambda = solver.at("lambda").get<double>();
  c.selection.solver.outer_iters = solver.at("outer_iters").get<int>();
  c.selection.solver.w_steps_per_outer = solver.at("w_steps_per_outer").get<int>();
  c.selection.solver.learning_rate = solver.at("learning_rate").get<double>();
  c.selection.solver.objective_rel_tol = solver.at("objective_rel_tol").get<double>();
  c.selection.solver.ridge_eps = solver.at("ridge_eps").get<double>();
  c.selection.solver.seed = solver.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["accuracy_mean"] = report.accuracy_mean;
  doc["ci95_halfwidth"] = report.ci95_halfwidth;
  doc["episodes_used"] = report.episodes_used;
  doc["episode_accuracies"] = report.episode_accuracies;
  doc["config"] = config_to_json(report.config);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::bad_path, "cannot open '" + path.string() + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    EvalReport report;
    report.accuracy_mean = doc.at("accuracy_mean").get<double>();
    report.ci95_halfwidth = doc.at("ci95_halfwidth").get<double>();
    report.episodes_used = doc.at("episodes_used").get<long>();
    report.episode_accuracies = doc.at("episode_accuracies").get<std::vector<double>>();
    report.config = config_from_json(doc.at("config"));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::bad_field, "invalid report JSON: " + std::string(e.what()));
  }
}

}  // namespace spx
