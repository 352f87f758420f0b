#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spx/classifier.hpp"
#include "spx/dataset.hpp"
#include "spx/episodes.hpp"
#include "spx/evaluation.hpp"
#include "spx/model_io.hpp"
#include "spx/model_selection.hpp"
#include "spx/projection.hpp"
#include "spx/solver.hpp"
#include "spx/synthetic.hpp"

namespace {

constexpr std::uint64_t kSelectStream = 0x73656c;  // per-image seeds in `select`
constexpr std::uint64_t kClassStream = 0x636c73;   // per-class seeds in `synth`
constexpr std::uint64_t kImageStream = 0x696d67;   // per-image seeds in `synth`

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

void add_solver_flags(CLI::App* cmd, spx::SolverConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "regularizer weight in [0,1]")
      ->capture_default_str();
  cmd->add_option("--outer-iters", cfg.outer_iters, "alternating rounds")->capture_default_str();
  cmd->add_option("--w-steps", cfg.w_steps_per_outer, "gradient steps on W per round")
      ->capture_default_str();
  cmd->add_option("--learning-rate", cfg.learning_rate, "W-step learning rate")
      ->capture_default_str();
  cmd->add_option("--rel-tol", cfg.objective_rel_tol, "relative objective decrease to stop")
      ->capture_default_str();
  cmd->add_option("--ridge-eps", cfg.ridge_eps, "fallback ridge for singular vertex systems")
      ->capture_default_str();
}

void add_selection_flags(CLI::App* cmd, spx::SelectionConfig& cfg) {
  cmd->add_option("--k-max", cfg.k_max, "largest vertex count tried")->capture_default_str();
  cmd->add_option("--ratio-threshold", cfg.ratio_threshold,
                  "error-reduction ratio required to accept k+1")
      ->capture_default_str();
  cmd->add_option("--restarts", cfg.restarts_per_k, "solver restarts per k")
      ->capture_default_str();
  add_solver_flags(cmd, cfg.solver);
}

const spx::ImageFeatures& pick_image(const spx::FeatureDataset& dataset,
                                     const std::string& image_id) {
  if (!image_id.empty()) return dataset.image(image_id);
  if (dataset.n_images() == 1) return dataset.image_at(0);
  throw spx::InvalidInputError("--image-id is required when the file holds more than one image");
}

// --- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string features_path;
  std::string image_id;
  int k = 1;
  bool print_vertices = false;
  std::string out_path;
  spx::SolverConfig solver;
};

void run_solve(const SolveArgs& args) {
  const spx::FeatureDataset dataset = spx::load_features(args.features_path);
  const spx::ImageFeatures& image = pick_image(dataset, args.image_id);
  const spx::SimplexModel model = spx::solve(image.features, args.k, args.solver);

  std::cout << "image=" << image.image_id << " k=" << model.k
            << " objective=" << fmt(model.final_objective)
            << " recon_error=" << fmt(model.recon_error)
            << " outer_rounds=" << model.objective_trace.size() - 1
            << " converged=" << (model.converged ? "true" : "false") << "\n";
  if (args.print_vertices) {
    for (Eigen::Index v = 0; v < model.vertices.rows(); ++v) {
      std::cout << "vertex " << v << ":";
      for (Eigen::Index d = 0; d < model.vertices.cols(); ++d) {
        std::cout << ' ' << fmt(model.vertices(v, d));
      }
      std::cout << "\n";
    }
  }
  if (!args.out_path.empty()) spx::save_model(model, image.image_id, args.out_path);
}

// --- select --------------------------------------------------------------

struct SelectArgs {
  std::string features_path;
  std::string image_id;
  std::string out_path;
  std::uint64_t seed = 0;
  spx::SelectionConfig selection;
};

void run_select(const SelectArgs& args) {
  const spx::FeatureDataset dataset = spx::load_features(args.features_path);
  std::vector<int> targets;
  if (args.image_id.empty()) {
    for (int i = 0; i < dataset.n_images(); ++i) targets.push_back(i);
  } else {
    targets.push_back(dataset.index_of(args.image_id));
  }

  std::ofstream csv;
  if (!args.out_path.empty()) {
    csv.open(args.out_path, std::ios::trunc);
    if (!csv) throw spx::InvalidInputError("cannot write '" + args.out_path + "'");
    csv << "image_id,label,chosen_k";
    for (int k = 1; k <= args.selection.k_max; ++k) csv << ",error_k" << k;
    csv << "\n";
  }

  for (int index : targets) {
    const spx::ImageFeatures& image = dataset.image_at(index);
    spx::SelectionConfig cfg = args.selection;
    cfg.solver.seed = spx::derive_seed(args.seed, kSelectStream, index);
    const spx::SelectionResult result = spx::select_k(image.features, cfg);

    std::cout << image.image_id << " chosen_k=" << result.chosen_k << " errors=";
    for (std::size_t i = 0; i < result.errors.size(); ++i) {
      std::cout << (i ? "," : "") << fmt(result.errors[i]);
    }
    std::cout << "\n";
    if (csv.is_open()) {
      csv << image.image_id << ',' << image.label << ',' << result.chosen_k;
      for (double err : result.errors) csv << ',' << fmt(err);
      csv << "\n";
    }
  }
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  int k = 3;
  int n = 200;
  int dim = 16;
  double sigma = 0.0;
  double separation = 10.0;
  double concentration = 1.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string truth_out;
  std::string image_id = "synthetic-0";
  std::string label = "synthetic";
  int classes = 0;           // > 0 switches to dataset mode
  int images_per_class = 0;  // required in dataset mode
};

void run_synth(const SynthArgs& args) {
  if (args.classes == 0) {
    auto [features, truth] = spx::generate_synthetic(args.k, args.n, args.dim, args.sigma,
                                                     args.separation, args.concentration,
                                                     args.seed);
    spx::FeatureDataset dataset;
    dataset.add_image({args.image_id, args.label, std::move(features)});
    spx::save_features(dataset, args.out_path);
    if (!args.truth_out.empty()) spx::save_truth(truth, args.truth_out);
    std::cout << "wrote " << args.out_path << ": 1 image, id=" << args.image_id
              << ", n=" << args.n << ", dim=" << args.dim << ", k=" << args.k << "\n";
    return;
  }

  // dataset mode: every image of a class shares that class's vertices
  if (args.images_per_class < 1) {
    throw spx::InvalidInputError("--images-per-class must be >= 1 when --classes is set");
  }
  spx::FeatureDataset dataset;
  std::vector<std::pair<std::string, spx::Matrix>> class_vertices;
  for (int c = 0; c < args.classes; ++c) {
    char label[32];
    std::snprintf(label, sizeof(label), "class-%02d", c);
    const std::uint64_t class_seed = spx::derive_seed(args.seed, kClassStream, c);
    auto [first_features, truth] = spx::generate_synthetic(
        args.k, args.n, args.dim, args.sigma, args.separation, args.concentration, class_seed);
    class_vertices.emplace_back(label, truth.true_vertices);

    for (int m = 0; m < args.images_per_class; ++m) {
      char image_id[48];
      std::snprintf(image_id, sizeof(image_id), "%s-img-%03d", label, m);
      if (m == 0) {
        dataset.add_image({image_id, label, first_features});
      } else {
        auto [features, ignored] = spx::generate_with_vertices(
            truth.true_vertices, args.n, args.sigma, args.concentration,
            spx::derive_seed(class_seed, kImageStream, m));
        dataset.add_image({image_id, label, std::move(features)});
      }
    }
  }
  spx::save_features(dataset, args.out_path);
  if (!args.truth_out.empty()) {
    nlohmann::json vertices_by_class;
    for (const auto& [label, vertices] : class_vertices) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < vertices.cols(); ++j) row.push_back(vertices(i, j));
        rows.push_back(std::move(row));
      }
      vertices_by_class[label] = std::move(rows);
    }
    std::ofstream out(args.truth_out, std::ios::trunc);
    if (!out) throw spx::InvalidInputError("cannot write '" + args.truth_out + "'");
    out << nlohmann::json{{"class_vertices", std::move(vertices_by_class)}}.dump(2) << "\n";
  }
  std::cout << "wrote " << args.out_path << ": " << dataset.n_images() << " images in "
            << args.classes << " classes, n=" << args.n << ", dim=" << args.dim << "\n";
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string features_path;
  std::string out_path;
  std::string sweep_out;
  spx::EvalConfig config;
  bool no_cache = false;
};

void run_eval(const EvalArgs& args) {
  const spx::FeatureDataset dataset = spx::load_features(args.features_path);
  spx::EvalConfig config = args.config;
  config.cache_representations = !args.no_cache;

  if (!config.lambda_sweep.empty()) {
    if (args.sweep_out.empty()) {
      throw spx::InvalidInputError("--sweep-out is required with --lambda-sweep");
    }
    const auto sweep = spx::run_lambda_sweep(dataset, config);
    std::ofstream csv(args.sweep_out, std::ios::trunc);
    if (!csv) throw spx::InvalidInputError("cannot write '" + args.sweep_out + "'");
    csv << "lambda,accuracy\n";
    for (const auto& [lambda, report] : sweep) {
      csv << fmt(lambda) << ',' << fmt(report.accuracy_mean) << "\n";
      std::cout << "lambda=" << fmt(lambda) << " accuracy=" << fmt(report.accuracy_mean)
                << " ci95=" << fmt(report.ci95_halfwidth) << " episodes=" << report.episodes_used
                << "\n";
    }
    return;
  }

  const spx::EvalReport report = spx::run_episodes(dataset, config);
  std::cout << "accuracy=" << fmt(report.accuracy_mean) << " ci95=" << fmt(report.ci95_halfwidth)
            << " episodes=" << report.episodes_used << "\n";
  if (!args.out_path.empty()) spx::save_report(report, args.out_path);
}

// --- project -------------------------------------------------------------

struct ProjectArgs {
  std::string features_path;
  std::string image_id;
  std::vector<std::string> anchors;
  std::string out_path;
  std::uint64_t seed = 0;
  spx::SelectionConfig selection;
};

// an anchor is either an inline comma-separated vector or a class label
// resolved to the mean crop feature of that class
spx::Vector resolve_anchor(const std::string& spec, const spx::FeatureDataset& dataset) {
  std::vector<double> values;
  bool numeric = true;
  std::istringstream stream(spec);
  std::string token;
  while (std::getline(stream, token, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) {
        numeric = false;
        break;
      }
    } catch (const std::exception&) {
      numeric = false;
      break;
    }
  }
  if (numeric && static_cast<int>(values.size()) == dataset.dim()) {
    return Eigen::Map<const spx::Vector>(values.data(), values.size());
  }
  if (numeric && values.size() > 1) {
    throw spx::InvalidInputError("anchor vector has " + std::to_string(values.size()) +
                                 " components, dataset dim is " + std::to_string(dataset.dim()));
  }

  const auto& members = dataset.images_of_class(spec);  // throws if unknown
  spx::Vector mean = spx::Vector::Zero(dataset.dim());
  long rows = 0;
  for (int index : members) {
    const spx::Matrix& f = dataset.image_at(index).features;
    mean += f.colwise().sum().transpose();
    rows += f.rows();
  }
  return mean / static_cast<double>(rows);
}

void run_project(const ProjectArgs& args) {
  const spx::FeatureDataset dataset = spx::load_features(args.features_path);
  const spx::ImageFeatures& image = pick_image(dataset, args.image_id);

  const spx::Vector a0 = resolve_anchor(args.anchors[0], dataset);
  const spx::Vector a1 = resolve_anchor(args.anchors[1], dataset);
  const spx::Vector a2 = resolve_anchor(args.anchors[2], dataset);
  const spx::PlaneBasis basis = spx::plane_through(a0, a1, a2);

  spx::SelectionConfig cfg = args.selection;
  cfg.solver.seed = args.seed;
  const spx::SelectionResult result = spx::select_k(image.features, cfg);
  const spx::Matrix& vertices = result.chosen().vertices;

  std::ofstream csv(args.out_path, std::ios::trunc);
  if (!csv) throw spx::InvalidInputError("cannot write '" + args.out_path + "'");
  csv << "kind,index,x,y\n";
  const auto crop_xy = spx::project_points(basis, image.features);
  for (Eigen::Index i = 0; i < crop_xy.rows(); ++i) {
    csv << "crop," << i << ',' << fmt(crop_xy(i, 0)) << ',' << fmt(crop_xy(i, 1)) << "\n";
  }
  const auto vertex_xy = spx::project_points(basis, vertices);
  for (Eigen::Index i = 0; i < vertex_xy.rows(); ++i) {
    csv << "vertex," << i << ',' << fmt(vertex_xy(i, 0)) << ',' << fmt(vertex_xy(i, 1)) << "\n";
  }
  spx::Matrix anchor_rows(3, dataset.dim());
  anchor_rows.row(0) = a0.transpose();
  anchor_rows.row(1) = a1.transpose();
  anchor_rows.row(2) = a2.transpose();
  const auto anchor_xy = spx::project_points(basis, anchor_rows);
  for (Eigen::Index i = 0; i < 3; ++i) {
    csv << "anchor," << i << ',' << fmt(anchor_xy(i, 0)) << ',' << fmt(anchor_xy(i, 1)) << "\n";
  }
  std::cout << "projected " << crop_xy.rows() << " crops and " << vertex_xy.rows()
            << " vertices (chosen_k=" << result.chosen_k << ") to " << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simplex vertex extraction and 1-shot evaluation over crop-feature files"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "fit a fixed-k simplex to one image");
  solve->add_option("--features", solve_args.features_path, "feature file (binary or CSV)")
      ->required();
  solve->add_option("--image-id", solve_args.image_id,
                    "image to fit (optional when the file holds one image)");
  solve->add_option("--k", solve_args.k, "number of vertices")->required();
  solve->add_option("--seed", solve_args.solver.seed, "PRNG seed")->capture_default_str();
  solve->add_flag("--print-vertices", solve_args.print_vertices, "print vertex rows to stdout");
  solve->add_option("--out", solve_args.out_path, "write the fitted model as JSON");
  add_solver_flags(solve, solve_args.solver);
  solve->callback([&] { run_solve(solve_args); });

  SelectArgs select_args;
  CLI::App* select = app.add_subcommand("select", "choose the vertex count per image");
  select->add_option("--features", select_args.features_path, "feature file")->required();
  select->add_option("--image-id", select_args.image_id, "restrict to one image");
  select->add_option("--seed", select_args.seed, "root PRNG seed")->capture_default_str();
  select->add_option("--out", select_args.out_path, "write a per-image CSV table");
  add_selection_flags(select, select_args.selection);
  select->callback([&] { run_select(select_args); });

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate synthetic feature files");
  synth->add_option("--k", synth_args.k, "vertices per simplex")->capture_default_str();
  synth->add_option("--n", synth_args.n, "crops per image")->capture_default_str();
  synth->add_option("--dim", synth_args.dim, "feature dimension")->capture_default_str();
  synth->add_option("--sigma", synth_args.sigma, "noise standard deviation")
      ->capture_default_str();
  synth->add_option("--separation", synth_args.separation, "minimum vertex distance")
      ->capture_default_str();
  synth->add_option("--concentration", synth_args.concentration, "Dirichlet concentration")
      ->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "PRNG seed")->capture_default_str();
  synth->add_option("--out", synth_args.out_path, "output feature file")->required();
  synth->add_option("--truth-out", synth_args.truth_out, "write ground truth JSON");
  synth->add_option("--image-id", synth_args.image_id, "image id (single-image mode)")
      ->capture_default_str();
  synth->add_option("--label", synth_args.label, "class label (single-image mode)")
      ->capture_default_str();
  synth->add_option("--classes", synth_args.classes,
                    "dataset mode: number of classes (each class shares one simplex)");
  synth->add_option("--images-per-class", synth_args.images_per_class,
                    "dataset mode: images per class");
  synth->callback([&] { run_synth(synth_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "run batched 1-shot episodes");
  eval->add_option("--features", eval_args.features_path, "feature file")->required();
  eval->add_option("--episodes", eval_args.config.n_episodes, "number of episodes")
      ->capture_default_str();
  eval->add_option("--way", eval_args.config.way, "classes per episode")->capture_default_str();
  eval->add_option("--queries", eval_args.config.queries_per_class, "queries per class")
      ->capture_default_str();
  eval->add_option("--alpha", eval_args.config.alpha, "vertex-side shrinkage coefficient")
      ->capture_default_str();
  eval->add_flag("--k1-filter", eval_args.config.k1_filter,
                 "sample episodes only from chosen_k == 1 images");
  eval->add_option("--lambda-sweep", eval_args.config.lambda_sweep,
                   "comma-separated lambdas; one run per value")
      ->delimiter(',');
  eval->add_option("--seed", eval_args.config.seed, "root PRNG seed")->capture_default_str();
  eval->add_flag("--no-cache", eval_args.no_cache,
                 "recompute image representations on every use");
  eval->add_option("--threads", eval_args.config.threads,
                   "representation worker threads (0 = auto)")
      ->capture_default_str();
  eval->add_option("--out", eval_args.out_path, "write the report as JSON");
  eval->add_option("--sweep-out", eval_args.sweep_out, "write the lambda sweep CSV");
  add_selection_flags(eval, eval_args.config.selection);
  eval->callback([&] { run_eval(eval_args); });

  ProjectArgs project_args;
  CLI::App* project = app.add_subcommand(
      "project", "project one image's crops and vertices onto an anchor plane");
  project->add_option("--features", project_args.features_path, "feature file")->required();
  project->add_option("--image-id", project_args.image_id,
                      "image to project (optional when the file holds one image)");
  project
      ->add_option("--anchor", project_args.anchors,
                   "anchor: comma-separated floats or a class label (exactly 3)")
      ->expected(3)
      ->required();
  project->add_option("--seed", project_args.seed, "root PRNG seed")->capture_default_str();
  project->add_option("--out", project_args.out_path, "output CSV of plane coordinates")
      ->required();
  add_selection_flags(project, project_args.selection);
  project->callback([&] { run_project(project_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  } catch (const spx::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spx::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
