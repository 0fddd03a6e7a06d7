// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// sqkit command line front end. Links only against the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqkit/sqkit.h"

namespace {

using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitAlgorithm = 3;
constexpr int kExitContract = 4;
constexpr int kExitInternal = 1;

struct Failure {
  int code;
  std::string message;
};

int exit_code(sqk_status status) {
  switch (status) {
    case SQK_ERR_INPUT:
      return kExitInput;
    case SQK_ERR_ALGORITHM:
      return kExitAlgorithm;
    case SQK_ERR_CONTRACT:
      return kExitContract;
    default:
      return kExitInternal;
  }
}

void check(sqk_status status) {
  if (status != SQK_OK) throw Failure{exit_code(status), sqk_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Superquadric =
    std::unique_ptr<sqk_superquadric, Deleter<sqk_superquadric, sqk_superquadric_free>>;
using Cloud = std::unique_ptr<sqk_cloud, Deleter<sqk_cloud, sqk_cloud_free>>;
using Mesh = std::unique_ptr<sqk_mesh, Deleter<sqk_mesh, sqk_mesh_free>>;
using Grid = std::unique_ptr<sqk_voxel_grid, Deleter<sqk_voxel_grid, sqk_voxel_grid_free>>;
using Report = std::unique_ptr<sqk_fit_report, Deleter<sqk_fit_report, sqk_fit_report_free>>;

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  sqk_string_free(s);
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string output;
  bool quiet = false;
};

Globals g;

void emit(const std::string& text) {
  if (g.output.empty() || g.output == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw Failure{kExitInput, "cannot write '" + g.output + "'"};
  out << text;
}

void note(const std::string& text) {
  if (!g.quiet) std::cerr << text << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitInput, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Superquadric load_theta(const std::string& path) {
  sqk_superquadric* sq = nullptr;
  check(sqk_superquadric_load(path.c_str(), &sq));
  return Superquadric(sq);
}

Cloud load_cloud(const std::string& path) {
  sqk_cloud* cloud = nullptr;
  check(sqk_cloud_load(path.c_str(), &cloud));
  return Cloud(cloud);
}

Mesh load_mesh(const std::string& path) {
  sqk_mesh* mesh = nullptr;
  check(sqk_mesh_load(path.c_str(), &mesh));
  return Mesh(mesh);
}

bool is_watertight(const sqk_mesh* mesh) {
  int flag = 0;
  check(sqk_mesh_is_watertight(mesh, &flag));
  return flag != 0;
}

Cloud resample(const sqk_mesh* mesh, std::size_t n) {
  sqk_cloud* cloud = nullptr;
  check(sqk_resample_mesh(mesh, n, g.seed, &cloud));
  return Cloud(cloud);
}

void emit_metric(const char* name, double value, const char* units) {
  char* text = nullptr;
  check(sqk_metric_to_json(name, value, units, &text));
  emit(take(text));
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  FitArgs() { sqk_fit_config_default(&config); }
  std::string input;
  sqk_fit_config config;
  std::size_t samples = 4096;
  bool reestimate = false;
  bool responsibilities = false;
};

void cmd_fit(const FitArgs& a) {
  Cloud cloud;
  if (sqk_path_is_mesh(a.input.c_str())) {
    Mesh mesh = load_mesh(a.input);
    if (!is_watertight(mesh.get())) {
      note("warning: mesh '" + a.input + "' is not watertight; resampling " +
           std::to_string(a.samples) + " points uniformly over its surface");
    }
    cloud = resample(mesh.get(), a.samples);
  } else {
    cloud = load_cloud(a.input);
  }

  sqk_fit_config config = a.config;
  config.seed = g.seed;
  config.reestimate_outlier_prior = a.reestimate ? 1 : 0;

  sqk_fit_report* raw = nullptr;
  check(sqk_fit(cloud.get(), &config, &raw));
  Report report(raw);
  double sigma = 0;
  int iterations = 0, converged = 0, switched = 0;
  check(sqk_fit_report_summary(report.get(), &sigma, &iterations, &converged, &switched));
  note("fit: " + std::to_string(sqk_cloud_size(cloud.get())) + " points, " +
       std::to_string(iterations) + " iterations, " +
       (converged ? "converged" : "not converged") + ", sigma " + std::to_string(sigma) +
       " mm");
  char* text = nullptr;
  check(sqk_fit_report_to_json(report.get(), a.responsibilities ? 1 : 0, &text));
  emit(take(text));
}

// ---- sample / mesh / sweep ----------------------------------------------------

void cmd_sample(const std::string& theta, std::size_t n) {
  Superquadric sq = load_theta(theta);
  sqk_cloud* raw = nullptr;
  check(sqk_sample_surface(sq.get(), n, g.seed, &raw));
  Cloud cloud(raw);
  char* text = nullptr;
  check(sqk_cloud_to_text(cloud.get(), &text));
  emit(take(text));
}

void cmd_mesh(const std::string& theta, int resolution) {
  Superquadric sq = load_theta(theta);
  sqk_mesh* raw = nullptr;
  check(sqk_make_mesh(sq.get(), resolution, &raw));
  Mesh mesh(raw);
  char* text = nullptr;
  check(sqk_mesh_to_obj(mesh.get(), &text));
  emit(take(text));
}

struct SweepArgs {
  std::vector<double> eps1 = {0.1, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> eps2 = {0.1, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> scale = {1.0, 1.0, 1.0};
  int resolution = 64;
  std::string outdir = ".";
};

std::string format_eps(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void cmd_sweep(const SweepArgs& a) {
  for (double e : a.eps1) {
    if (!(e >= 0.1 && e <= 2.0)) {
      throw Failure{kExitInput, "eps1 value " + std::to_string(e) + " outside [0.1, 2.0]"};
    }
  }
  for (double e : a.eps2) {
    if (!(e >= 0.1 && e <= 2.0)) {
      throw Failure{kExitInput, "eps2 value " + std::to_string(e) + " outside [0.1, 2.0]"};
    }
  }
  if (a.scale.size() == 1 ? !(a.scale[0] > 0) : a.scale.size() != 3) {
    throw Failure{kExitInput, "--scale takes one value or three (ax ay az)"};
  }
  const double ax = a.scale[0];
  const double ay = a.scale.size() == 3 ? a.scale[1] : ax;
  const double az = a.scale.size() == 3 ? a.scale[2] : ax;

  std::error_code ec;
  std::filesystem::create_directories(a.outdir, ec);
  if (ec) throw Failure{kExitInput, "cannot create '" + a.outdir + "': " + ec.message()};

  json cells = json::array();
  for (double e1 : a.eps1) {
    for (double e2 : a.eps2) {
      const double params[11] = {e1, e2, ax, ay, az, 0, 0, 0, 0, 0, 0};
      sqk_superquadric* raw_sq = nullptr;
      check(sqk_superquadric_create(params, &raw_sq));
      Superquadric sq(raw_sq);
      sqk_mesh* raw_mesh = nullptr;
      check(sqk_make_mesh(sq.get(), a.resolution, &raw_mesh));
      Mesh mesh(raw_mesh);
      const std::string name = "sq_e1-" + format_eps(e1) + "_e2-" + format_eps(e2) + ".obj";
      const std::string path = (std::filesystem::path(a.outdir) / name).string();
      check(sqk_mesh_save_obj(mesh.get(), path.c_str()));
      double volume = 0;
      check(sqk_mesh_volume(mesh.get(), &volume));
      cells.push_back({{"eps1", e1},
                       {"eps2", e2},
                       {"file", name},
                       {"volume", volume},
                       {"watertight", is_watertight(mesh.get())}});
    }
  }
  note("sweep: wrote " + std::to_string(cells.size()) + " meshes to " + a.outdir);
  emit(json{{"scale", {ax, ay, az}}, {"resolution", a.resolution}, {"cells", cells}}.dump(2) +
       "\n");
}

// ---- ingest -----------------------------------------------------------------

void cmd_ingest(const std::string& input, bool check_only, std::size_t resample_n) {
  Mesh mesh = load_mesh(input);
  const bool closed = is_watertight(mesh.get());
  if (resample_n > 0) {
    if (check_only && (g.output.empty() || g.output == "-")) {
      throw Failure{kExitInput, "--check-watertight with --resample needs --output"};
    }
    Cloud cloud = resample(mesh.get(), resample_n);
    char* text = nullptr;
    check(sqk_cloud_to_text(cloud.get(), &text));
    emit(take(text));
    if (check_only) std::cout << json{{"watertight", closed}}.dump(2) << '\n';
    return;
  }
  if (check_only) {
    emit(json{{"watertight", closed}}.dump(2) + "\n");
    return;
  }
  std::size_t vertices = 0, faces = 0;
  double area = 0, volume = 0;
  check(sqk_mesh_counts(mesh.get(), &vertices, &faces));
  check(sqk_mesh_area(mesh.get(), &area));
  json out = {{"vertices", vertices}, {"faces", faces}, {"watertight", closed},
              {"surface_area", area}};
  if (closed) {
    check(sqk_mesh_volume(mesh.get(), &volume));
    out["volume"] = volume;
  }
  emit(out.dump(2) + "\n");
}

// ---- metrics ----------------------------------------------------------------

bool is_mesh_path(const std::string& path) { return sqk_path_is_mesh(path.c_str()) != 0; }

Grid voxelize(const std::string& path, double voxel_size) {
  sqk_voxel_grid* grid = nullptr;
  if (is_mesh_path(path)) {
    Mesh mesh = load_mesh(path);
    check(sqk_voxelize_mesh(mesh.get(), voxel_size, &grid));
  } else {
    Superquadric sq = load_theta(path);
    check(sqk_voxelize_superquadric(sq.get(), voxel_size, &grid));
  }
  return Grid(grid);
}

void cmd_chamfer(const std::string& a, const std::string& b, bool root) {
  Cloud ca = load_cloud(a), cb = load_cloud(b);
  double value = 0;
  check(sqk_chamfer(ca.get(), cb.get(), root ? 0 : 1, &value));
  emit_metric("chamfer", value, root ? "mm" : "mm^2");
}

void cmd_penetration(const std::string& hand, const std::string& object) {
  Cloud h = load_cloud(hand);
  double value = 0;
  if (is_mesh_path(object)) {
    Mesh mesh = load_mesh(object);
    check(sqk_penetration_mesh(h.get(), mesh.get(), &value));
  } else {
    Superquadric sq = load_theta(object);
    check(sqk_penetration_superquadric(h.get(), sq.get(), &value));
  }
  emit_metric("penetration", value, "mm");
}

void cmd_volume(const std::string& a, const std::string& b, double voxel_size) {
  Grid ga = voxelize(a, voxel_size), gb = voxelize(b, voxel_size);
  double value = 0;
  check(sqk_intersection_volume(ga.get(), gb.get(), &value));
  emit_metric("intersection_volume", value, "cm^3");
}

void cmd_mepe(const std::string& pred, const std::string& gt) {
  Cloud p = load_cloud(pred), t = load_cloud(gt);
  double value = 0;
  check(sqk_mepe(p.get(), t.get(), &value));
  emit_metric("mepe", value, "mm");
}

void cmd_theta_l1(const std::string& a, const std::string& b) {
  Superquadric sa = load_theta(a), sb = load_theta(b);
  double value = 0;
  check(sqk_theta_l1(sa.get(), sb.get(), &value));
  emit_metric("theta_l1", value, "");
}

// ---- splits -----------------------------------------------------------------

struct SplitArgs {
  std::string manifest;
  std::string mode = "s1";
  std::string nouns;
  std::string pairs;
  std::size_t count = 8;
};

void cmd_splits_make(const SplitArgs& a) {
  const std::string manifest = read_text(a.manifest);
  char* text = nullptr;
  if (a.mode == "s1") {
    if (!a.pairs.empty()) throw Failure{kExitInput, "--pairs applies to --mode s2"};
    if (a.nouns.empty()) {
      check(sqk_splits_make_s1(manifest.c_str(), nullptr, 0, &text));
    } else {
      const auto nouns = split_list(a.nouns, ',');
      std::vector<const char*> ptrs;
      for (const auto& n : nouns) ptrs.push_back(n.c_str());
      check(sqk_splits_make_s1(manifest.c_str(), ptrs.data(), ptrs.size(), &text));
    }
  } else if (a.mode == "s2") {
    if (!a.nouns.empty()) throw Failure{kExitInput, "--nouns applies to --mode s1"};
    if (a.pairs.empty()) {
      check(sqk_splits_make_s2_seeded(manifest.c_str(), g.seed, a.count, &text));
    } else {
      std::vector<std::string> first, second;
      for (const auto& pair : split_list(a.pairs, ',')) {
        const auto plus = pair.find('+');
        if (plus == std::string::npos || plus == 0 || plus + 1 == pair.size()) {
          throw Failure{kExitInput, "pair '" + pair + "' is not of the form A+B"};
        }
        first.push_back(pair.substr(0, plus));
        second.push_back(pair.substr(plus + 1));
      }
      std::vector<const char*> p1, p2;
      for (std::size_t i = 0; i < first.size(); ++i) {
        p1.push_back(first[i].c_str());
        p2.push_back(second[i].c_str());
      }
      check(sqk_splits_make_s2(manifest.c_str(), p1.data(), p2.data(), p1.size(), &text));
    }
  } else {
    throw Failure{kExitInput, "unknown split mode '" + a.mode + "' (expected s1 or s2)"};
  }
  emit(take(text));
}

void cmd_splits_score(const std::string& folds, const std::string& predictions,
                      const std::string& manifest) {
  const std::string f = read_text(folds), p = read_text(predictions),
                    m = read_text(manifest);
  char* text = nullptr;
  check(sqk_splits_score(f.c_str(), p.c_str(), m.c_str(), &text));
  std::string summary = take(text);
  const json parsed = json::parse(summary);
  note("accuracy: " + std::to_string(parsed["mean"].get<double>()) + " +- " +
       std::to_string(parsed["std"].get<double>()));
  emit(summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superquadric geometry, fitting, metrics and split tools"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", g.seed, "Seed for every randomized step");
  app.add_option("-o,--output", g.output, "Write the result here instead of stdout");
  app.add_flag("-q,--quiet", g.quiet, "Suppress summaries and warnings on stderr");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a superquadric to a point cloud or mesh");
  fit->add_option("input", fit_args.input, "Point cloud (.xyz text) or mesh (.obj, .ply)")
      ->required();
  fit->add_option("--max-iters", fit_args.config.max_iters, "EM rounds")->capture_default_str();
  fit->add_option("--tol", fit_args.config.tol, "Relative log-likelihood tolerance")
      ->capture_default_str();
  fit->add_option("--outlier-prior", fit_args.config.outlier_prior, "Outlier prior w0")
      ->capture_default_str();
  fit->add_option("--sigma-init", fit_args.config.sigma_init,
                  "Initial noise scale in mm; 5% of the bounding-box diagonal if unset");
  fit->add_option("--samples", fit_args.samples, "Points drawn from mesh inputs")
      ->check(CLI::PositiveNumber);
  fit->add_option("--max-points", fit_args.config.max_points, "Seeded subsample size, 0 for all");
  fit->add_flag("--reestimate-outlier-prior", fit_args.reestimate,
                "Update w0 from the responsibilities each round");
  fit->add_flag("--responsibilities", fit_args.responsibilities,
                "Include per-point inlier probabilities in the report");

  std::string theta_path;
  std::size_t sample_n = 1000;
  auto* sample = app.add_subcommand("sample", "Sample points on a superquadric surface");
  sample->add_option("theta", theta_path, "Superquadric JSON")->required();
  sample->add_option("-n,--count", sample_n, "Number of points")->check(CLI::PositiveNumber);

  int resolution = 64;
  auto* mesh = app.add_subcommand("mesh", "Triangulate a superquadric to OBJ");
  mesh->add_option("theta", theta_path, "Superquadric JSON")->required();
  mesh->add_option("-r,--resolution", resolution, "Latitude rings")->check(CLI::Range(4, 4096));

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Write one mesh per (eps1, eps2) grid cell");
  sweep->add_option("--eps1", sweep_args.eps1, "eps1 values")->delimiter(',');
  sweep->add_option("--eps2", sweep_args.eps2, "eps2 values")->delimiter(',');
  sweep->add_option("--scale", sweep_args.scale, "One scale, or ax,ay,az in mm")
      ->delimiter(',');
  sweep->add_option("-r,--resolution", sweep_args.resolution, "Latitude rings")
      ->check(CLI::Range(4, 4096));
  sweep->add_option("--outdir", sweep_args.outdir, "Directory for the OBJ files");

  std::string ingest_input;
  bool check_watertight = false;
  std::size_t resample_n = 0;
  auto* ingest = app.add_subcommand("ingest", "Inspect or resample a mesh");
  ingest->add_option("input", ingest_input, "Mesh (.obj, .ply)")->required();
  ingest->add_flag("--check-watertight", check_watertight, "Report only watertightness");
  ingest->add_option("--resample", resample_n, "Emit N area-uniform surface points");

  auto* metrics = app.add_subcommand("metrics", "Evaluation metrics");
  metrics->require_subcommand(1);
  std::string a_path, b_path;
  bool root = false;
  double voxel_size = 5.0;
  auto* chamfer = metrics->add_subcommand("chamfer", "Chamfer distance between clouds");
  chamfer->add_option("a", a_path)->required();
  chamfer->add_option("b", b_path)->required();
  chamfer->add_flag("--root", root, "Use plain instead of squared distances");
  auto* penetration = metrics->add_subcommand("penetration", "Maximum penetration depth");
  penetration->add_option("hand", a_path, "Hand vertices (cloud or mesh)")->required();
  penetration->add_option("object", b_path, "Superquadric JSON or watertight mesh")
      ->required();
  auto* volume = metrics->add_subcommand("volume", "Voxelized intersection volume");
  volume->add_option("a", a_path, "Superquadric JSON or watertight mesh")->required();
  volume->add_option("b", b_path, "Superquadric JSON or watertight mesh")->required();
  volume->add_option("--voxel-size", voxel_size, "Voxel edge in mm")
      ->check(CLI::PositiveNumber);
  auto* mepe = metrics->add_subcommand("mepe", "Mean end-point error over 21 joints");
  mepe->add_option("pred", a_path, "Predicted joints, one 'x y z' per line")->required();
  mepe->add_option("gt", b_path, "Ground-truth joints")->required();
  auto* theta_l1 = metrics->add_subcommand("theta-l1", "L1 distance between parameters");
  theta_l1->add_option("a", a_path)->required();
  theta_l1->add_option("b", b_path)->required();

  auto* splits = app.add_subcommand("splits", "Compositional train/test splits");
  splits->require_subcommand(1);
  SplitArgs split_args;
  auto* make = splits->add_subcommand("make", "Generate folds from a manifest");
  make->add_option("manifest", split_args.manifest, "JSON-lines manifest")->required();
  make->add_option("--mode", split_args.mode, "s1 or s2")
      ->check(CLI::IsMember({"s1", "s2"}));
  make->add_option("--nouns", split_args.nouns, "s1: comma-separated noun subset");
  make->add_option("--pairs", split_args.pairs, "s2: comma-separated A+B pairs");
  make->add_option("--count", split_args.count, "s2: seeded pair count");
  std::string folds_path, predictions_path, manifest_path;
  auto* score = splits->add_subcommand("score", "Score predictions per fold");
  score->add_option("folds", folds_path, "Folds JSON")->required();
  score->add_option("predictions", predictions_path, "JSON-lines predictions")->required();
  score->add_option("--manifest", manifest_path, "Manifest with the true labels")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) {
      cmd_fit(fit_args);
    } else if (*sample) {
      cmd_sample(theta_path, sample_n);
    } else if (*mesh) {
      cmd_mesh(theta_path, resolution);
    } else if (*sweep) {
      cmd_sweep(sweep_args);
    } else if (*ingest) {
      cmd_ingest(ingest_input, check_watertight, resample_n);
    } else if (*chamfer) {
      cmd_chamfer(a_path, b_path, root);
    } else if (*penetration) {
      cmd_penetration(a_path, b_path);
    } else if (*volume) {
      cmd_volume(a_path, b_path, voxel_size);
    } else if (*mepe) {
      cmd_mepe(a_path, b_path);
    } else if (*theta_l1) {
      cmd_theta_l1(a_path, b_path);
    } else if (*make) {
      cmd_splits_make(split_args);
    } else if (*score) {
      cmd_splits_score(folds_path, predictions_path, manifest_path);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
