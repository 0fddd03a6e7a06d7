// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqkit/fit.hpp"
#include "sqkit/io.hpp"
#include "sqkit/metrics.hpp"
#include "sqkit/serialize.hpp"
#include "sqkit/splits.hpp"
#include "support.hpp"

using namespace sqkit;
using nlohmann::json;

namespace {

const std::string kCli = SQKIT_CLI_PATH;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double mean_scale(const Superquadric& sq) {
  return (sq.scale.ax + sq.scale.ay + sq.scale.az) / 3.0;
}

bool non_decreasing(const std::vector<double>& trace, double slack) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - slack) return false;
  }
  return true;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

// Suite of ground-truth shapes shared by criteria 2 to 4.
std::vector<Superquadric> fit_suite() {
  sqkit::Rng rng(2026);
  std::vector<Superquadric> out;
  for (int i = 0; i < 20; ++i) out.push_back(sqtest::random_sq(rng));
  return out;
}

struct FitStats {
  std::vector<double> relative_error;  // surface error / mean scale
  std::vector<double> seconds;
  bool monotone = true;
};

FitStats run_fits(const std::vector<Superquadric>& suite, bool robust, double outlier_prior) {
  FitStats stats;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Superquadric& gt = suite[i];
    const PointCloud cloud = robust
                                 ? sqtest::noisy_cloud(gt, 2000, 100 + i, 0.5, 0.2).cloud
                                 : sample_surface(gt, 2000, 100 + i);
    FitConfig config;
    config.outlier_prior = outlier_prior;
    const auto start = Clock::now();
    const FitReport r = fit(cloud, config);
    stats.seconds.push_back(seconds_since(start));
    stats.relative_error.push_back(sqtest::surface_error(gt, r.theta) / mean_scale(gt));
    stats.monotone = stats.monotone && non_decreasing(r.loglik_trace, 1e-9);
  }
  return stats;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

Outcome criterion1() {
  const auto start = Clock::now();
  sqkit::Rng rng(1);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const Superquadric sq = sqtest::random_sq(rng);
    for (const Vec3& p : sample_surface(sq, 2000, i).points) {
      worst = std::max(worst, std::abs(inside_outside(sq, p) - 1));
    }
    for (const Vec3& p : make_mesh(sq, 64).vertices) {
      worst = std::max(worst, std::abs(inside_outside(sq, p) - 1));
    }
  }
  const double t = seconds_since(start);
  return {worst < 1e-6 && t < 10,
          fmt("50 shapes, max |f-1| = %.2e (< 1e-6), %.2f s (< 10 s)", worst, t)};
}

FitStats g_clean, g_robust, g_plain;

Outcome criterion2() {
  g_clean = run_fits(fit_suite(), false, 0.1);
  const double worst = max_of(g_clean.relative_error);
  const double slowest = max_of(g_clean.seconds);
  return {worst < 0.005 && slowest < 5,
          fmt("20 clean fits, max error %.4f%% of mean scale (< 0.5%%), slowest %.2f s (< 5 s)",
              100 * worst, slowest)};
}

Outcome criterion3() {
  const auto suite = fit_suite();
  g_robust = run_fits(suite, true, 0.1);
  g_plain = run_fits(suite, true, 0.0);
  const double robust = mean(g_robust.relative_error);
  const double plain = mean(g_plain.relative_error);
  return {robust < 0.02 && plain > robust,
          fmt("suite mean error %.3f%% of mean scale (< 2%%), worst single fit %.3f%%; "
              "w0 = 0 gives %.3f%% (must be larger)",
              100 * robust, 100 * max_of(g_robust.relative_error), 100 * plain)};
}

Outcome criterion4() {
  // Switch steps from the initial guess and from two relabeled ground truths.
  sqkit::Rng rng(4);
  bool switch_ok = true;
  int checked = 0;
  const auto suite = fit_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const PointCloud cloud = sqtest::noisy_cloud(suite[i], 2000, 100 + i, 0.5, 0.2).cloud;
    const ParamBounds bounds = ParamBounds::for_cloud(cloud);
    const double volume = outlier_volume(cloud);
    for (const Superquadric& start : {initialize(cloud, bounds), duality_candidates(suite[i])[1],
                                      duality_candidates(suite[i])[2]}) {
      // Around the scale the fit itself starts from.
      const double sigma =
          0.05 * bounding_box(cloud.points).extent().norm() * rng.uniform(0.25, 1.0);
      const auto gamma = e_step(cloud, start, sigma, 0.1, volume);
      const SwitchResult s = switch_step(cloud, gamma, start, sigma, 0.1, volume, bounds);
      switch_ok = switch_ok && s.loglik_after >= s.loglik_before;
      ++checked;
    }
  }
  const bool monotone = g_clean.monotone && g_robust.monotone && g_plain.monotone;
  return {monotone && switch_ok,
          std::string("60 fit traces ") + (monotone ? "non-decreasing" : "DECREASE") +
              " within 1e-9; " + std::to_string(checked) + " switch steps " +
              (switch_ok ? "never lowered" : "LOWERED") + " the likelihood"};
}

Outcome criterion5() {
  sqkit::Rng rng(5);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    PointCloud a, b;
    const auto na = 1 + static_cast<std::size_t>(rng.uniform(0, 2000));
    const auto nb = 1 + static_cast<std::size_t>(rng.uniform(0, 2000));
    for (std::size_t k = 0; k < na; ++k) {
      a.points.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    }
    for (std::size_t k = 0; k < nb; ++k) {
      b.points.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    }
    const double fast = chamfer(a, b);
    worst = std::max(worst, std::abs(fast - chamfer_brute_force(a, b)) / std::max(1.0, fast));
  }
  const double r = 10;
  const double exact = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  const Superquadric ball = sqtest::make_sq(1, 1, r, r, r);
  const double analytic = voxelize_superquadric(ball, 0.02 * r).occupied_volume();
  const double meshed = voxelize_mesh(make_mesh(ball, 128), 0.02 * r).occupied_volume();
  const double dev = std::max(std::abs(analytic - exact), std::abs(meshed - exact)) / exact;
  const double cubes = intersection_volume(voxelize_mesh(sqtest::unit_cube(Vec3::Zero(), 10), 5),
                                           voxelize_mesh(sqtest::unit_cube({5, 0, 0}, 10), 5));
  return {worst <= 1e-12 && dev < 0.02 && cubes == 0.5,
          fmt("chamfer k-d vs brute force max rel. diff %.1e (<= 1e-12); sphere voxel volume "
              "off by %.3f%% (< 2%%); cube intersection %.4f cm^3 (= 0.5)",
              worst, 100 * dev, cubes)};
}

Outcome criterion6() {
  sqtest::TempDir dir("acceptance-6");
  const double edge = 20;
  const sqkit::TriangleMesh closed = sqtest::unit_cube(Vec3::Zero(), edge);
  sqkit::TriangleMesh broken = closed;
  broken.faces.resize(10);
  const std::string path = dir.file("broken_cube.obj");
  save_obj(path, broken);

  const auto check = sqtest::run(kCli + " ingest --check-watertight " + q(path));
  const bool flagged = check.exit_code == 0 && json::parse(check.out).at("watertight") == false;
  const auto fitted = sqtest::run(kCli + " fit " + q(path) + " 2>" + q(dir.file("stderr.txt")));
  const std::string stderr_text = sqtest::read_text(dir.file("stderr.txt"));
  const bool warned = stderr_text.find("not watertight") != std::string::npos &&
                      stderr_text.find("resampling") != std::string::npos;
  if (fitted.exit_code != 0) {
    return {false, "fit exited with " + std::to_string(fitted.exit_code)};
  }
  const json report = json::parse(fitted.out);
  const Superquadric theta = theta_from_json(report.at("theta").dump());
  const bool converged = report.at("converged").get<bool>();
  double err = 0;
  const PointCloud truth = resample_mesh(closed, 10000, 6);
  for (const Vec3& p : truth.points) err += radial_distance(theta, p);
  const double relative = err / static_cast<double>(truth.size()) / (edge / 2);
  return {flagged && warned && converged && relative < 0.03,
          std::string("watertight=") + (flagged ? "false" : "?") +
              ", warning " + (warned ? "emitted" : "MISSING") + ", " +
              (converged ? "converged" : "NOT converged") +
              fmt(", surface error %.3f%% of the half-edge (< 3%%)", 100 * relative)};
}

Outcome criterion7() {
  const std::vector<std::string> nouns = {"Book", "Cappuccino", "Chips", "Cocoa",
                                          "Espresso", "Lotion", "Milk", "Spray"};
  const std::vector<std::string> verbs = {"grab", "open", "pour", "place", "read", "squeeze"};
  sqkit::Rng rng(7);
  Manifest m;
  for (int i = 0; i < 500; ++i) {
    SequenceRecord r;
    r.id = "seq" + std::to_string(i);
    r.subject = "subject" + std::to_string(i % 4);
    r.verb = verbs[rng.next() % verbs.size()];
    r.noun = nouns[i < 8 ? i : rng.next() % nouns.size()];
    r.path = "data/" + r.id;
    m.push_back(r);
  }
  auto disjoint = [&](const Fold& f) {
    const std::set<std::string> held(f.held_out.begin(), f.held_out.end());
    const std::set<std::string> test(f.test_ids.begin(), f.test_ids.end());
    const std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
    std::size_t seen = 0;
    for (const SequenceRecord& r : m) {
      const bool t = test.count(r.id) != 0;
      if (t == (train.count(r.id) != 0)) return false;
      if (t != (held.count(r.noun) != 0)) return false;
      ++seen;
    }
    return seen == m.size();
  };

  const auto s1 = make_s1(m);
  bool ok = s1.size() == 8;
  std::multiset<std::string> tested;
  for (const Fold& f : s1) {
    ok = ok && disjoint(f);
    tested.insert(f.test_ids.begin(), f.test_ids.end());
  }
  bool covered = tested.size() == m.size();
  for (const SequenceRecord& r : m) covered = covered && tested.count(r.id) == 1;

  const std::vector<NounPair> pairs = {{"Book", "Cappuccino"}, {"Espresso", "Chips"},
                                       {"Lotion", "Cocoa"},    {"Spray", "Milk"},
                                       {"Lotion", "Spray"},    {"Milk", "Cocoa"},
                                       {"Cocoa", "Chips"},     {"Book", "Spray"}};
  const auto s2 = make_s2(m, pairs);
  bool pairs_ok = s2.size() == pairs.size();
  for (std::size_t i = 0; pairs_ok && i < pairs.size(); ++i) {
    pairs_ok = s2[i].held_out == std::vector<std::string>{pairs[i].first, pairs[i].second} &&
               disjoint(s2[i]);
  }

  // Two folds scored at 0.8 and 0.6.
  Manifest small;
  for (int i = 0; i < 10; ++i) small.push_back({"a" + std::to_string(i), "s", "open", "A", "p", {}});
  for (int i = 0; i < 10; ++i) small.push_back({"b" + std::to_string(i), "s", "open", "B", "p", {}});
  const auto folds = make_s1(small);
  const Labels labels = labels_from_manifest(small);
  Predictions p;
  for (const Fold& f : folds) {
    for (std::size_t k = 0; k < f.test_ids.size(); ++k) {
      const std::size_t wrong = f.name == "A" ? 2 : 4;
      p[f.name][f.test_ids[k]] = k < wrong ? "pour " + f.name : labels.at(f.test_ids[k]);
    }
  }
  const ScoreSummary s = score_folds(folds, p, labels);
  const bool score_ok = std::abs(s.mean - 0.7) < 1e-12 && std::abs(s.std - 0.1) < 1e-12;

  return {ok && covered && pairs_ok && score_ok,
          std::to_string(s1.size()) + " S1 folds" + (ok ? " disjoint" : " NOT disjoint") +
              (covered ? ", test sets cover the manifest once" : ", coverage BROKEN") +
              (pairs_ok ? ", 8 named S2 pairs match" : ", S2 pairs MISMATCH") +
              fmt(", score %.12g +- %.12g (0.7 +- 0.1)", s.mean, s.std)};
}

Outcome criterion8() {
  sqtest::TempDir dir("acceptance-8");
  const auto r = sqtest::run(kCli + " --quiet sweep --scale 10 8 6 --outdir " +
                             q(dir.path().string()));
  if (r.exit_code != 0) return {false, "sweep exited with " + std::to_string(r.exit_code)};
  const json out = json::parse(r.out);
  const Vec3 a(10, 8, 6);
  double ellipsoid = -1, cuboid = -1;
  std::size_t files = 0;
  for (const auto& cell : out.at("cells")) {
    const double e1 = cell.at("eps1"), e2 = cell.at("eps2");
    const auto mesh = load_mesh((dir.path() / cell.at("file").get<std::string>()).string());
    ++files;
    if (e1 == 1.0 && e2 == 1.0) ellipsoid = enclosed_volume(mesh);
    if (e1 == 0.1 && e2 == 0.1) cuboid = enclosed_volume(mesh);
  }
  const double ellipsoid_exact = 4.0 / 3.0 * std::numbers::pi * a.x() * a.y() * a.z();
  const double oracle = sqtest::monte_carlo_volume(0.1, 0.1, a, 1000000, 8);
  const double d_ell = std::abs(ellipsoid - ellipsoid_exact) / ellipsoid_exact;
  const double d_cub = std::abs(cuboid - oracle) / oracle;
  return {files == 25 && d_ell < 0.01 && d_cub < 0.03,
          std::to_string(files) + fmt(" cells; ellipsoid cell off by %.3f%% (< 1%%); "
                                      "near-cuboid cell %.1f mm^3 vs Monte-Carlo %.1f (%.3f%%, < 3%%)",
                                      100 * d_ell, cuboid, oracle, 100 * d_cub)};
}

// Runs every subcommand once into `dir` and returns the produced file names.
std::vector<std::string> run_corpus(const std::filesystem::path& dir) {
  const auto f = [&](const std::string& name) { return q((dir / name).string()); };
  sqtest::write_text((dir / "theta.json").string(),
                     R"({"eps1": 0.6, "eps2": 1.3, "scale": [20, 14, 9],
                         "rotation_axis_angle": [0.2, -0.4, 0.1], "translation": [3, 4, 5]})");
  sqtest::write_text((dir / "other.json").string(),
                     R"({"eps1": 1, "eps2": 1, "scale": [12, 12, 12],
                         "rotation_axis_angle": [0, 0, 0], "translation": [10, 0, 0]})");
  save_obj((dir / "broken_cube.obj").string(), [] {
    auto m = sqtest::unit_cube(Vec3::Zero(), 20);
    m.faces.resize(10);
    return m;
  }());
  std::string manifest;
  const char* nouns[] = {"Book", "Cappuccino", "Chips", "Cocoa", "Espresso", "Lotion", "Milk", "Spray"};
  for (int i = 0; i < 40; ++i) {
    manifest += json{{"id", "s" + std::to_string(i)}, {"subject", "p"},
                     {"verb", i % 2 ? "open" : "grab"}, {"noun", nouns[i % 8]}, {"path", "x"}}
                    .dump() +
                "\n";
  }
  sqtest::write_text((dir / "manifest.jsonl").string(), manifest);

  const std::string g = kCli + " --quiet --seed 11 ";
  const std::vector<std::string> commands = {
      g + "sample " + f("theta.json") + " -n 3000 -o " + f("cloud.xyz"),
      g + "sample " + f("other.json") + " -n 800 -o " + f("cloud2.xyz"),
      g + "mesh " + f("theta.json") + " -r 24 -o " + f("theta.obj"),
      g + "fit " + f("cloud.xyz") + " --responsibilities -o " + f("fit_cloud.json"),
      g + "fit " + f("theta.obj") + " --samples 1500 -o " + f("fit_mesh.json"),
      g + "fit " + f("broken_cube.obj") + " -o " + f("fit_broken.json"),
      g + "sweep -r 12 --outdir " + q((dir / "sweep").string()) + " -o " + f("sweep.json"),
      g + "ingest " + f("broken_cube.obj") + " -o " + f("ingest.json"),
      g + "ingest --resample 500 " + f("theta.obj") + " -o " + f("resampled.xyz"),
      g + "metrics chamfer " + f("cloud.xyz") + " " + f("cloud2.xyz") + " -o " + f("chamfer.json"),
      g + "metrics penetration " + f("cloud2.xyz") + " " + f("theta.json") + " -o " + f("pen.json"),
      g + "metrics volume --voxel-size 1 " + f("theta.json") + " " + f("other.json") + " -o " + f("vol.json"),
      g + "metrics theta-l1 " + f("theta.json") + " " + f("other.json") + " -o " + f("l1.json"),
      g + "splits make --mode s1 " + f("manifest.jsonl") + " -o " + f("s1.json"),
      g + "splits make --mode s2 --count 5 " + f("manifest.jsonl") + " -o " + f("s2.json"),
  };
  std::filesystem::create_directories(dir / "sweep");
  for (const auto& c : commands) {
    const auto r = sqtest::run(c);
    if (r.exit_code != 0) std::fprintf(stderr, "corpus command failed: %s\n", c.c_str());
  }
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) names.push_back(std::filesystem::relative(e.path(), dir).string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

Outcome criterion9() {
  sqtest::TempDir a("acceptance-9a"), b("acceptance-9b");
  const auto names_a = run_corpus(a.path());
  const auto names_b = run_corpus(b.path());
  if (names_a != names_b) return {false, "the two runs produced different file sets"};
  std::size_t json_files = 0, differing = 0;
  for (const auto& n : names_a) {
    json_files += std::filesystem::path(n).extension() == ".json";
    const std::string ta = sqtest::read_text((a.path() / n).string());
    const std::string tb = sqtest::read_text((b.path() / n).string());
    // Inputs embed nothing run-specific, so every file must match.
    if (ta != tb || ta.empty()) ++differing;
  }
  return {differing == 0 && json_files >= 12,
          std::to_string(names_a.size()) + " files (" + std::to_string(json_files) +
              " JSON) from 15 commands, " + std::to_string(differing) + " differ between runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"surface equation", criterion1}, {"clean fit round trip", criterion2},
      {"robust fit round trip", criterion3}, {"EM monotonicity", criterion4},
      {"metric oracles", criterion5}, {"watertight failure path", criterion6},
      {"split correctness", criterion7}, {"sweep fidelity", criterion8},
      {"determinism", criterion9}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
