// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/sqkit.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "sqkit/error.hpp"
#include "sqkit/fit.hpp"
#include "sqkit/geometry.hpp"
#include "sqkit/io.hpp"
#include "sqkit/metrics.hpp"
#include "sqkit/serialize.hpp"
#include "sqkit/splits.hpp"
#include "sqkit/superquadric.hpp"

struct sqk_superquadric {
  sqkit::Superquadric value;
};
struct sqk_cloud {
  sqkit::PointCloud value;
};
struct sqk_mesh {
  sqkit::TriangleMesh value;
};
struct sqk_voxel_grid {
  sqkit::VoxelGrid value;
};
struct sqk_fit_report {
  sqkit::FitReport value;
};

namespace {

thread_local std::string g_last_error;

sqk_status fail(sqk_status status, const char* message) {
  g_last_error = message;
  return status;
}

class NullArgument : public std::exception {
 public:
  const char* what() const noexcept override { return "required argument is NULL"; }
};

template <typename T>
const T& deref(const T* p) {
  if (p == nullptr) throw NullArgument();
  return *p;
}

template <typename T>
T& out_ref(T* p) {
  if (p == nullptr) throw NullArgument();
  return *p;
}

template <typename Fn>
sqk_status guarded(Fn&& fn) {
  try {
    fn();
    return SQK_OK;
  } catch (const NullArgument& e) {
    return fail(SQK_ERR_NULL_ARGUMENT, e.what());
  } catch (const sqkit::Error& e) {
    switch (e.kind()) {
      case sqkit::ErrorKind::kInput:
        return fail(SQK_ERR_INPUT, e.what());
      case sqkit::ErrorKind::kAlgorithm:
        return fail(SQK_ERR_ALGORITHM, e.what());
      case sqkit::ErrorKind::kContract:
        return fail(SQK_ERR_CONTRACT, e.what());
    }
    return fail(SQK_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SQK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SQK_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SQK_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sqkit::InputError(std::string("cannot open '") + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sqkit::Vec3 vec(const double* p) {
  if (p == nullptr) throw NullArgument();
  return {p[0], p[1], p[2]};
}

sqkit::Manifest manifest_from(const char* text) {
  if (text == nullptr) throw NullArgument();
  std::istringstream in(text);
  return sqkit::parse_manifest(in);
}

}  // namespace

extern "C" {

const char* sqk_version(void) { return "0.1.0"; }

const char* sqk_last_error(void) { return g_last_error.c_str(); }

void sqk_string_free(char* s) { std::free(s); }

// ---- superquadrics --------------------------------------------------------

sqk_status sqk_superquadric_create(const double params[11], sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (params == nullptr) throw NullArgument();
    sqkit::ParamVector v;
    for (int i = 0; i < 11; ++i) v[i] = params[i];
    sqkit::Superquadric sq = sqkit::from_vector(v);
    sqkit::validate(sq);
    result = new sqk_superquadric{sq};
  });
}

sqk_status sqk_superquadric_from_json(const char* json, sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (json == nullptr) throw NullArgument();
    result = new sqk_superquadric{sqkit::theta_from_json(json)};
  });
}

sqk_status sqk_superquadric_load(const char* path, sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (path == nullptr) throw NullArgument();
    result = new sqk_superquadric{sqkit::theta_from_json(read_file(path))};
  });
}

sqk_status sqk_superquadric_to_json(const sqk_superquadric* sq, char** out) {
  return guarded([&] { out_ref(out) = copy_string(sqkit::theta_to_json(deref(sq).value)); });
}

sqk_status sqk_superquadric_params(const sqk_superquadric* sq, double out[11]) {
  return guarded([&] {
    const sqkit::ParamVector v = sqkit::to_vector(deref(sq).value);
    if (out == nullptr) throw NullArgument();
    for (int i = 0; i < 11; ++i) out[i] = v[i];
  });
}

void sqk_superquadric_free(sqk_superquadric* sq) { delete sq; }

sqk_status sqk_inside_outside(const sqk_superquadric* sq, const double p[3],
                              double* out) {
  return guarded([&] { out_ref(out) = sqkit::inside_outside(deref(sq).value, vec(p)); });
}

sqk_status sqk_radial_distance(const sqk_superquadric* sq, const double p[3],
                               double* out) {
  return guarded([&] { out_ref(out) = sqkit::radial_distance(deref(sq).value, vec(p)); });
}

sqk_status sqk_duality_candidate(const sqk_superquadric* sq, int index,
                                 sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    const auto candidates = sqkit::duality_candidates(deref(sq).value);
    if (index < 0 || index >= static_cast<int>(candidates.size())) {
      throw sqkit::ContractError("duality candidate index must be 0..3");
    }
    result = new sqk_superquadric{candidates[static_cast<std::size_t>(index)]};
  });
}

sqk_status sqk_canonicalize(const sqk_superquadric* sq, sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    result = new sqk_superquadric{sqkit::canonicalize(deref(sq).value)};
  });
}

// ---- point clouds ---------------------------------------------------------

sqk_status sqk_cloud_create(const double* xyz, size_t n, sqk_cloud** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (xyz == nullptr && n > 0) throw NullArgument();
    sqkit::PointCloud cloud;
    cloud.points.reserve(n);
    for (size_t i = 0; i < n; ++i) cloud.points.push_back(vec(xyz + 3 * i));
    sqkit::validate(cloud);
    result = new sqk_cloud{std::move(cloud)};
  });
}

sqk_status sqk_cloud_load(const char* path, sqk_cloud** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (path == nullptr) throw NullArgument();
    result = new sqk_cloud{sqkit::load_cloud(path)};
  });
}

sqk_status sqk_cloud_save(const sqk_cloud* cloud, const char* path) {
  return guarded([&] {
    if (path == nullptr) throw NullArgument();
    sqkit::save_xyz(path, deref(cloud).value);
  });
}

sqk_status sqk_cloud_to_text(const sqk_cloud* cloud, char** out) {
  return guarded([&] {
    std::ostringstream ss;
    sqkit::write_xyz(ss, deref(cloud).value);
    out_ref(out) = copy_string(ss.str());
  });
}

size_t sqk_cloud_size(const sqk_cloud* cloud) {
  return cloud == nullptr ? 0 : cloud->value.size();
}

sqk_status sqk_cloud_points(const sqk_cloud* cloud, double* xyz) {
  return guarded([&] {
    const auto& points = deref(cloud).value.points;
    if (xyz == nullptr) throw NullArgument();
    for (size_t i = 0; i < points.size(); ++i) {
      xyz[3 * i] = points[i].x();
      xyz[3 * i + 1] = points[i].y();
      xyz[3 * i + 2] = points[i].z();
    }
  });
}

void sqk_cloud_free(sqk_cloud* cloud) { delete cloud; }

sqk_status sqk_sample_surface(const sqk_superquadric* sq, size_t n, uint64_t seed,
                              sqk_cloud** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (n == 0) throw sqkit::ContractError("sample count must be at least 1");
    result = new sqk_cloud{sqkit::sample_surface(deref(sq).value, n, seed)};
  });
}

// ---- meshes ---------------------------------------------------------------

int sqk_path_is_mesh(const char* path) {
  return path != nullptr && sqkit::has_mesh_extension(path) ? 1 : 0;
}

sqk_status sqk_mesh_load(const char* path, sqk_mesh** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (path == nullptr) throw NullArgument();
    result = new sqk_mesh{sqkit::load_mesh(path)};
  });
}

sqk_status sqk_mesh_save_obj(const sqk_mesh* mesh, const char* path) {
  return guarded([&] {
    if (path == nullptr) throw NullArgument();
    sqkit::save_obj(path, deref(mesh).value);
  });
}

sqk_status sqk_mesh_to_obj(const sqk_mesh* mesh, char** out) {
  return guarded([&] {
    std::ostringstream ss;
    sqkit::write_obj(ss, deref(mesh).value);
    out_ref(out) = copy_string(ss.str());
  });
}

sqk_status sqk_mesh_counts(const sqk_mesh* mesh, size_t* vertices, size_t* faces) {
  return guarded([&] {
    const auto& m = deref(mesh).value;
    out_ref(vertices) = m.vertices.size();
    out_ref(faces) = m.faces.size();
  });
}

sqk_status sqk_mesh_is_watertight(const sqk_mesh* mesh, int* out) {
  return guarded([&] { out_ref(out) = sqkit::is_watertight(deref(mesh).value) ? 1 : 0; });
}

sqk_status sqk_mesh_area(const sqk_mesh* mesh, double* out) {
  return guarded([&] { out_ref(out) = sqkit::surface_area(deref(mesh).value); });
}

sqk_status sqk_mesh_volume(const sqk_mesh* mesh, double* out) {
  return guarded([&] { out_ref(out) = sqkit::enclosed_volume(deref(mesh).value); });
}

void sqk_mesh_free(sqk_mesh* mesh) { delete mesh; }

sqk_status sqk_make_mesh(const sqk_superquadric* sq, int resolution, sqk_mesh** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    result = new sqk_mesh{sqkit::make_mesh(deref(sq).value, resolution)};
  });
}

sqk_status sqk_resample_mesh(const sqk_mesh* mesh, size_t n, uint64_t seed,
                             sqk_cloud** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    if (n == 0) throw sqkit::ContractError("sample count must be at least 1");
    result = new sqk_cloud{sqkit::resample_mesh(deref(mesh).value, n, seed)};
  });
}

// ---- voxel grids ----------------------------------------------------------

sqk_status sqk_voxelize_mesh(const sqk_mesh* mesh, double voxel_size,
                             sqk_voxel_grid** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    result = new sqk_voxel_grid{sqkit::voxelize_mesh(deref(mesh).value, voxel_size)};
  });
}

sqk_status sqk_voxelize_superquadric(const sqk_superquadric* sq, double voxel_size,
                                     sqk_voxel_grid** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    result =
        new sqk_voxel_grid{sqkit::voxelize_superquadric(deref(sq).value, voxel_size)};
  });
}

sqk_status sqk_voxel_grid_info(const sqk_voxel_grid* grid, double origin[3],
                               double* voxel_size, size_t dims[3], size_t* occupied) {
  return guarded([&] {
    const auto& g = deref(grid).value;
    if (origin != nullptr) {
      for (int i = 0; i < 3; ++i) origin[i] = g.origin[i];
    }
    if (voxel_size != nullptr) *voxel_size = g.voxel_size;
    if (dims != nullptr) {
      for (int i = 0; i < 3; ++i) dims[i] = static_cast<size_t>(g.dims[i]);
    }
    if (occupied != nullptr) *occupied = g.occupied_count();
  });
}

void sqk_voxel_grid_free(sqk_voxel_grid* grid) { delete grid; }

// ---- fitting --------------------------------------------------------------

void sqk_fit_config_default(sqk_fit_config* config) {
  if (config == nullptr) return;
  const sqkit::FitConfig d;
  config->max_iters = d.max_iters;
  config->tol = d.tol;
  config->outlier_prior = d.outlier_prior;
  config->sigma_init = 0.0;
  config->seed = d.seed;
  config->max_points = d.max_points;
  config->switch_every = d.switch_every;
  config->reestimate_outlier_prior = d.reestimate_outlier_prior ? 1 : 0;
  config->lm_iterations = d.lm_iterations;
}

sqk_status sqk_fit(const sqk_cloud* cloud, const sqk_fit_config* config,
                   sqk_fit_report** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    sqkit::FitConfig c;
    if (config != nullptr) {
      c.max_iters = config->max_iters;
      c.tol = config->tol;
      c.outlier_prior = config->outlier_prior;
      if (config->sigma_init > 0) c.sigma_init = config->sigma_init;
      c.seed = config->seed;
      c.max_points = config->max_points;
      c.switch_every = config->switch_every;
      c.reestimate_outlier_prior = config->reestimate_outlier_prior != 0;
      c.lm_iterations = config->lm_iterations;
    }
    result = new sqk_fit_report{sqkit::fit(deref(cloud).value, c)};
  });
}

sqk_status sqk_fit_report_theta(const sqk_fit_report* report, sqk_superquadric** out) {
  return guarded([&] {
    auto& result = out_ref(out);
    result = new sqk_superquadric{deref(report).value.theta};
  });
}

sqk_status sqk_fit_report_summary(const sqk_fit_report* report, double* sigma,
                                  int* iterations, int* converged, int* switched) {
  return guarded([&] {
    const auto& r = deref(report).value;
    if (sigma != nullptr) *sigma = r.sigma;
    if (iterations != nullptr) *iterations = r.iterations;
    if (converged != nullptr) *converged = r.converged ? 1 : 0;
    if (switched != nullptr) *switched = r.switched ? 1 : 0;
  });
}

sqk_status sqk_fit_report_to_json(const sqk_fit_report* report,
                                  int with_responsibilities, char** out) {
  return guarded([&] {
    out_ref(out) = copy_string(
        sqkit::fit_report_to_json(deref(report).value, with_responsibilities != 0));
  });
}

void sqk_fit_report_free(sqk_fit_report* report) { delete report; }

// ---- metrics --------------------------------------------------------------

sqk_status sqk_chamfer(const sqk_cloud* a, const sqk_cloud* b, int squared,
                       double* out) {
  return guarded([&] {
    out_ref(out) = sqkit::chamfer(deref(a).value, deref(b).value, squared != 0);
  });
}

sqk_status sqk_penetration_superquadric(const sqk_cloud* hand,
                                        const sqk_superquadric* object, double* out) {
  return guarded([&] {
    out_ref(out) = sqkit::penetration_depth(deref(hand).value,
                                            sqkit::SolidObject(deref(object).value));
  });
}

sqk_status sqk_penetration_mesh(const sqk_cloud* hand, const sqk_mesh* object,
                                double* out) {
  return guarded([&] {
    out_ref(out) = sqkit::penetration_depth(deref(hand).value,
                                            sqkit::SolidObject(deref(object).value));
  });
}

sqk_status sqk_intersection_volume(const sqk_voxel_grid* a, const sqk_voxel_grid* b,
                                   double* out) {
  return guarded([&] {
    out_ref(out) = sqkit::intersection_volume(deref(a).value, deref(b).value);
  });
}

sqk_status sqk_mepe(const sqk_cloud* pred, const sqk_cloud* gt, double* out) {
  return guarded([&] {
    out_ref(out) = sqkit::mepe(sqkit::joints_from_cloud(deref(pred).value),
                               sqkit::joints_from_cloud(deref(gt).value));
  });
}

sqk_status sqk_theta_l1(const sqk_superquadric* a, const sqk_superquadric* b,
                        double* out) {
  return guarded([&] { out_ref(out) = sqkit::theta_l1(deref(a).value, deref(b).value); });
}

sqk_status sqk_metric_to_json(const char* name, double value, const char* units,
                              char** out) {
  return guarded([&] {
    if (name == nullptr || units == nullptr) throw NullArgument();
    out_ref(out) = copy_string(sqkit::metric_report_to_json({name, value, units}));
  });
}

// ---- splits ---------------------------------------------------------------

sqk_status sqk_splits_make_s1(const char* manifest, const char* const* nouns,
                              size_t noun_count, char** folds_json) {
  return guarded([&] {
    auto& result = out_ref(folds_json);
    std::optional<std::vector<std::string>> only;
    if (nouns != nullptr) {
      only.emplace();
      for (size_t i = 0; i < noun_count; ++i) {
        if (nouns[i] == nullptr) throw NullArgument();
        only->push_back(nouns[i]);
      }
    }
    result = copy_string(sqkit::folds_to_json(sqkit::make_s1(manifest_from(manifest), only)));
  });
}

sqk_status sqk_splits_make_s2(const char* manifest, const char* const* first,
                              const char* const* second, size_t pair_count,
                              char** folds_json) {
  return guarded([&] {
    auto& result = out_ref(folds_json);
    if (pair_count > 0 && (first == nullptr || second == nullptr)) throw NullArgument();
    std::vector<sqkit::NounPair> pairs;
    for (size_t i = 0; i < pair_count; ++i) {
      if (first[i] == nullptr || second[i] == nullptr) throw NullArgument();
      pairs.emplace_back(first[i], second[i]);
    }
    result = copy_string(sqkit::folds_to_json(sqkit::make_s2(manifest_from(manifest), pairs)));
  });
}

sqk_status sqk_splits_make_s2_seeded(const char* manifest, uint64_t seed,
                                     size_t pair_count, char** folds_json) {
  return guarded([&] {
    auto& result = out_ref(folds_json);
    result = copy_string(
        sqkit::folds_to_json(sqkit::make_s2(manifest_from(manifest), seed, pair_count)));
  });
}

sqk_status sqk_splits_score(const char* folds_json, const char* predictions,
                            const char* manifest, char** summary_json) {
  return guarded([&] {
    auto& result = out_ref(summary_json);
    if (folds_json == nullptr || predictions == nullptr) throw NullArgument();
    const auto folds = sqkit::folds_from_json(folds_json);
    std::istringstream pin(predictions);
    const auto preds = sqkit::parse_predictions(pin);
    const auto labels = sqkit::labels_from_manifest(manifest_from(manifest));
    result = copy_string(sqkit::summary_to_json(sqkit::score_folds(folds, preds, labels)));
  });
}

}  // extern "C"
