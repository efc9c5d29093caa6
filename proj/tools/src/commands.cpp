#include "commands.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "io.hpp"
#include "jnr/boundary.hpp"
#include "jnr/errors.hpp"
#include "jnr/models.hpp"
#include "jnr/ranges.hpp"
#include "jnr/version.hpp"

namespace jnrcli {

namespace fs = std::filesystem;

using jnr::BoundaryParams;
using jnr::ParseError;
using jnr::PhaseClass;
using jnr::PointCloud3;
using jnr::SamplerConfig;
using jnr::Vec3;

namespace {

std::string slugify(const std::string& name) {
  std::string s;
  for (char c : name)
    s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return s.empty() ? "instance" : s;
}

struct Loaded {
  jnr::InstanceSpec spec;
  std::string source; // "catalog" or "file"
  std::string hash;
  std::string slug;
};

Loaded load_instance(const RunConfig& cfg) {
  if (!cfg.demo.empty() && !cfg.file.empty())
    throw ParseError("give either --demo or --file, not both");
  if (cfg.demo.empty() && cfg.file.empty())
    throw ParseError("an instance is required: --demo NAME or --file PATH");
  Loaded L;
  if (!cfg.demo.empty()) {
    L.spec = jnr::catalog_instance(cfg.demo);
    L.source = "catalog";
  } else {
    L.spec = load_instance_file(cfg.file);
    L.source = "file";
  }
  L.hash = instance_hash(L.spec.triple);
  L.slug = slugify(L.spec.name);
  return L;
}

SamplerConfig sampler_of(const RunConfig& cfg) {
  SamplerConfig sc;
  sc.n_dirs = cfg.dirs;
  sc.n_grid_a = cfg.grid;
  sc.n_grid_b = cfg.grid;
  sc.seed = cfg.seed;
  sc.validate();
  return sc;
}

BoundaryParams boundary_of(const RunConfig& cfg) {
  BoundaryParams bp;
  if (cfg.eps_slab > 0) bp.eps_slab_rel = cfg.eps_slab;
  if (cfg.eps_member > 0) bp.eps_member_rel = cfg.eps_member;
  if (cfg.probes > 0) bp.n_probes = cfg.probes;
  return bp;
}

ordered_json config_json(const std::string& command, const RunConfig& cfg,
                         const SamplerConfig& sc, const BoundaryParams& bp) {
  ordered_json j;
  j["command"] = command;
  j["grid_a"] = sc.n_grid_a;
  j["grid_b"] = sc.n_grid_b;
  j["dirs"] = sc.n_dirs;
  j["seed"] = sc.seed;
  j["restarts"] = sc.restarts;
  j["max_iters"] = sc.max_iters;
  j["eps_slab_rel"] = bp.eps_slab_rel;
  j["delta_line_rel"] = bp.delta_line_rel;
  j["eps_member_rel"] = bp.eps_member_rel;
  j["probes"] = bp.n_probes;
  j["probe_margin"] = bp.probe_margin;
  j["continuity_tol_rel"] = bp.continuity_tol_rel;
  j["adjacency_angle"] = bp.adjacency_angle;
  j["jump_tol_rel"] = bp.jump_tol_rel;
  j["refine_rounds"] = bp.refine_rounds;
  j["out"] = cfg.out;
  return j;
}

ordered_json instance_json(const Loaded& L) {
  ordered_json j;
  j["name"] = L.spec.name;
  j["source"] = L.source;
  j["dim"] = L.spec.triple.dim();
  j["hash"] = L.hash;
  return j;
}

ordered_json skeleton(const std::string& command, const RunConfig& cfg,
                      const Loaded& L, const SamplerConfig& sc,
                      const BoundaryParams& bp) {
  ordered_json j;
  j["schema_version"] = jnr::kReportSchemaVersion;
  j["library_version"] = jnr::kLibraryVersion;
  j["instance"] = instance_json(L);
  j["config"] = config_json(command, cfg, sc, bp);
  return j;
}

void emit_report(const fs::path& out, const std::string& fname,
                 const ordered_json& j) {
  write_json_file(out / fname, j);
  std::printf("wrote %s\n", (out / fname).string().c_str());
}

// ---------------------------------------------------------------- sample

ordered_json do_sample(const Loaded& L, const RunConfig& cfg,
                       const SamplerConfig& sc) {
  const fs::path out(cfg.out);
  ordered_json arts = ordered_json::array();
  const auto emit = [&](const PointCloud3& cloud, const std::string& suffix) {
    const std::string fname = L.slug + "_" + suffix + ".csv";
    write_cloud_csv(out / fname, cloud);
    ordered_json a;
    a["file"] = fname;
    a["range"] = jnr::range_kind_name(cloud.tag);
    a["rows"] = cloud.size();
    a["diameter"] = report_round(cloud.diameter());
    a["bbox_min"] = vec_json(cloud.bbox_min());
    a["bbox_max"] = vec_json(cloud.bbox_max());
    arts.push_back(a);
    std::printf("wrote %s (%d rows)\n", (out / fname).string().c_str(),
                cloud.size());
  };
  emit(jnr::sample_pi(L.spec.triple, sc), "pi");
  bool symmetric = false;
  bool homogeneous = false;
  try {
    const jnr::QuadraticFormTriple q = jnr::quadratic_map(L.spec.triple);
    symmetric = true;
    emit(jnr::sample_pi_plus(L.spec.triple, sc), "pi_plus");
    if (jnr::is_homogeneous(q)) {
      homogeneous = true;
      emit(jnr::sample_lambda_r(jnr::m_matrices(q), sc), "lambda_r");
    }
  } catch (const jnr::NotSwapSymmetricError&) {
  }
  ordered_json j;
  j["symmetric"] = symmetric;
  j["homogeneous"] = homogeneous;
  j["outputs"] = arts;
  return j;
}

// ------------------------------------------------------------------ hull

ordered_json do_hull(const PointCloud3& cloud, const fs::path& out,
                     const std::string& stem) {
  const jnr::ConvexPolytope3 hull = jnr::convex_hull(cloud);
  const std::string mesh = stem + "_hull.obj";
  write_hull_obj(out / mesh, hull);
  ordered_json j;
  j["mesh"] = mesh;
  j["cloud_range"] = jnr::range_kind_name(cloud.tag);
  j["cloud_rows"] = cloud.size();
  j["vertices"] = hull.vertices.size();
  j["facets"] = hull.facets.size();
  j["affine_rank"] = hull.affine_rank;
  j["diameter"] = report_round(hull.diameter);
  double total = 0;
  ordered_json areas = ordered_json::array();
  for (const jnr::Facet& f : hull.facets) {
    areas.push_back(report_round(f.area));
    total += f.area;
  }
  j["facet_areas"] = areas;
  j["total_area"] = report_round(total);
  ordered_json sup;
  const struct {
    const char* name;
    Vec3 dir;
  } axes[6] = {{"+x", {1, 0, 0}},  {"-x", {-1, 0, 0}}, {"+y", {0, 1, 0}},
               {"-y", {0, -1, 0}}, {"+z", {0, 0, 1}},  {"-z", {0, 0, -1}}};
  for (const auto& a : axes)
    sup[a.name] =
        report_round(jnr::support(hull, a.dir, hull.tol_hull()).value);
  j["support"] = sup;
  ordered_json warnings = ordered_json::array();
  if (hull.affine_rank < 3)
    warnings.push_back("cloud has affine rank " +
                       std::to_string(hull.affine_rank) +
                       "; the mesh is degenerate");
  j["warnings"] = warnings;
  std::printf("wrote %s (%zu vertices, %zu facets, rank %d)\n",
              (out / mesh).string().c_str(), hull.vertices.size(),
              hull.facets.size(), hull.affine_rank);
  for (const auto& w : warnings)
    std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  return j;
}

// The cloud a hull or classify run works on: the symmetric product range
// when every observable is swap-symmetric, the full product range otherwise.
PointCloud3 analysis_cloud(const Loaded& L, const SamplerConfig& sc) {
  try {
    jnr::quadratic_map(L.spec.triple);
    return jnr::sample_pi_plus(L.spec.triple, sc);
  } catch (const jnr::NotSwapSymmetricError&) {
    return jnr::sample_pi(L.spec.triple, sc);
  }
}

// -------------------------------------------------------------- classify

int seg_count(const std::vector<jnr::BoundaryFeature>& v, PhaseClass c) {
  int n = 0;
  for (const auto& s : v) n += s.cls == c ? 1 : 0;
  return n;
}

ordered_json do_classify(const Loaded& L, const SamplerConfig& sc,
                         const BoundaryParams& bp) {
  const jnr::ClassifyResult R =
      jnr::classify_instance(L.spec.triple, sc, bp);

  std::vector<int> patch_of(R.segments.size(), -1);
  for (size_t p = 0; p < R.patches.size(); ++p)
    for (int id : R.patches[p].feature_ids)
      patch_of[static_cast<size_t>(id)] = static_cast<int>(p);

  ordered_json j;
  j["symmetric_mode"] = R.symmetric_mode;
  j["cloud"] = {{"points", R.cloud.size()},
                {"diameter", report_round(R.cloud.diameter())}};
  j["hull"] = {{"vertices", R.hull.vertices.size()},
               {"facets", R.hull.facets.size()},
               {"affine_rank", R.hull.affine_rank}};
  j["exposed_directions"] = R.n_exposed_dirs;

  ordered_json segs = ordered_json::array();
  for (size_t i = 0; i < R.segments.size(); ++i) {
    const jnr::BoundaryFeature& s = R.segments[i];
    ordered_json e;
    e["id"] = i;
    e["kind"] = jnr::feature_kind_name(s.kind);
    e["class"] = jnr::phase_class_name(s.cls);
    e["lambda"] = vec_json(s.direction);
    e["a"] = vec_json(s.seg_a);
    e["b"] = vec_json(s.seg_b);
    e["length"] = report_round(s.length());
    e["patch"] = patch_of[i];
    ordered_json pd = ordered_json::array();
    for (double d : s.probe_distances) pd.push_back(report_round(d));
    e["probe_distances"] = pd;
    segs.push_back(e);
  }
  j["segments"] = segs;

  ordered_json faces = ordered_json::array();
  for (const jnr::BoundaryFeature& f : R.faces) {
    ordered_json e;
    e["kind"] = jnr::feature_kind_name(f.kind);
    e["class"] = jnr::phase_class_name(f.cls);
    e["lambda"] = vec_json(f.direction);
    ordered_json poly = ordered_json::array();
    for (const Vec3& v : f.polygon) poly.push_back(vec_json(v));
    e["polygon"] = poly;
    ordered_json pd = ordered_json::array();
    for (double d : f.probe_distances) pd.push_back(report_round(d));
    e["probe_distances"] = pd;
    faces.push_back(e);
  }
  j["faces"] = faces;

  ordered_json patches = ordered_json::array();
  for (size_t p = 0; p < R.patches.size(); ++p) {
    const jnr::RuledPatch& rp = R.patches[p];
    ordered_json e;
    e["id"] = p;
    e["class"] = jnr::phase_class_name(rp.cls);
    e["segments"] = rp.feature_ids;
    e["representative"] = rp.representative;
    patches.push_back(e);
  }
  j["patches"] = patches;

  ordered_json counts;
  counts["gapless_patches"] = R.count_patches(PhaseClass::Gapless);
  counts["symmetry_breaking_patches"] =
      R.count_patches(PhaseClass::SymmetryBreaking);
  counts["unclassified_patches"] = R.count_patches(PhaseClass::Unclassified);
  counts["gapless_segments"] = seg_count(R.segments, PhaseClass::Gapless);
  counts["symmetry_breaking_segments"] =
      seg_count(R.segments, PhaseClass::SymmetryBreaking);
  counts["unclassified_segments"] =
      seg_count(R.segments, PhaseClass::Unclassified);
  counts["faces"] = R.faces.size();
  j["counts"] = counts;

  std::printf(
      "classify %s: %zu segments, %zu faces; patches gapless=%d "
      "symmetry_breaking=%d unclassified=%d\n",
      L.spec.name.c_str(), R.segments.size(), R.faces.size(),
      R.count_patches(PhaseClass::Gapless),
      R.count_patches(PhaseClass::SymmetryBreaking),
      R.count_patches(PhaseClass::Unclassified));
  return j;
}

// ----------------------------------------------------------------- phase

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  double v[3];
  const char* s = text.c_str();
  for (int k = 0; k < 3; ++k) {
    char* end = nullptr;
    v[k] = std::strtod(s, &end);
    if (end == s) throw ParseError(flag + ": expected x,y,z, got '" + text + "'");
    s = end;
    if (k < 2) {
      if (*s != ',')
        throw ParseError(flag + ": expected x,y,z, got '" + text + "'");
      ++s;
    }
  }
  if (*s != '\0')
    throw ParseError(flag + ": trailing characters in '" + text + "'");
  return {v[0], v[1], v[2]};
}

std::vector<Vec3> build_path(const RunConfig& cfg, ordered_json& path_json) {
  if (!cfg.path_file.empty()) {
    const PointCloud3 cloud = read_cloud_csv(cfg.path_file);
    std::vector<Vec3> dirs;
    for (const Vec3& p : cloud.pts) {
      if (p.norm() < 1e-12)
        throw ParseError(cfg.path_file + ": zero direction in path");
      dirs.push_back(p.normalized());
    }
    if (dirs.size() < 2)
      throw ParseError(cfg.path_file + ": a path needs at least 2 directions");
    path_json["type"] = "explicit";
    path_json["file"] = fs::path(cfg.path_file).filename().string();
    path_json["steps"] = dirs.size();
    return dirs;
  }
  const Vec3 a = parse_vec3(cfg.path_a, "--path-a");
  const Vec3 b = parse_vec3(cfg.path_b, "--path-b");
  if (a.norm() < 1e-12 || b.norm() < 1e-12)
    throw ParseError("path endpoints must be nonzero");
  const Vec3 an = a.normalized();
  const Vec3 bn = b.normalized();
  if (an.cross(bn).norm() < 1e-9)
    throw ParseError("path endpoints are collinear; no great circle");
  if (cfg.steps < 2) throw ParseError("--steps must be at least 2");
  path_json["type"] = "great_circle";
  path_json["a"] = vec_json(an);
  path_json["b"] = vec_json(bn);
  path_json["steps"] = cfg.steps;
  return jnr::great_circle_path(an, bn, cfg.steps);
}

ordered_json do_phase(const Loaded& L, const RunConfig& cfg,
                      const SamplerConfig& sc, const BoundaryParams& bp) {
  ordered_json path_json;
  const std::vector<Vec3> path = build_path(cfg, path_json);
  const jnr::PhaseScanResult R = jnr::phase_scan(L.spec.triple, path, sc, bp);
  ordered_json j;
  j["path"] = path_json;
  ordered_json pts = ordered_json::array();
  for (size_t i = 0; i < R.points.size(); ++i) {
    const jnr::PhasePoint& p = R.points[i];
    ordered_json e;
    e["index"] = i;
    e["lambda"] = vec_json(p.lambda);
    e["e0"] = report_round(p.e0);
    e["e0_seesaw"] = report_round(p.e0_seesaw);
    e["flagged"] = p.flagged;
    e["kind"] = jnr::feature_kind_name(p.kind);
    e["class"] = jnr::phase_class_name(p.cls);
    e["contact"] = vec_json(p.contact);
    pts.push_back(e);
  }
  j["points"] = pts;
  j["transitions"] = R.transitions;
  j["transition_count"] = R.transitions.size();
  j["closed_path"] = R.closed_path;
  std::printf("phase %s: %zu points, %zu transitions\n", L.spec.name.c_str(),
              R.points.size(), R.transitions.size());
  return j;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

// ---------------------------------------------------------- entry points

int cmd_sample(const RunConfig& cfg) {
  const Loaded L = load_instance(cfg);
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  fs::create_directories(cfg.out);
  ordered_json rep = skeleton("sample", cfg, L, sc, bp);
  rep.update(do_sample(L, cfg, sc));
  emit_report(cfg.out, L.slug + "_sample_report.json", rep);
  return 0;
}

int cmd_hull(const RunConfig& cfg) {
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  fs::create_directories(cfg.out);
  ordered_json rep;
  std::string stem;
  if (!cfg.file.empty() && ends_with(cfg.file, ".csv")) {
    // Hull an already-sampled cloud file.
    const PointCloud3 cloud = read_cloud_csv(cfg.file);
    stem = slugify(fs::path(cfg.file).stem().string());
    rep["schema_version"] = jnr::kReportSchemaVersion;
    rep["library_version"] = jnr::kLibraryVersion;
    ordered_json inst;
    inst["name"] = stem;
    inst["source"] = "cloud-file";
    inst["hash"] = bytes_hash(read_text_file(cfg.file));
    rep["instance"] = inst;
    rep["config"] = config_json("hull", cfg, sc, bp);
    rep.update(do_hull(cloud, cfg.out, stem));
  } else {
    const Loaded L = load_instance(cfg);
    stem = L.slug;
    rep = skeleton("hull", cfg, L, sc, bp);
    rep.update(do_hull(analysis_cloud(L, sc), cfg.out, stem));
  }
  emit_report(cfg.out, stem + "_hull_report.json", rep);
  return 0;
}

int cmd_classify(const RunConfig& cfg) {
  const Loaded L = load_instance(cfg);
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  fs::create_directories(cfg.out);
  ordered_json rep = skeleton("classify", cfg, L, sc, bp);
  rep.update(do_classify(L, sc, bp));
  emit_report(cfg.out, L.slug + "_classify_report.json", rep);
  return 0;
}

int cmd_phase(const RunConfig& cfg) {
  const Loaded L = load_instance(cfg);
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  fs::create_directories(cfg.out);
  ordered_json rep = skeleton("phase", cfg, L, sc, bp);
  rep.update(do_phase(L, cfg, sc, bp));
  emit_report(cfg.out, L.slug + "_phase_report.json", rep);
  return 0;
}

int cmd_demo(const RunConfig& cfg) {
  const Loaded L = load_instance(cfg);
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  fs::create_directories(cfg.out);

  ordered_json combined = skeleton("demo", cfg, L, sc, bp);

  ordered_json sample = skeleton("sample", cfg, L, sc, bp);
  sample.update(do_sample(L, cfg, sc));
  emit_report(cfg.out, L.slug + "_sample_report.json", sample);

  ordered_json hull = skeleton("hull", cfg, L, sc, bp);
  hull.update(do_hull(analysis_cloud(L, sc), cfg.out, L.slug));
  emit_report(cfg.out, L.slug + "_hull_report.json", hull);

  ordered_json classify = skeleton("classify", cfg, L, sc, bp);
  classify.update(do_classify(L, sc, bp));
  emit_report(cfg.out, L.slug + "_classify_report.json", classify);

  ordered_json phase = skeleton("phase", cfg, L, sc, bp);
  phase.update(do_phase(L, cfg, sc, bp));
  emit_report(cfg.out, L.slug + "_phase_report.json", phase);

  combined["sample"] = std::move(sample);
  combined["hull"] = std::move(hull);
  combined["classify"] = std::move(classify);
  combined["phase"] = std::move(phase);
  emit_report(cfg.out, L.slug + "_demo_report.json", combined);
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.file.empty())
    throw ParseError("report needs --file CLOUD.csv");
  const SamplerConfig sc = sampler_of(cfg);
  const BoundaryParams bp = boundary_of(cfg);
  const PointCloud3 cloud = read_cloud_csv(cfg.file);
  const std::string stem = slugify(fs::path(cfg.file).stem().string());
  fs::create_directories(cfg.out);

  ordered_json rep;
  rep["schema_version"] = jnr::kReportSchemaVersion;
  rep["library_version"] = jnr::kLibraryVersion;
  ordered_json inst;
  if (!cfg.demo.empty()) {
    const jnr::InstanceSpec spec = jnr::catalog_instance(cfg.demo);
    inst["name"] = spec.name;
    inst["source"] = "catalog";
    inst["dim"] = spec.triple.dim();
    inst["hash"] = instance_hash(spec.triple);
  } else {
    inst["name"] = stem;
    inst["source"] = "cloud-file";
    inst["hash"] = bytes_hash(read_text_file(cfg.file));
  }
  rep["instance"] = inst;
  rep["config"] = config_json("report", cfg, sc, bp);

  rep["file"] = fs::path(cfg.file).filename().string();
  rep["range"] = jnr::range_kind_name(cloud.tag);
  rep["rows"] = cloud.size();
  rep["has_provenance"] = cloud.has_provenance();
  rep["bbox_min"] = vec_json(cloud.bbox_min());
  rep["bbox_max"] = vec_json(cloud.bbox_max());
  rep["diameter"] = report_round(cloud.diameter());
  rep["centroid"] = vec_json(cloud.centroid());
  const jnr::ConvexPolytope3 hull = jnr::convex_hull(cloud);
  rep["hull"] = {{"vertices", hull.vertices.size()},
                 {"affine_rank", hull.affine_rank}};

  if (!cfg.demo.empty()) {
    const jnr::InstanceSpec spec = jnr::catalog_instance(cfg.demo);
    if (cloud.has_provenance()) {
      // Re-evaluate every row from its generating Bloch vectors; a sound
      // cloud reproduces itself exactly up to text round-off.
      const jnr::ProductMap pm = jnr::ProductMap::from_triple(spec.triple);
      double worst = 0;
      for (int i = 0; i < cloud.size(); ++i) {
        const jnr::Provenance& pr = cloud.prov[static_cast<size_t>(i)];
        worst = std::max(
            worst, (pm.eval(pr.alpha, pr.beta) - cloud.pts[static_cast<size_t>(i)])
                       .norm());
      }
      rep["provenance_residual_max"] = report_round(worst);
    }
    if (cfg.demo == "cone" && (cloud.tag == jnr::RangeKind::PiPlus ||
                               cloud.tag == jnr::RangeKind::LambdaR)) {
      double worst = 0, zmin = 1e300, zmax = -1e300;
      for (const Vec3& p : cloud.pts) {
        worst = std::max(
            worst, std::abs(p.x * p.x + p.y * p.y - (1 - p.z) * (1 - p.z)));
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
      }
      rep["cone_identity"] = {{"max_abs_residual", report_round(worst)},
                              {"z_min", report_round(zmin)},
                              {"z_max", report_round(zmax)}};
    }
  }

  emit_report(cfg.out, stem + "_report.json", rep);
  return 0;
}

} // namespace jnrcli
