#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "jnr/cloud.hpp"
#include "jnr/hull.hpp"
#include "jnr/ranges.hpp"

namespace jnr {

enum class FeatureKind { ExposedPoint, Segment, PlanarFace };
enum class PhaseClass { Gapless, SymmetryBreaking, Unclassified, None };

const char* feature_kind_name(FeatureKind k);
const char* phase_class_name(PhaseClass c);

// Geometric tolerances of the sweep/classify pipeline, relative to the
// cloud diameter where geometric. Defaults are tuned so the bundled
// instances classify unambiguously; see the notes on each field.
struct BoundaryParams {
  // Half-thickness of the supporting slab. Thin enough that a slab on a
  // curved cap stays well under delta_line (spread of slab-on-curvature
  // grows like sqrt(diam * eps_slab)).
  double eps_slab_rel = 5e-4;
  // Significant-spread threshold of the slice PCA. Must exceed the widest
  // slab footprint on smooth boundary (else caps masquerade as segments)
  // and stay under the shortest genuine ruling.
  double delta_line_rel = 8e-2;
  // Membership acceptance distance.
  double eps_member_rel = 1e-2;
  int n_probes = 9;
  // Interior fraction kept away from each segment end when probing;
  // endpoints always lie in the product range, so a generous margin keeps
  // the probes meaningful.
  double probe_margin = 0.25;
  // Patch assembly: max endpoint mismatch and direction angle between
  // neighboring segments of one ruled patch.
  double continuity_tol_rel = 5e-2;
  double adjacency_angle = 0.35;
  // Contact-point jump treated as a phase transition in scans.
  double jump_tol_rel = 0.1;
  // Adaptive sampling rounds around detected segments (0 disables).
  int refine_rounds = 4;
  // Active-set tolerance of support queries, relative.
  double tol_active_rel = 1e-9;
};

struct SupportSlice {
  Vec3 direction{0, 0, 1};
  double value = 0;
  std::vector<int> active; // cloud indices within eps_slab of the plane
};

struct BoundaryFeature {
  FeatureKind kind = FeatureKind::ExposedPoint;
  Vec3 direction{0, 0, 1};
  PhaseClass cls = PhaseClass::None;
  Vec3 point{0, 0, 0};              // ExposedPoint location
  Vec3 seg_a{0, 0, 0}, seg_b{0, 0, 0};
  std::vector<Vec3> polygon;        // PlanarFace perimeter
  std::vector<double> probe_distances;
  // Generating product states of the polished endpoints (segments).
  ProductState prov_a{{0, 0, 1}, {0, 0, 1}};
  ProductState prov_b{{0, 0, 1}, {0, 0, 1}};

  double length() const { return dist(seg_a, seg_b); }
};

struct RuledPatch {
  PhaseClass cls = PhaseClass::Unclassified;
  std::vector<int> feature_ids; // indices into the segment feature list
  int representative = -1;      // member with the smallest probe distance
};

// Supporting-plane sweep: per direction the support value over the cloud
// and the indices within eps_slab of the plane. Throws EmptyCloudError.
std::vector<SupportSlice> sweep(const PointCloud3& cloud,
                                const std::vector<Vec3>& dirs,
                                double eps_slab);

// PCA taxonomy of one slice: 0 significant spreads -> ExposedPoint at the
// active centroid; 1 -> Segment between the extreme active points along
// the principal axis; 2 -> PlanarFace with the active set's 2D hull.
// Throws DegenerateSliceError on an empty active set.
BoundaryFeature feature_of_slice(const PointCloud3& cloud,
                                 const SupportSlice& s, double delta_line);

struct MembershipResult {
  bool member = false;
  double distance = 0;
  ProductState certificate{{0, 0, 1}, {0, 0, 1}};
};

// Multi-start local minimization of |F(state) - q| over product states
// (projected gradient on the Bloch spheres, seeded from the nearest grid
// samples plus cfg.restarts random starts). Symmetric mode restricts to
// alpha = beta and evaluates through the quadratic map.
class MembershipSolver {
 public:
  MembershipSolver(const ObservableTriple& tr, const SamplerConfig& cfg,
                   bool symmetric);

  MembershipResult query(const Vec3& q, double eps_member) const;
  bool symmetric() const { return symmetric_; }
  const ProductMap& map() const { return pm_; }

 private:
  ProductMap pm_;
  QuadraticFormTriple qf_; // symmetric mode
  bool symmetric_ = false;
  SamplerConfig cfg_;
  std::vector<Vec3> seeds_a_, seeds_b_;
  std::vector<Vec3> seed_values_;

  MembershipResult refine(const Vec3& q, ProductState s, int iters) const;
};

// Probe the segment interior (n_probes points across the middle
// 1 - 2*probe_margin fraction): Gapless when every probe sits essentially
// on the product range (a tolerance far below eps_member, since ruled
// boundary can approach the range to high order near a gapless seam),
// SymmetryBreaking when the member fraction is at most 0.1, Unclassified
// otherwise. Fills cls and probe_distances.
// `boundary_planes` are raw (unmerged) hull facet planes as (normal, offset)
// pairs. A Gapless verdict additionally requires the chord midpoint to lie
// on the hull boundary: membership probes alone cannot tell a boundary seam
// from a chord through a solid region of the product range, but the facet
// planes can. Pass an empty vector to skip that check.
void classify_segment(const MembershipSolver& solver, BoundaryFeature& seg,
                      const BoundaryParams& bp, double diameter,
                      const std::vector<std::pair<Vec3, double>>&
                          boundary_planes = {});

// Probe the face interior (perimeter shrunk toward the centroid).
void classify_face(const MembershipSolver& solver, BoundaryFeature& face,
                   const BoundaryParams& bp, double diameter);

// Maximal groups of segments with compatible direction, endpoint
// continuity, and equal class (union-find; handles closed loops).
std::vector<RuledPatch> assemble_patches(
    const std::vector<BoundaryFeature>& segments, const BoundaryParams& bp,
    double diameter);

struct ClassifyResult {
  PointCloud3 cloud;
  ConvexPolytope3 hull;
  bool symmetric_mode = false;
  std::vector<BoundaryFeature> segments; // deduplicated, classified
  std::vector<BoundaryFeature> faces;
  std::vector<RuledPatch> patches;
  int n_exposed_dirs = 0;
  // Raw facet planes of the final hull, kept for boundary-depth checks.
  std::vector<std::pair<Vec3, double>> support_planes;

  int count_patches(PhaseClass c) const;
  // Representative segment of each patch of the given class.
  std::vector<const BoundaryFeature*> representatives(PhaseClass c) const;
};

// Full pipeline: sample Pi (or Pi_plus when all H_i are swap-symmetric),
// hull, sweep over Fibonacci directions plus hull facet normals with
// adaptive refinement, polish segment endpoints by local support ascent,
// deduplicate, classify, and assemble patches.
ClassifyResult classify_instance(const ObservableTriple& tr,
                                 const SamplerConfig& cfg,
                                 const BoundaryParams& bp);

// Ground energy of dir.H over product states: polished best grid sample.
// `cloud` must carry provenance (a Pi sample of tr).
double product_ground_energy(const ProductMap& pm, const PointCloud3& cloud,
                             const Vec3& dir);

// Symmetric analog over a Pi_plus cloud; the polish keeps alpha = beta, so
// the value is the minimum over symmetric product states.
double symmetric_ground_energy(const QuadraticFormTriple& qf,
                               const PointCloud3& cloud, const Vec3& dir);

struct PhasePoint {
  Vec3 lambda{0, 0, 1};
  double e0 = 0;         // hull-route estimate (polished grid argmin)
  double e0_seesaw = 0;  // independent multi-start estimate
  bool flagged = false;  // routes disagree beyond 1e-4 * diameter
  FeatureKind kind = FeatureKind::ExposedPoint;
  PhaseClass cls = PhaseClass::None;
  Vec3 contact{0, 0, 0};
};

struct PhaseScanResult {
  std::vector<PhasePoint> points;
  // One entry per transition event: the step index after which the event
  // starts. Consecutive changed boundaries collapse into one event.
  std::vector<int> transitions;
  bool closed_path = false;
};

// Per path direction: ground energy (both routes), the boundary feature on
// the ground side (sweep in -lambda), and its class. Transitions are
// grouped change events of feature kind/class or contact jumps. Symmetric
// instances are scanned in symmetric mode: both energy routes then minimize
// over alpha = beta product states.
PhaseScanResult phase_scan(const ObservableTriple& tr,
                           const std::vector<Vec3>& path,
                           const SamplerConfig& cfg,
                           const BoundaryParams& bp);

// Great-circle path through a and b (normalized, must not be collinear).
std::vector<Vec3> great_circle_path(const Vec3& a, const Vec3& b, int steps);

} // namespace jnr
