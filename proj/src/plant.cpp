#include "skillsim/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace skillsim {
namespace {

constexpr double kContactForceThreshold = 0.5;  // N, sets first_contact_time
constexpr double kDeepPenetration = 0.005;      // m, integrity fault beyond this
constexpr double kSlipSpeed = 1e-4;             // m/s, friction regularization
constexpr double kNormalClusterDot = 0.7;

std::vector<Eigen::Vector2d> polygon_perimeter(const std::vector<Eigen::Vector2d>& verts,
                                               double max_spacing) {
  std::vector<Eigen::Vector2d> pts;
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = verts[i];
    const Eigen::Vector2d& b = verts[(i + 1) % n];
    const double len = (b - a).norm();
    const int segs = std::max(1, static_cast<int>(std::ceil(len / max_spacing)));
    for (int k = 0; k < segs; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / segs));
  }
  return pts;
}

std::vector<Eigen::Vector2d> cross_section_vertices(const CrossSection& cs) {
  if (std::holds_alternative<TriangleSection>(cs)) {
    const double side = std::get<TriangleSection>(cs).side;
    const double circumradius = side / std::sqrt(3.0);
    std::vector<Eigen::Vector2d> v;
    for (int k = 0; k < 3; ++k) {
      const double ang = M_PI / 2.0 + k * 2.0 * M_PI / 3.0;
      v.emplace_back(circumradius * std::cos(ang), circumradius * std::sin(ang));
    }
    return v;
  }
  const auto& plate = std::get<PlateSection>(cs);
  const double hw = plate.width / 2.0, ht = plate.thickness / 2.0;
  return {{hw, ht}, {-hw, ht}, {-hw, -ht}, {hw, -ht}};
}

double polygon_distance(const std::vector<Eigen::Vector2d>& verts, const Eigen::Vector2d& p,
                        Eigen::Vector2d* grad) {
  // Convex polygon, counterclockwise winding.
  const std::size_t n = verts.size();
  double inside_sd = -std::numeric_limits<double>::infinity();
  Eigen::Vector2d inside_grad(1, 0);
  bool inside = true;
  double best_out = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_closest = verts[0];
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = verts[i];
    const Eigen::Vector2d& b = verts[(i + 1) % n];
    const Eigen::Vector2d e = b - a;
    const Eigen::Vector2d normal = Eigen::Vector2d(e.y(), -e.x()).normalized();  // outward
    const double d = normal.dot(p - a);
    if (d > 0) inside = false;
    if (d > inside_sd) {
      inside_sd = d;
      inside_grad = normal;
    }
    const double t = std::clamp(e.dot(p - a) / e.squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d closest = a + t * e;
    const double dist = (p - closest).norm();
    if (dist < best_out) {
      best_out = dist;
      best_closest = closest;
    }
  }
  if (inside) {
    if (grad) *grad = inside_grad;
    return inside_sd;
  }
  if (grad) {
    const Eigen::Vector2d delta = p - best_closest;
    *grad = best_out > 1e-12 ? Eigen::Vector2d(delta / best_out) : inside_grad;
  }
  return best_out;
}

struct Probe {
  double depth = 0.0;    // penetration into material, > 0 when in contact
  Vec3 normal;           // exit direction, hole frame
};

// Material occupies z > 0 minus the hole opening (and its chamfer cone).
std::optional<Probe> probe_environment(const ScenarioSpec& sc, const Vec3& p) {
  if (p.z() <= 0.0) return std::nullopt;

  Eigen::Vector2d grad;
  const double cs = cross_section_distance(sc.cross_section, sc.clearance, p.head<2>(), &grad);
  const double widen = (sc.chamfer > 0.0 && p.z() < sc.chamfer) ? sc.chamfer - p.z() : 0.0;
  const double wall_pen = cs - widen;

  if (wall_pen <= 0.0) {
    if (p.z() <= sc.depth) return std::nullopt;  // inside the opening
    return Probe{p.z() - sc.depth, Vec3(0, 0, -1)};  // hole floor
  }

  // Laterally in material: exit up through the surface or sideways into the
  // opening, whichever is closer.
  Probe best{p.z(), Vec3(0, 0, -1)};
  if (p.z() <= sc.depth) {
    if (sc.chamfer > 0.0 && p.z() < sc.chamfer) {
      // 45 degree cone face: pushes inward and up.
      const double d = wall_pen / std::numbers::sqrt2;
      if (d < best.depth)
        best = Probe{d, Vec3(-grad.x(), -grad.y(), -1).normalized()};
    } else {
      if (wall_pen < best.depth) best = Probe{wall_pen, Vec3(-grad.x(), -grad.y(), 0)};
    }
  }
  return best;
}

struct Cluster {
  double depth = 0.0;
  Vec3 normal = Vec3::Zero();      // depth-weighted, world frame
  Vec3 centroid = Vec3::Zero();    // depth-weighted, world frame
  double weight = 0.0;
};

struct ContactSet {
  std::vector<Cluster> clusters;
  double max_depth = 0.0;
};

// Groups the penetrating sample points by exit direction; points pressing on
// the same face merge into one contact with the deepest penetration.
ContactSet build_contacts(const PlantState& state, const ScenarioSpec& scenario,
                          const PegGeometry& geom) {
  const Pose& pose = state.percept.pose;
  const Quat hole_rot_inv = scenario.hole_pose.orientation.conjugate();
  const Eigen::Matrix3d R = pose.orientation.toRotationMatrix();
  const Eigen::Matrix3d Rh = scenario.hole_pose.orientation.toRotationMatrix();

  // Candidate material points on the peg: tip outline, tip center, and the
  // outline at the height where the peg axis crosses the entry plane.
  std::vector<Vec3> pts_peg;
  pts_peg.reserve(2 * geom.perimeter.size() + 1);
  for (const auto& q : geom.perimeter) pts_peg.emplace_back(q.x(), q.y(), 0.0);
  pts_peg.emplace_back(0.0, 0.0, 0.0);

  const Vec3 tip_hole = hole_rot_inv * (pose.translation - scenario.hole_pose.translation);
  const Vec3 axis_hole = hole_rot_inv * (pose.orientation * Vec3::UnitZ());
  if (axis_hole.z() > 0.1 && tip_hole.z() > 0.0) {
    const double h = tip_hole.z() / axis_hole.z();
    if (h > 1e-6 && h < geom.length)
      for (const auto& q : geom.perimeter) pts_peg.emplace_back(q.x(), q.y(), -h);
  }

  ContactSet out;
  for (const Vec3& pp : pts_peg) {
    const Vec3 pw = pose.translation + R * pp;
    const Vec3 ph = hole_rot_inv * (pw - scenario.hole_pose.translation);
    const auto probe = probe_environment(scenario, ph);
    if (!probe) continue;
    out.max_depth = std::max(out.max_depth, probe->depth);
    const Vec3 n_world = Rh * probe->normal;
    const Vec3 weighted_n = probe->depth * n_world;
    bool merged = false;
    for (auto& c : out.clusters) {
      if (c.normal.normalized().dot(n_world) > kNormalClusterDot) {
        c.depth = std::max(c.depth, probe->depth);
        c.normal += weighted_n;
        c.centroid += probe->depth * pw;
        c.weight += probe->depth;
        merged = true;
        break;
      }
    }
    if (!merged)
      out.clusters.push_back({probe->depth, weighted_n, probe->depth * pw, probe->depth});
  }
  return out;
}

}  // namespace

Vec6 PlantConfig::inertia6() const {
  Vec6 v;
  v << mass, inertia;
  return v;
}

bool PlantConfig::is_valid() const {
  return (mass.array() > 0).all() && (inertia.array() > 0).all() && contact_stiffness > 0 &&
         contact_damping > 0 && friction_coefficient > 0 && force_noise_sigma >= 0 &&
         torque_noise_sigma >= 0 && step_dt > 0;
}

bool ScenarioSpec::is_valid() const {
  return clearance > 0 && depth > 0 && chamfer >= 0 && roi_radius > 0 && peg_length > depth &&
         hole_pose.is_valid();
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "puzzle") return ScenarioKind::puzzle;
  if (s == "key") return ScenarioKind::key;
  if (s == "peg") return ScenarioKind::peg;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::puzzle: return "puzzle";
    case ScenarioKind::key: return "key";
    case ScenarioKind::peg: return "peg";
  }
  return "?";
}

ScenarioSpec make_scenario(ScenarioKind kind, const Pose& hole_pose) {
  ScenarioSpec sc;
  sc.kind = kind;
  sc.hole_pose = hole_pose;
  switch (kind) {
    case ScenarioKind::puzzle:
      sc.cross_section = TriangleSection{0.075};
      sc.depth = 0.005;
      sc.clearance = 1e-4;
      sc.chamfer = 0.0;
      sc.max_rot_amplitude = 0.09;
      break;
    case ScenarioKind::key:
      sc.cross_section = PlateSection{0.02, 0.002};
      sc.depth = 0.0023;
      sc.clearance = 1e-4;
      sc.chamfer = 5e-4;
      sc.max_rot_amplitude = 0.0175;
      break;
    case ScenarioKind::peg:
      sc.cross_section = CylinderSection{0.01};
      sc.depth = 0.035;
      sc.clearance = 5e-5;
      sc.chamfer = 5e-4;
      sc.max_rot_amplitude = 0.035;
      break;
  }
  sc.peg_length = sc.depth + 0.015;
  return sc;
}

double cross_section_distance(const CrossSection& cs, double clearance,
                              const Eigen::Vector2d& xy, Eigen::Vector2d* grad) {
  if (std::holds_alternative<CylinderSection>(cs)) {
    const double r = std::get<CylinderSection>(cs).radius + clearance;
    const double rho = xy.norm();
    if (grad) *grad = rho > 1e-12 ? Eigen::Vector2d(xy / rho) : Eigen::Vector2d(1, 0);
    return rho - r;
  }
  return polygon_distance(cross_section_vertices(cs), xy, grad) - clearance;
}

PegGeometry make_peg_geometry(const ScenarioSpec& scenario) {
  PegGeometry g;
  g.length = scenario.peg_length;
  if (std::holds_alternative<CylinderSection>(scenario.cross_section)) {
    const double r = std::get<CylinderSection>(scenario.cross_section).radius;
    for (int k = 0; k < 16; ++k) {
      const double ang = k * 2.0 * M_PI / 16;
      g.perimeter.emplace_back(r * std::cos(ang), r * std::sin(ang));
    }
  } else {
    g.perimeter = polygon_perimeter(cross_section_vertices(scenario.cross_section), 0.006);
  }
  return g;
}

Wrench contact_wrench(const PlantState& state, const ScenarioSpec& scenario,
                      const PlantConfig& config) {
  const PegGeometry geom = make_peg_geometry(scenario);
  return contact_wrench(state, scenario, config, geom, nullptr);
}

Wrench contact_wrench(const PlantState& state, const ScenarioSpec& scenario,
                      const PlantConfig& config, const PegGeometry& geom,
                      double* max_penetration) {
  const ContactSet contacts = build_contacts(state, scenario, geom);
  if (max_penetration) *max_penetration = contacts.max_depth;

  Wrench total;
  for (const auto& c : contacts.clusters) {
    const Vec3 n = c.normal.normalized();
    const Vec3 at = c.centroid / c.weight;
    const Vec3 lever = at - state.percept.pose.translation;
    const Vec3 v_pt = state.percept.twist.linear + state.percept.twist.angular.cross(lever);
    const double pen_rate = -v_pt.dot(n);
    const double fn = std::max(
        0.0, config.contact_stiffness * c.depth + config.contact_damping * pen_rate);
    Vec3 f = fn * n;
    const Vec3 v_t = v_pt - v_pt.dot(n) * n;
    const double vt_norm = v_t.norm();
    if (vt_norm > 1e-15) {
      const double scale = vt_norm > kSlipSpeed ? 1.0 / vt_norm : 1.0 / kSlipSpeed;
      f -= config.friction_coefficient * fn * scale * v_t;
    }
    total.force += f;
    total.torque += lever.cross(f);
  }
  return total;
}

PlantState plant_step(const PlantState& state, const Wrench& applied,
                      const ScenarioSpec& scenario, const PlantConfig& config, Rng& rng) {
  const PegGeometry geom = make_peg_geometry(scenario);
  return plant_step(state, applied, scenario, config, rng, geom);
}

PlantState plant_step(const PlantState& state, const Wrench& applied,
                      const ScenarioSpec& scenario, const PlantConfig& config, Rng& rng,
                      const PegGeometry& geom) {
  if (!applied.is_finite()) throw SimulationFault("non-finite applied wrench");

  const ContactSet contacts = build_contacts(state, scenario, geom);
  if (contacts.max_depth > kDeepPenetration)
    throw SimulationFault("deep penetration: " + std::to_string(contacts.max_depth) + " m");

  const double dt = config.step_dt;
  const Pose& pose = state.percept.pose;

  // Normal forces from the penalty law, explicit.
  Wrench contact;
  struct Resolved {
    Vec3 n, lever;
    double fn;
  };
  std::vector<Resolved> resolved;
  resolved.reserve(contacts.clusters.size());
  for (const auto& c : contacts.clusters) {
    const Vec3 n = c.normal.normalized();
    const Vec3 lever = c.centroid / c.weight - pose.translation;
    const Vec3 v_pt = state.percept.twist.linear + state.percept.twist.angular.cross(lever);
    const double fn = std::max(
        0.0, config.contact_stiffness * c.depth - config.contact_damping * v_pt.dot(n));
    contact.force += fn * n;
    contact.torque += lever.cross(fn * n);
    resolved.push_back({n, lever, fn});
  }

  Vec3 v = state.percept.twist.linear +
           dt * (applied.force + contact.force).cwiseQuotient(config.mass);
  Vec3 w = state.percept.twist.angular +
           dt * (applied.torque + contact.torque).cwiseQuotient(config.inertia);

  // Friction, solved implicitly against the post-step velocity so the stick
  // regime stays stable at the controller period.
  const double mass = config.mass.mean();
  for (const auto& rc : resolved) {
    if (rc.fn <= 0.0) continue;
    const Vec3 v_pt = v + w.cross(rc.lever);
    const Vec3 v_t = v_pt - v_pt.dot(rc.n) * rc.n;
    const double vt_norm = v_t.norm();
    if (vt_norm < 1e-15) continue;
    const double mu_fn = config.friction_coefficient * rc.fn;
    const double c_f = mu_fn / kSlipSpeed;
    Vec3 f_t = -(c_f / (1.0 + dt * c_f / mass)) * v_t;
    if (f_t.norm() > mu_fn) f_t = -mu_fn * v_t / vt_norm;  // kinetic slip
    v += dt * f_t.cwiseQuotient(config.mass);
    w += dt * rc.lever.cross(f_t).cwiseQuotient(config.inertia);
    contact.force += f_t;
    contact.torque += rc.lever.cross(f_t);
  }

  PlantState out = state;
  out.percept.twist.linear = v;
  out.percept.twist.angular = w;
  out.percept.pose = integrate_twist(state.percept.pose, out.percept.twist, dt);
  out.percept.time = state.percept.time + dt;

  std::normal_distribution<double> unit(0.0, 1.0);
  Vec3 fn, tn;
  for (int i = 0; i < 3; ++i) fn[i] = unit(rng);
  for (int i = 0; i < 3; ++i) tn[i] = unit(rng);
  out.percept.external_wrench.force = contact.force + config.force_noise_sigma * fn;
  out.percept.external_wrench.torque = contact.torque + config.torque_noise_sigma * tn;

  out.in_contact = contact.force.norm() > kContactForceThreshold;
  if (out.in_contact && !out.first_contact_time)
    out.first_contact_time = state.percept.time;

  if (!out.percept.pose.is_valid(1e-6) || !out.percept.twist.is_finite())
    throw SimulationFault("non-finite plant state");
  return out;
}

double insertion_depth(const PlantState& state, const ScenarioSpec& scenario) {
  const Vec3 tip_hole = scenario.hole_pose.orientation.conjugate() *
                        (state.percept.pose.translation - scenario.hole_pose.translation);
  return tip_hole.z();
}

}  // namespace skillsim
