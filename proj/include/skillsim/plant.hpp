#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "skillsim/geometry.hpp"
#include "skillsim/random.hpp"

namespace skillsim {

/// Raised when the integrator leaves its validity envelope (non-finite state
/// or penetration beyond 5 mm). Callers abort the trial with a diagnostic.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlantConfig {
  Vec3 mass = Vec3::Constant(2.0);         // kg, diagonal Cartesian inertia
  Vec3 inertia = Vec3::Constant(0.05);     // kg m^2
  double contact_stiffness = 5e4;          // N/m
  double contact_damping = 200.0;          // N s/m
  double friction_coefficient = 0.3;
  double force_noise_sigma = 0.25;         // N
  double torque_noise_sigma = 0.025;       // Nm
  double step_dt = 0.001;                  // s, equals the controller period

  Vec6 inertia6() const;
  bool is_valid() const;
};

enum class ScenarioKind { puzzle, key, peg };

struct CylinderSection { double radius; };
struct TriangleSection { double side; };
struct PlateSection { double width; double thickness; };
using CrossSection = std::variant<CylinderSection, TriangleSection, PlateSection>;

/// Task geometry. The hole frame has its z axis pointing into the hole; the
/// surface containing the hole is the plane z = 0 of that frame.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::peg;
  Pose hole_pose;           // hole frame in world coordinates
  double depth = 0.0;       // m, full insertion distance d
  double clearance = 0.0;   // m, radial gap between peg and hole
  double chamfer = 0.0;     // m, entry cone size
  CrossSection cross_section = CylinderSection{0.01};
  double roi_radius = 0.05;         // m, region of interest around the hole
  double max_rot_amplitude = 0.0;   // rad, a_r of the oscillatory motion
  double peg_length = 0.05;         // m, from tip along the body

  bool is_valid() const;
};

ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(ScenarioKind kind);

/// Fills the published dimensions of the three task variants.
ScenarioSpec make_scenario(ScenarioKind kind, const Pose& hole_pose);

/// The peg frame sits at the tip center with +z pointing in the insertion
/// direction; the body occupies z in [-length, 0].
struct PegGeometry {
  std::vector<Eigen::Vector2d> perimeter;  // tip cross-section outline
  double length = 0.0;
};

PegGeometry make_peg_geometry(const ScenarioSpec& scenario);

struct PlantState {
  PerceptVector percept;  // world frame
  bool in_contact = false;
  std::optional<double> first_contact_time;
};

/// Total contact wrench on the peg about the tip center, world frame.
/// Penalty normal force along the local exit direction of the peg/hole
/// signed-distance field (including the chamfer cone) plus regularized
/// Coulomb friction.
Wrench contact_wrench(const PlantState& state, const ScenarioSpec& scenario,
                      const PlantConfig& config);
Wrench contact_wrench(const PlantState& state, const ScenarioSpec& scenario,
                      const PlantConfig& config, const PegGeometry& geom,
                      double* max_penetration);

/// Semi-implicit Euler step under the applied wrench. The measured external
/// wrench in the returned percept is the contact wrench plus Gaussian noise.
/// Gravity is treated as perfectly compensated.
PlantState plant_step(const PlantState& state, const Wrench& applied,
                      const ScenarioSpec& scenario, const PlantConfig& config, Rng& rng);
PlantState plant_step(const PlantState& state, const Wrench& applied,
                      const ScenarioSpec& scenario, const PlantConfig& config, Rng& rng,
                      const PegGeometry& geom);

/// Depth of the peg tip below the hole entry plane along the hole axis;
/// negative while above the surface.
double insertion_depth(const PlantState& state, const ScenarioSpec& scenario);

/// Signed distance of a point to the hole cross-section boundary in the hole
/// frame xy plane (negative inside the opening), with outward gradient.
/// Exposed for tests.
double cross_section_distance(const CrossSection& cs, double clearance,
                              const Eigen::Vector2d& xy, Eigen::Vector2d* grad);

}  // namespace skillsim
