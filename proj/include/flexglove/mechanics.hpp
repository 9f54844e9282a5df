#pragma once

// Laminate bending analysis for flex stackups. Thicknesses are micrometers,
// moduli GPa, stresses MPa, radii mm.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flexglove::mech {

struct Material {
  double modulus_gpa = 0.0;
  std::optional<double> allowable_stress_mpa;
};

/// How layer centroids are weighted when locating the neutral axis.
/// Transformed: modulus-weighted (transformed section). Geometric: every
/// layer weighted by thickness alone.
enum class NeutralAxisModel { Transformed, Geometric };

struct Materials {
  std::map<std::string, Material> table;
  NeutralAxisModel model = NeutralAxisModel::Transformed;

  const Material& at(const std::string& id) const;
};

struct Layer {
  std::string material;
  double thickness_um = 0.0;
  bool conductor = false;
};

/// Layers ordered bottom to top. Exactly one contiguous run of layers is
/// flagged as the conductor.
struct Stackup {
  std::string name;
  std::vector<Layer> layers;

  double total_um() const;
};

void validate(const Stackup& s, const Materials& m);

/// Neutral axis height above the bottom face, µm.
double neutral_axis(const Stackup& s, const Materials& m);

/// Largest distance from the neutral axis to a conductor surface, µm.
double conductor_extreme_distance(const Stackup& s, const Materials& m);

/// Conductor extreme-fiber stress at bend radius `radius_mm`: E·c/R.
double fiber_stress(const Stackup& s, const Materials& m, double radius_mm);

/// Radius at which the conductor reaches its allowable stress.
double min_bend_radius(const Stackup& s, const Materials& m);

/// Allowable stress (MPa) that best reproduces target radii for stackups
/// sharing one conductor material, as a least-squares fit in log space.
/// With a single target the fit is exact.
double fit_allowable_stress(const std::vector<Stackup>& stackups, const std::vector<double>& target_radii_mm,
                            const Materials& m);

struct BendReport {
  std::string name;
  double total_um = 0.0;
  double neutral_axis_um = 0.0;
  double c_um = 0.0;
  double stress_at_reference_mpa = 0.0;
  double r_min_mm = 0.0;
};

struct Comparison {
  double reference_radius_mm = 0.0;
  std::vector<BendReport> rows;  // descending R_min
  std::vector<std::string> notes;
};

Comparison compare_stackups(const std::vector<Stackup>& stackups, const Materials& m,
                            double reference_radius_mm = 2.5);

std::string format_table(const Comparison& c);
std::string format_csv(const Comparison& c);

Materials parse_materials(const std::string& json_text);
std::vector<Stackup> parse_stackups(const std::string& json_text);
Materials load_materials(const std::filesystem::path& path);
std::vector<Stackup> load_stackups(const std::filesystem::path& path);

}  // namespace flexglove::mech
