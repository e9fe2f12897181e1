#pragma once

#include <array>
#include <optional>
#include <string>

namespace nozzle::geometry {

/// Meridian cross-section of the benchmark nozzle: inlet pipe, conical
/// convergent, throat and sudden expansion into the outlet pipe. Axial
/// coordinates are measured so that the expansion plane sits at z_origin.
struct NozzleProfile {
  double inlet_radius = 0.006;
  double throat_radius = 0.002;
  double inlet_length = 0.06;
  double convergent_length = 0.022685;
  double throat_length = 0.04;
  double outlet_length = 0.15;
  double z_origin = 0.0;

  double z_inlet() const {
    return z_origin - throat_length - convergent_length - inlet_length;
  }
  double z_convergent_start() const {
    return z_origin - throat_length - convergent_length;
  }
  double z_throat_start() const { return z_origin - throat_length; }
  double z_outlet() const { return z_origin + outlet_length; }

  /// Wall radius at z. Right-continuous at the expansion plane, so
  /// radius(z_origin) is the outlet-pipe radius.
  double radius(double z) const;
  /// Left limit of the wall radius (differs from radius() only at z_origin).
  double radius_left(double z) const;

  bool contains_axial(double z, double tol = 1e-12) const {
    return z >= z_inlet() - tol && z <= z_outlet() + tol;
  }

  /// Meridian area of the half-domain, the integral of radius(z) dz.
  double meridian_area() const;

  bool operator==(const NozzleProfile &) const = default;
};

struct ProfileOverrides {
  std::optional<double> inlet_radius;
  std::optional<double> throat_radius;
  std::optional<double> inlet_length;
  std::optional<double> convergent_length;
  std::optional<double> throat_length;
  std::optional<double> outlet_length;
  std::optional<double> z_origin;
};

/// Defaults with the given overrides applied; throws InvalidParameter on a
/// non-positive dimension, a throat not narrower than the inlet, or a
/// zero-length convergent.
NozzleProfile build_nozzle_profile(const ProfileOverrides &dims = {});

void validate(const NozzleProfile &profile);

} // namespace nozzle::geometry
