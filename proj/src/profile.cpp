#include "nozzle/profile.hpp"

#include "nozzle/error.hpp"

#include <cmath>

namespace nozzle::geometry {

double NozzleProfile::radius(double z) const {
  if (z >= z_origin)
    return inlet_radius;
  return radius_left(z);
}

double NozzleProfile::radius_left(double z) const {
  if (z > z_origin)
    return inlet_radius;
  if (z >= z_throat_start())
    return throat_radius;
  if (z >= z_convergent_start()) {
    const double t = (z - z_convergent_start()) / convergent_length;
    return inlet_radius + t * (throat_radius - inlet_radius);
  }
  return inlet_radius;
}

double NozzleProfile::meridian_area() const {
  return inlet_radius * inlet_length +
         0.5 * (inlet_radius + throat_radius) * convergent_length +
         throat_radius * throat_length + inlet_radius * outlet_length;
}

void validate(const NozzleProfile &p) {
  const std::array<std::pair<const char *, double>, 6> dims{{
      {"inlet_radius", p.inlet_radius},
      {"throat_radius", p.throat_radius},
      {"inlet_length", p.inlet_length},
      {"convergent_length", p.convergent_length},
      {"throat_length", p.throat_length},
      {"outlet_length", p.outlet_length},
  }};
  for (const auto &[name, value] : dims) {
    if (!(value > 0.0) || !std::isfinite(value))
      fail(ErrorKind::InvalidParameter,
           std::string("nozzle dimension ") + name + " must be positive");
  }
  if (!std::isfinite(p.z_origin))
    fail(ErrorKind::InvalidParameter, "nozzle z_origin must be finite");
  if (!(p.throat_radius < p.inlet_radius))
    fail(ErrorKind::InvalidParameter,
         "throat_radius must be smaller than inlet_radius");
}

NozzleProfile build_nozzle_profile(const ProfileOverrides &dims) {
  NozzleProfile p;
  if (dims.inlet_radius) p.inlet_radius = *dims.inlet_radius;
  if (dims.throat_radius) p.throat_radius = *dims.throat_radius;
  if (dims.inlet_length) p.inlet_length = *dims.inlet_length;
  if (dims.convergent_length) p.convergent_length = *dims.convergent_length;
  if (dims.throat_length) p.throat_length = *dims.throat_length;
  if (dims.outlet_length) p.outlet_length = *dims.outlet_length;
  if (dims.z_origin) p.z_origin = *dims.z_origin;
  validate(p);
  return p;
}

} // namespace nozzle::geometry
