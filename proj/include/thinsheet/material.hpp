#pragma once

#include <cmath>

#include "thinsheet/errors.hpp"

namespace thinsheet {

/// Global material and contact constants. Lengths in cm, moduli in force/cm^2.
struct MaterialConfig {
  double thickness = 0.2;            // plate thickness h
  double poisson = 0.2;              // Poisson ratio nu, in [0, 0.3)
  double proxy_radius = 0.1;         // radius of the spherical proxy
  double neighborhood_radius = 0.8;  // patch radius around the contact
  double contact_area = 0.01;        // A in the force law

  void validate() const {
    if (!(thickness > 0.0)) throw ValidationError("thickness must be positive");
    if (!(poisson >= 0.0 && poisson < 0.3)) throw ValidationError("poisson ratio must lie in [0, 0.3)");
    if (!(proxy_radius > 0.0)) throw ValidationError("proxy radius must be positive");
    if (!(neighborhood_radius > proxy_radius))
      throw ValidationError("neighborhood radius must exceed the proxy radius");
    if (!(contact_area > 0.0)) throw ValidationError("contact area must be positive");
  }
};

/// Kirchhoff flexural rigidity E h^3 / (12 (1 - nu^2)).
template <typename Scalar>
Scalar flexural_rigidity(Scalar elastic_modulus, Scalar thickness, Scalar poisson) {
  if (!(elastic_modulus > Scalar(0))) throw ContractError("elastic modulus must be positive");
  return elastic_modulus * thickness * thickness * thickness /
         (Scalar(12) * (Scalar(1) - poisson * poisson));
}

inline double flexural_rigidity(double elastic_modulus, const MaterialConfig& config) {
  return flexural_rigidity<double>(elastic_modulus, config.thickness, config.poisson);
}

}  // namespace thinsheet
