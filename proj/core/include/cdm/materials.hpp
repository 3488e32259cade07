#pragma once

#include <stdexcept>
#include <string>

namespace cdm {

class MaterialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vectorial damage law parameters for mechanical contacts.
struct MechMaterial {
  double E0 = 0.0;     // Pa
  double alpha = 0.0;  // tangential/normal stiffness ratio
  double ft = 0.0;     // Pa
  double Gt = 0.0;     // N/m
  /// Transitional straining direction, derived from alpha.
  double omega0 = 0.0;

  /// Validates the parameters and derives omega0.
  static MechMaterial create(double E0, double alpha, double ft, double Gt);
};

struct TransportMaterial {
  double kappa = 0.0;  // m^2
  double xi = 1.0;     // crack tortuosity
  double mu = 0.0;     // Pa s
  double rho = 0.0;    // kg/m^3

  void validate() const;
  /// Permeability of the intact material, rho kappa / mu.
  double intact() const { return rho * kappa / mu; }
};

/// History variables of one contact.
struct ContactState {
  double d = 0.0;
  double max_eN = 0.0;
  double max_eT = 0.0;

  friend bool operator==(const ContactState&, const ContactState&) = default;
};

/// Length-dependent softening parameters of one contact.
struct ContactParams {
  double Kt = 0.0;
  double Ks = 0.0;
  double nt = 0.0;
};

struct ContactResponse {
  double sN = 0.0;
  double sM = 0.0;
  ContactState state;
};

/// Root of the strength branch equality on (-pi/2, 0).
double transitional_direction(double alpha);

ContactParams derive_contact_params(const MechMaterial& mat, double length);

/// Straining direction in [-pi/2, pi/2] with eT taken non-negative.
double straining_direction(const MechMaterial& mat, double eN, double eM);

/// Compressive (omega < omega0) and tensile-shear strength branches.
double strength_compression_branch(const MechMaterial& mat, double omega);
double strength_tension_branch(const MechMaterial& mat, double omega);
double effective_strength(const MechMaterial& mat, double omega);

double slope_compression_branch(const MechMaterial& mat, double omega);
double slope_tension_branch(const MechMaterial& mat, const ContactParams& cp, double omega);
double softening_slope(const MechMaterial& mat, const ContactParams& cp, double omega);

/// Loading history variable; `state` already holds the updated maxima.
double loading_history_chi(const MechMaterial& mat, const ContactState& state, double e_eff,
                           double omega);

/// Pure evaluation of the damage law from the committed state.
ContactResponse update_contact(const MechMaterial& mat, const ContactParams& cp,
                               const ContactState& committed, double eN, double eM);

/// Normal crack opening w_N = eN l d, floored at zero.
double crack_opening(const ContactState& state, double eN, double length);

/// Conduit permeability with the cubic-law crack contribution.
double conduit_permeability(const TransportMaterial& mat, double wN, double S);

}  // namespace cdm
