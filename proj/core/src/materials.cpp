#include "cdm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cdm {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double strength_compression_branch(const MechMaterial& mat, double omega) {
  const double s = std::sin(omega);
  const double c = std::cos(omega);
  return 16.0 * mat.ft / std::sqrt(s * s + mat.alpha * c * c);
}

double strength_tension_branch(const MechMaterial& mat, double omega) {
  // Rationalized form of (4.52 s - r) / (0.04 s^2 - alpha c^2); it has no
  // removable singularity where the denominator vanishes.
  const double s = std::sin(omega);
  const double c = std::cos(omega);
  const double r = std::sqrt(20.0704 * s * s + 9.0 * mat.alpha * c * c);
  return 9.0 * mat.ft / (4.52 * s + r);
}

double transitional_direction(double alpha) {
  if (!(alpha > 0.0)) throw MaterialError("alpha must be positive");
  MechMaterial m;
  m.alpha = alpha;
  m.ft = 1.0;
  auto f = [&](double w) { return strength_compression_branch(m, w) - strength_tension_branch(m, w); };
  // The tension branch has a pole at -atan(5 sqrt(alpha)); below it the
  // difference has no sign change, so the bracket starts at the pole.
  double lo = -std::atan(5.0 * std::sqrt(alpha));
  double hi = 0.0;
  lo = std::nextafter(lo, hi);
  while (f(lo) >= 0.0 || !std::isfinite(f(lo))) lo = std::nextafter(lo + 1e-15, hi);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

MechMaterial MechMaterial::create(double E0, double alpha, double ft, double Gt) {
  if (!(E0 > 0.0)) throw MaterialError("E0 must be positive");
  if (!(alpha > 0.0)) throw MaterialError("alpha must be positive");
  if (!(ft > 0.0)) throw MaterialError("ft must be positive");
  if (!(Gt > 0.0)) throw MaterialError("Gt must be positive");
  MechMaterial m{E0, alpha, ft, Gt, 0.0};
  m.omega0 = transitional_direction(alpha);
  return m;
}

void TransportMaterial::validate() const {
  if (!(kappa > 0.0)) throw MaterialError("kappa must be positive");
  if (!(mu > 0.0)) throw MaterialError("mu must be positive");
  if (!(rho > 0.0)) throw MaterialError("rho must be positive");
  if (!(xi >= 0.0 && xi <= 1.0)) throw MaterialError("xi must lie in [0, 1]");
}

ContactParams derive_contact_params(const MechMaterial& mat, double length) {
  const double ft2l = mat.ft * mat.ft * length;
  const double den_t = 2.0 * mat.E0 * mat.Gt - ft2l;
  const double den_s = 32.0 * mat.alpha * mat.E0 * mat.Gt - 9.0 * ft2l;
  if (!(den_t > 0.0) || !(den_s > 0.0)) {
    throw MaterialError("element length " + fmt(length) +
                        " m causes snap-back; reduce the element size or raise Gt");
  }
  ContactParams p;
  p.Kt = 2.0 * mat.E0 * ft2l / den_t;
  p.Ks = 18.0 * mat.alpha * mat.E0 * ft2l / den_s;
  if (!(p.Kt > p.Ks)) {
    throw MaterialError("pure tension slope must exceed pure shear slope (element length " +
                        fmt(length) + " m)");
  }
  p.nt = std::log(p.Kt / (p.Kt - p.Ks)) / std::log(1.0 - 2.0 * mat.omega0 / std::numbers::pi);
  return p;
}

double straining_direction(const MechMaterial& mat, double eN, double eM) {
  return std::atan2(eN, std::sqrt(mat.alpha) * std::abs(eM));
}

double effective_strength(const MechMaterial& mat, double omega) {
  return omega < mat.omega0 ? strength_compression_branch(mat, omega)
                            : strength_tension_branch(mat, omega);
}

double slope_compression_branch(const MechMaterial& mat, double omega) {
  const double r = (omega + kHalfPi) / (mat.omega0 + kHalfPi);
  return 0.26 * mat.E0 * (1.0 - r * r);
}

double slope_tension_branch(const MechMaterial& mat, const ContactParams& cp, double omega) {
  const double r = (omega - kHalfPi) / (mat.omega0 - kHalfPi);
  return -cp.Kt * (1.0 - std::pow(r, cp.nt));
}

double softening_slope(const MechMaterial& mat, const ContactParams& cp, double omega) {
  return omega < mat.omega0 ? slope_compression_branch(mat, omega)
                            : slope_tension_branch(mat, cp, omega);
}

double loading_history_chi(const MechMaterial& mat, const ContactState& state, double e_eff,
                           double omega) {
  const double hist =
      std::sqrt(state.max_eN * state.max_eN + mat.alpha * state.max_eT * state.max_eT);
  if (omega < mat.omega0) return e_eff;
  if (omega < 0.0) {
    const double w = omega / mat.omega0;
    return e_eff * w + hist * (1.0 - w);
  }
  return hist;
}

ContactResponse update_contact(const MechMaterial& mat, const ContactParams& cp,
                               const ContactState& committed, double eN, double eM) {
  ContactResponse r;
  r.state = committed;
  const double e_eff = std::sqrt(eN * eN + mat.alpha * eM * eM);
  if (e_eff == 0.0) return r;
  r.state.max_eN = std::max(committed.max_eN, eN);
  r.state.max_eT = std::max(committed.max_eT, std::abs(eM));
  const double omega = straining_direction(mat, eN, eM);
  const double f = effective_strength(mat, omega);
  const double K = softening_slope(mat, cp, omega);
  const double chi = loading_history_chi(mat, r.state, e_eff, omega);
  const double excess = std::max(chi - f / mat.E0, 0.0);
  const double s_eff = f * std::exp(K / f * excess);
  const double d_trial = std::clamp(1.0 - s_eff / (mat.E0 * e_eff), 0.0, 1.0);
  r.state.d = std::max(committed.d, d_trial);
  r.sN = (1.0 - r.state.d) * mat.E0 * eN;
  r.sM = (1.0 - r.state.d) * mat.E0 * mat.alpha * eM;
  return r;
}

double crack_opening(const ContactState& state, double eN, double length) {
  return std::max(eN * length * state.d, 0.0);
}

double conduit_permeability(const TransportMaterial& mat, double wN, double S) {
  return mat.rho * mat.kappa / mat.mu + mat.xi * mat.rho * wN * wN * wN / (12.0 * mat.mu * S);
}

}  // namespace cdm
