#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpkdv/grid.hpp"

namespace gpkdv {

/// Wavefunction of i Psi_t + Psi_xx = Psi (|Psi|^2 - 1) at time t.
struct GpState {
  ComplexField psi;
  double time = 0.0;
};

struct GpOptions {
  /// Largest admissible dt * k_max^2. Split-step resonance with the Bogoliubov modes
  /// about |Psi| = 1 sets in near pi.
  double dt_bound = 2.5;
  /// Largest admissible spectral energy fraction of Psi - <Psi> above 2/3 k_max.
  double resolution_tol = 1e-10;
  /// Steps between resolution checks; finiteness is checked every step.
  std::size_t check_every = 500;
  /// Attached to NumericalError messages.
  std::string label;
};

/// Strang split-step evolution from state.time to t_final.
///
/// Half nonlinear phase, exact linear propagator exp(-i k^2 dt), half nonlinear
/// phase; interior half-steps are fused. The last step is shortened to land on
/// t_final exactly. Throws ValidationError on bad dt, NumericalError on non-finite
/// values (with the step index) or loss of resolution.
GpState evolve_gp(const GpState& state, double dt, double t_final, const GpOptions& opts = {});

/// Psi <- Psi * exp(-i (|Psi|^2 - 1) dt), the exact flow of the nonlinear part.
void apply_nonlinear_phase(ComplexField& psi, double dt);

/// E = int 1/2 |Psi_x|^2 + 1/4 (1 - |Psi|^2)^2.
double energy(const GpState& state);

struct HigherInvariants {
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;
};

/// Second, third and fourth conserved functionals of the GP hierarchy.
///
/// Evaluated on the resolved part of the spectrum: Fourier modes of Psi beyond the last
/// one exceeding 1000 times the round-off level (RMS of the top third of the spectrum,
/// at least machine epsilon times the zero mode) are dropped. Up to four derivatives
/// weight accumulated round-off by k^8, which otherwise swamps E4 for long-wave data.
HigherInvariants higher_invariants(const GpState& state);

struct GeneralizedMass {
  double m_plus = 0.0;
  double m_minus = 0.0;
  std::optional<double> m;
};

/// Half-line mass extrema. The limits at +-infinity are replaced by the max (m+) or
/// min (m-) of the cumulative integral of eta over the outer 10% of each half-box,
/// measured from the node nearest x = 0. m is set when |m+ - m-| <= tol.
GeneralizedMass generalized_mass(const GpState& state, double tol = 1e-6);

struct HydroFields {
  RealField eta;
  RealField rho;
  RealField phi;
  RealField dphi;
  RealField riemann_u;
  RealField riemann_v;
};

inline constexpr double kDefaultVacuumFloor = 0.25;

/// Madelung data rho = |Psi|, eta = 1 - rho^2, phase phi and its derivative, and the
/// Riemann pair u, v = (eta +- sqrt(2) phi_x) / 2. phi_x = Im(conj(Psi) Psi_x)/|Psi|^2
/// is spectral (a constant phase offset across the seam is tolerated); phi is its trapezoid antiderivative from the left node plus the phase
/// there, snapped onto the branch of arg Psi nearest to it so rho e^{i phi} = Psi.
/// Throws NumericalError if min |Psi| < floor.
HydroFields madelung(const GpState& state, double floor = kDefaultVacuumFloor);

/// Current j = <i Psi, Psi_x> = Im(conj(Psi) Psi_x); the mass law reads eta_t = 2 j_x.
RealField mass_current(const ComplexField& psi);

/// L^2 norm of (eta_after - eta_before)/dt - 2 d_x j, with j averaged over both states.
double mass_flux_residual(const GpState& before, const GpState& after);

double min_abs(const ComplexField& psi);

/// Dark soliton profile a tanh(k x) + i b, a = sqrt((2-c^2)/2), k = sqrt(2-c^2)/2,
/// b = c / sqrt(2); it travels with speed c. Requires |c| < sqrt(2).
complex dark_soliton(double c, double x);
complex dark_soliton_dx(double c, double x);

/// Periodic pair: a soliton at x_a moving with speed c times its mirror image at x_b
/// moving with speed -c, normalized so that |Psi| -> 1 between and outside them.
/// Defaults place the cores at -L/4 and +L/4 relative to the box center.
struct DarkSolitonPair {
  double c = 0.5;
  double x_a = 0.0;
  double x_b = 0.0;

  static DarkSolitonPair centered(const SpectralGrid& g, double c);
  complex value(double x, double t) const;
  complex time_derivative(double x, double t) const;
  ComplexField sample(const SpectralGrid& g, double t) const;
};

/// Sup norm of i Psi_t + Psi_xx - Psi(|Psi|^2 - 1) with analytic Psi_t and spectral Psi_xx.
double dark_pair_residual(const DarkSolitonPair& pair, const SpectralGrid& g, double t);

/// Soliton mass sqrt(2 - c^2).
double dark_soliton_mass(double c);

struct GpLogRecord {
  double t = 0.0;
  double e = 0.0;
  HigherInvariants higher;
  double m_plus = 0.0;
  double m_minus = 0.0;
  double min_abs_psi = 0.0;
};

GpLogRecord gp_log_record(const GpState& state);

/// CSV with header t,E,E2,E3,E4,m_plus,m_minus,min_abs_psi.
void write_gp_log(const std::string& path, const std::vector<GpLogRecord>& records);

}  // namespace gpkdv
