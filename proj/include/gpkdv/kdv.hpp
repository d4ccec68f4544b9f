#pragma once

#include <string>
#include <vector>

#include "gpkdv/grid.hpp"

namespace gpkdv {

/// Profile of u_tau + sign * (u_xxx + u u_x) = 0. sign = +1 is the left-frame
/// equation, sign = -1 its time reversal.
struct KdvState {
  RealField u;
  double tau = 0.0;
  int sign = 1;
};

struct KdvOptions {
  /// Largest admissible |dtau| * max|u| * k_max.
  double cfl_bound = 1.0;
  /// Abort once max|u| exceeds this multiple of its initial value.
  double blowup_factor = 10.0;
  std::string label;
};

/// Integrating-factor RK4 from state.tau to tau_final (either direction).
///
/// The dispersive term is integrated exactly in Fourier space; the nonlinearity
/// -sign * (u^2/2)_x is evaluated with 2/3-rule dealiasing (input and output).
/// The last step is shortened to land on tau_final.
KdvState evolve_kdv(const KdvState& state, double dtau, double tau_final,
                    const KdvOptions& opts = {});

struct KdvInvariants {
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
};

/// I1 = int u, I2 = int u^2, I3 = int (u_x^2 - u^3/3).
KdvInvariants kdv_invariants(const KdvState& state);

/// 3c sech^2(sqrt(c) (x - center)/2), travelling with speed sign * c. Throws
/// ValidationError if c <= 0 or the profile exceeds 1e-10 at the box edges.
RealField kdv_soliton(double c, const SpectralGrid& grid, double center = 0.0);

/// Sup norm of -sign*c u_x + sign*(u_xxx + u u_x) for the soliton profile.
double kdv_soliton_residual(double c, const SpectralGrid& grid, int sign = 1);

struct StabilityGap {
  std::vector<double> taus;
  /// ||F - G||_{H^k} at each sample.
  std::vector<double> gaps;
  double initial_gap = 0.0;
  /// Smallest K with gap(tau) <= initial_gap * exp(K |tau|) at every sample.
  double growth_constant = 0.0;
};

/// Co-evolves two data under the same equation and samples the H^k gap at
/// `samples` equally spaced times in (0, tau].
StabilityGap stability_gap(const RealField& f0, const RealField& g0, double tau, int k,
                           double dtau, int samples = 10, int sign = 1,
                           const KdvOptions& opts = {});

/// Fraction of spectral energy above the 2/3 cutoff.
double kdv_dealias_leak(const RealField& u);

/// CSV with header tau,I1,I2,I3,max_abs_u.
struct KdvLogRecord {
  double tau = 0.0;
  KdvInvariants inv;
  double max_abs_u = 0.0;
};
KdvLogRecord kdv_log_record(const KdvState& state);
void write_kdv_log(const std::string& path, const std::vector<KdvLogRecord>& records);

}  // namespace gpkdv
