#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpkdv/gp.hpp"
#include "gpkdv/grid.hpp"

namespace gpkdv {

// Long-wave scaling between GP and the slow KdV variables:
//   x^- = eps (x + sqrt2 t),  x^+ = eps (x - sqrt2 t),  tau = eps^3 t / (2 sqrt2),
//   N = 6 eta / eps^2,  Theta = 6 sqrt2 phi / eps.
// In frame minus U = (N + Theta_x)/2 and V = (N - Theta_x)/2; frame plus swaps the
// sign of Theta_x, so U + V = N in both frames.

enum class Frame { minus, plus };

std::string_view frame_name(Frame f) noexcept;
/// Accepts "minus" / "plus" (also "-" / "+"); throws ValidationError otherwise.
Frame parse_frame(std::string_view name);

/// +1 for frame minus, -1 for frame plus: the sign in front of d/dtau in the slow system.
inline int time_sign(Frame f) noexcept { return f == Frame::minus ? 1 : -1; }

double slow_time(double t, double epsilon) noexcept;
double fast_time(double tau, double epsilon) noexcept;

struct SlowFrame {
  double epsilon = 0.0;
  Frame frame = Frame::minus;
  double tau = 0.0;
  SpectralGrid grid;
  RealField n_field;
  RealField theta_field;
  RealField dtheta_field;
  RealField u_field;
  RealField v_field;
};

// How a nonzero integral of W0 is removed before building Psi_0. The phase would
// otherwise wind across the periodic seam. A sech^2 bump b of unit integral, of width
// `compensator_width` times the slow window length, centered on the window edge, is
// added as
//   phase: W0 -= I b                 (N0 untouched),
//   left:  W0 -= I b, N0 -= I b      (a left-going wave; V^- unchanged),
//   right: W0 -= I b, N0 += I b      (a right-going wave; U^- unchanged),
// with I the integral of W0. automatic picks left when |N0 - W0| <= |N0 + W0| in L2
// and right otherwise; none rejects such data.
enum class Compensator { automatic, phase, left, right, none };

struct InitialDataOptions {
  Compensator compensator = Compensator::automatic;
  double compensator_width = 1.0 / 40.0;
  double winding_tol = 1e-12;
  /// Largest |eta| and |Psi_x| admitted at the outermost slow nodes, before compensation.
  double edge_tol = 1e-8;
};

struct LongWaveData {
  RealField n0;
  RealField w0;
  double winding = 0.0;  // integral of the original W0
};

/// (N0, W0) with the seam compensator applied; unchanged if W0 integrates to zero.
LongWaveData compensate_winding(const RealField& n0, const RealField& w0,
                                const InitialDataOptions& opts = {});

/// Theta^0: spectral antiderivative of W0 from the window's left edge.
RealField initial_phase(const RealField& w0);

/// Psi_0 = rho e^{i phi} with rho^2 = 1 - eps^2 N0(eps x)/6 and phi = eps Theta0(eps x)/(6 sqrt2),
/// after compensate_winding. Data that has not decayed to edge_tol at the box edges is rejected. N0 and W0 live on the slow grid; fast nodes outside eps^{-1}(slow window) get N = 0 and
/// the edge value of Theta0.
GpState build_initial_data(const RealField& n0, const RealField& w0, double epsilon,
                           const SpectralGrid& fast_grid, const InitialDataOptions& opts = {});

/// Largest t for which the slow window, pulled back to fast coordinates in the given
/// frame, still lies inside the fast box. Negative if it never does.
double max_admissible_time(const SpectralGrid& slow_grid, const SpectralGrid& fast_grid,
                           double epsilon, Frame frame);

/// Pulls the GP state back to the slow frame. Without allow_wrap the pulled-back window
/// must fit in the fast box (NumericalError with the admissible horizon otherwise);
/// with it the periodic extension is used.
SlowFrame extract_slow_frame(const GpState& state, double epsilon, Frame frame,
                             const SpectralGrid& slow_grid, bool allow_wrap = false);

struct InteractionTerms {
  RealField f, g, r;
  RealField F, G, R;
  RealField upsilon;
  double upsilon_base = 0.0;
};

/// F = V^2/6 - V_xx + UV/3, G = N_xx + V^2/2 - U^2/6 - UV/3,
/// R = N N_xx / (6M) + N_x^2 / (12 M^2) with M = 1 - eps^2 N/6, and f, g, r their
/// x-derivatives. Upsilon is the antiderivative of V from -r_base (default: left edge).
InteractionTerms interaction_terms(const SlowFrame& sf, std::optional<double> r_base = {});

/// Expanded form N N_xxx/(6M) + N_x N_xx/(3M^2) + eps^2 N_x^3/(36 M^3), equal to d/dx R.
RealField remainder_expanded(const RealField& n, double epsilon);

struct SlowResiduals {
  std::vector<double> taus;       // interior sample times
  std::vector<double> u;          // L2 residual of the U equation
  std::vector<double> v;          // L2 residual of the V equation
  std::vector<double> upsilon;    // L2 residual of the Upsilon transport equation
  std::vector<double> transport;  // ||(8/eps^2) V_x||
  std::vector<double> v_forcing;  // ||g + eps^2 r||
};

/// Residuals of
///   s U_tau + U_xxx + U U_x - f + eps^2 r,
///   s V_tau + (8/eps^2) V_x - g - eps^2 r,
///   s Upsilon_tau + (8/eps^2) V - (G + eps^2 R)(x) + (G + eps^2 R)(-R) - (8/eps^2) V(-R),
/// with s = time_sign(frame) and d/dtau by centered differences. Needs >= 3 equally
/// spaced frames sharing one grid, epsilon and frame.
SlowResiduals slow_system_residuals(const std::vector<SlowFrame>& series,
                                    std::optional<double> r_base = {});

struct SlowFrameRecord {
  double tau = 0.0;
  double hk_n = 0.0;
  double hk_dtheta = 0.0;
  double hk_u = 0.0;
  double hk_v = 0.0;
  double m_n = 0.0;
  double m_dtheta = 0.0;
  double res_u = 0.0;
  double res_v = 0.0;
  double res_upsilon = 0.0;
};

SlowFrameRecord slow_frame_record(const SlowFrame& sf, int k);
void write_slow_frame_log(const std::string& path, const std::vector<SlowFrameRecord>& rows);

}  // namespace gpkdv
