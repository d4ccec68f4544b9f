#include "gpkdv/presets.hpp"

#include <cmath>
#include <numbers>

#include "gpkdv/errors.hpp"
#include "gpkdv/spectral.hpp"

namespace gpkdv {

namespace {

double sech2(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

PresetParams merged(const PresetInfo& info, const PresetParams& params) {
  PresetParams p = info.defaults;
  for (const auto& [key, value] : params) {
    if (!p.contains(key)) {
      std::string allowed;
      for (const auto& [k, v] : info.defaults) allowed += (allowed.empty() ? "" : ", ") + k;
      throw ValidationError("preset '" + info.name + "' has no parameter '" + key + "'" +
                            (allowed.empty() ? " (it takes none)" : " (allowed: " + allowed + ")"));
    }
    if (!std::isfinite(value)) throw ValidationError("preset parameter '" + key + "' is not finite");
    p[key] = value;
  }
  return p;
}

void require_positive(const PresetParams& p, const char* key) {
  if (!(p.at(key) > 0.0)) throw ValidationError(std::string("preset parameter '") + key + "' must be positive");
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"constant", "N0 = 0, W0 = 0 (Psi = 1)", "trivial: every slow field vanishes", {}},
      {"sech2", "N0 = a sech^2((x - x0)/w), W0 = 0",
       "two-way data with bounded M-norm: KdV approximation of both waves, error O(eps^2)",
       {{"a", 1.0}, {"w", 1.0}, {"x0", 0.0}}},
      {"gaussian", "N0 = a exp(-((x - x0)/w)^2), W0 = ratio * N0",
       "two-way data with bounded M-norm: KdV approximation of both waves",
       {{"a", 1.0}, {"w", 1.0}, {"x0", 0.0}, {"ratio", 0.0}}},
      {"copropagating", "N0 = W0 = a sech^2((x - x0)/w), so V0 = 0 in frame minus",
       "one-way data: unidirectional approximation with vanishing counter-wave, error O(eps^2)",
       {{"a", 1.0}, {"w", 1.0}, {"x0", 0.0}}},
      {"perturbed",
       "copropagating sech^2 plus a counter-wave V0 = delta sech^2(x/v_width) / ||sech^2(x/v_width)||_{H^k}",
       "one-way data with fixed ||V0||_{H^k} = delta: unidirectional error plateaus at O(||V0||)",
       {{"a", 1.0}, {"w", 1.0}, {"delta", 0.1}, {"v_width", 1.0}, {"k", 0.0}}},
      {"kdv-soliton", "N0 = W0 = 3c sech^2(sqrt(c)(x - x0)/2): exact soliton of the frame-minus KdV",
       "one-way data, V0 = 0: KdV soliton oracle", {{"c", 1.0}, {"x0", 0.0}}},
      {"dark-soliton",
       "long-wave dark soliton of speed sqrt(2 - eps^2) read in slow variables; direction +1 moves right",
       "exact GP travelling wave of small energy: travelling-wave oracle of the long-wave limit",
       {{"direction", 1.0}, {"x0", 0.0}}},
  };
  return catalog;
}

const PresetInfo& find_preset(const std::string& name) {
  for (const auto& p : preset_catalog()) {
    if (p.name == name) return p;
  }
  std::string names;
  for (const auto& p : preset_catalog()) names += (names.empty() ? "" : ", ") + p.name;
  throw ValidationError("unknown preset '" + name + "' (available: " + names + ")");
}

PresetData make_preset(const std::string& name, const PresetParams& params,
                       const SpectralGrid& g, double epsilon) {
  const PresetInfo& info = find_preset(name);
  const PresetParams p = merged(info, params);
  PresetData out{name, RealField(g), RealField(g)};

  if (name == "constant") return out;

  if (name == "sech2" || name == "copropagating") {
    require_positive(p, "w");
    const double a = p.at("a"), w = p.at("w"), x0 = p.at("x0");
    out.n0 = RealField::sample(g, [&](double x) { return a * sech2((x - x0) / w); });
    if (name == "copropagating") out.w0 = out.n0;
    return out;
  }
  if (name == "gaussian") {
    require_positive(p, "w");
    const double a = p.at("a"), w = p.at("w"), x0 = p.at("x0");
    out.n0 = RealField::sample(g, [&](double x) {
      const double z = (x - x0) / w;
      return a * std::exp(-z * z);
    });
    out.w0 = p.at("ratio") * out.n0;
    return out;
  }
  if (name == "perturbed") {
    require_positive(p, "w");
    require_positive(p, "v_width");
    const double kk = p.at("k");
    if (kk < 0.0 || kk > 4.0 || kk != std::floor(kk)) {
      throw ValidationError("preset parameter 'k' must be an integer in [0, 4]");
    }
    const double a = p.at("a"), w = p.at("w"), vw = p.at("v_width");
    const auto base = RealField::sample(g, [&](double x) { return a * sech2(x / w); });
    auto v = RealField::sample(g, [&](double x) { return sech2(x / vw); });
    v = (p.at("delta") / sobolev_norm(v, static_cast<int>(kk))) * v;
    out.n0 = base + v;
    out.w0 = base - v;
    return out;
  }
  if (name == "kdv-soliton") {
    require_positive(p, "c");
    const double c = p.at("c"), x0 = p.at("x0");
    out.n0 = RealField::sample(g, [&](double x) { return 3.0 * c * sech2(std::sqrt(c) * (x - x0) / 2.0); });
    out.w0 = out.n0;
    return out;
  }
  // dark-soliton: Psi = a tanh(k x) + i b with c = sqrt(2 - eps^2), so a = eps/sqrt2,
  // k = eps/2, b = c/sqrt2. Then N = 3 sech^2(y/2) exactly, and
  // W = 6 sqrt2 phi_x / eps^2 = -(3c/sqrt2) S / (1 - eps^2 S / 2), S = sech^2(y/2).
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("preset 'dark-soliton' needs epsilon in (0, 1)");
  }
  const double dir = p.at("direction");
  if (dir != 1.0 && dir != -1.0) throw ValidationError("preset parameter 'direction' must be +1 or -1");
  const double c = std::sqrt(2.0 - epsilon * epsilon);
  const double x0 = p.at("x0");
  out.n0 = RealField::sample(g, [&](double x) { return 3.0 * sech2((x - x0) / 2.0); });
  out.w0 = RealField::sample(g, [&](double x) {
    const double s = sech2((x - x0) / 2.0);
    return -dir * 3.0 * c / std::numbers::sqrt2 * s / (1.0 - 0.5 * epsilon * epsilon * s);
  });
  return out;
}

}  // namespace gpkdv
