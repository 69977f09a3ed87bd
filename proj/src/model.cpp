#include "hrg/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

MeasureSpec MeasureSpec::dg() { return {}; }

MeasureSpec MeasureSpec::sine_gordon(double kappa) {
  MeasureSpec m;
  m.kind = Kind::SineGordon;
  m.kappa = kappa;
  return m;
}

MeasureSpec MeasureSpec::hard_core(double kappa) {
  MeasureSpec m;
  m.kind = Kind::HardCore;
  m.kappa = kappa;
  return m;
}

MeasureSpec MeasureSpec::custom_coeffs(std::vector<double> coeffs) {
  MeasureSpec m;
  m.kind = Kind::Custom;
  m.custom = std::move(coeffs);
  return m;
}

std::string MeasureSpec::name() const {
  switch (kind) {
    case Kind::DG: return "dg";
    case Kind::SineGordon: return "sine_gordon";
    case Kind::HardCore: return "hard_core";
    case Kind::Custom: return "custom";
  }
  return "?";
}

static void validate_measure(const MeasureSpec& m) {
  switch (m.kind) {
    case MeasureSpec::Kind::DG:
      break;
    case MeasureSpec::Kind::SineGordon:
      if (!(m.kappa >= 0.0)) fail("sine_gordon: kappa must be >= 0");
      break;
    case MeasureSpec::Kind::HardCore:
      if (!(m.kappa >= 0.0 && m.kappa <= 0.5))
        fail("hard_core: kappa must lie in [0, 1/2]");
      break;
    case MeasureSpec::Kind::Custom:
      if (m.custom.empty() || !(m.custom[0] > 0.0))
        fail("custom measure: need a(0) > 0");
      for (double a : m.custom)
        if (!(a >= 0.0) || !std::isfinite(a))
          fail("custom measure: coefficients must be finite and >= 0");
      break;
  }
}

std::vector<double> fourier_coeffs(const MeasureSpec& m, int q_max) {
  if (q_max < 0) fail("fourier_coeffs: q_max must be >= 0");
  validate_measure(m);
  std::vector<double> a(static_cast<std::size_t>(q_max) + 1, 0.0);
  switch (m.kind) {
    case MeasureSpec::Kind::DG:
      for (double& v : a) v = 1.0;
      break;
    case MeasureSpec::Kind::SineGordon: {
      const double h = m.kappa / 2.0;
      for (int q = 0; q <= q_max; ++q) {
        // sum_{l>=0} h^{2l+q} / ((l+q)! l!), terms by ratio recurrence
        double term = std::pow(h, q);
        for (int i = 2; i <= q; ++i) term /= i;   // h^q / q!
        double sum = term;
        for (int l = 1; l <= 10'000; ++l) {
          term *= h * h / (static_cast<double>(l) * (l + q));
          sum += term;
          if (term < 1e-16) break;
        }
        a[q] = sum;
      }
      break;
    }
    case MeasureSpec::Kind::HardCore:
      a[0] = 1.0;
      if (q_max >= 1) a[1] = m.kappa;
      break;
    case MeasureSpec::Kind::Custom:
      for (int q = 0; q <= q_max && q < static_cast<int>(m.custom.size()); ++q)
        a[q] = m.custom[q];
      break;
  }
  return a;
}

MeasureDiagnostics measure_diagnostics(const MeasureSpec& m, int q_max) {
  const std::vector<double> a = fourier_coeffs(m, q_max);
  MeasureDiagnostics d;
  for (int q = 0; q <= q_max; ++q)
    if (!(a[q] > 0.0)) d.strictly_positive = false;
  for (int q = 0; q < q_max; ++q) {
    if (a[q] > 0.0) {
      d.sup_ratio = std::max(d.sup_ratio, a[q + 1] / a[q]);
    } else if (a[q + 1] > 0.0) {
      d.ratio_bounded = false;
    }
  }
  return d;
}

double beta_critical(int b) {
  if (b < 2) fail("beta_critical: b must be >= 2");
  return 2.0 * kPi * kPi / std::log(static_cast<double>(b));
}

std::vector<double> constant_profile(int n) {
  if (n < 1) fail("constant_profile: n must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(n) + 1, 1.0);
}

std::vector<double> massive_profile(int b, int n, double m2) {
  if (n < 1) fail("massive_profile: n must be >= 1");
  if (!(m2 > 0.0)) fail("massive_profile: m2 must be > 0");
  const int L = static_cast<int>(std::llround(std::sqrt(static_cast<double>(b))));
  if (L < 2 || L * L != b) fail("massive_profile: b must be a perfect square L^2");
  const double Ld = L;
  std::vector<double> s(static_cast<std::size_t>(n) + 1);
  s[0] = 1.0 / (m2 + 1.0);
  for (int k = 1; k < n; ++k) {
    s[k] = std::pow(Ld, -4 * k) * (Ld * Ld - 1.0) /
           ((m2 + std::pow(Ld, -2 * k)) * (m2 + std::pow(Ld, 2 - 2 * k)));
  }
  s[n] = std::pow(Ld, 2 - 4 * n) / (m2 * (m2 + std::pow(Ld, 2 - 2 * n)));
  return s;
}

double ModelConfig::theta() const { return std::exp(-2.0 * kPi * kPi / beta); }

double ModelConfig::theta_level(int k) const {
  return std::pow(theta(), sigma_sq.at(static_cast<std::size_t>(k)));
}

double ModelConfig::beta_c() const { return beta_critical(b); }

bool ModelConfig::supercritical() const { return b * theta() > 1.0; }

std::size_t ModelConfig::sites() const {
  std::size_t v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(b))
      throw std::overflow_error("sites: b^n exceeds size_t");
    v *= static_cast<std::size_t>(b);
  }
  return v;
}

void ModelConfig::validate() const {
  if (b < 2) fail("config: b must be >= 2");
  if (!(beta > 0.0) || !std::isfinite(beta)) fail("config: beta must be > 0");
  if (n < 1) fail("config: n must be >= 1");
  if (sigma_sq.size() != static_cast<std::size_t>(n) + 1)
    fail("config: sigma_sq must have n+1 entries");
  for (double s : sigma_sq)
    if (!(s > 0.0) || !std::isfinite(s))
      fail("config: sigma_sq entries must be > 0");
  if (q_max < 1) fail("config: q_max must be >= 1");
  if (grid_size < 8) fail("config: grid_size must be >= 8");
  validate_measure(measure);
}

ModelConfig make_config(int b, double beta, int n, MeasureSpec measure,
                        std::vector<double> sigma_sq) {
  ModelConfig c;
  c.b = b;
  c.beta = beta;
  c.n = n;
  c.measure = std::move(measure);
  c.sigma_sq = sigma_sq.empty() ? constant_profile(n) : std::move(sigma_sq);
  c.validate();
  return c;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("config: JSON parse error in " + path + ": " + e.what());
  }
  static const char* known[] = {"b",       "beta",      "n",   "sigma_profile",
                                "measure", "q_max",     "grid_size", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail("config: unknown key '" + it.key() + "'");
  }
  ModelConfig c;
  c.b = j.value("b", 2);
  c.beta = j.value("beta", 20.0);
  c.n = j.value("n", 8);
  c.q_max = j.value("q_max", 16);
  c.grid_size = j.value("grid_size", 512);
  c.seed = j.value("seed", std::uint64_t{1});

  if (j.contains("sigma_profile")) {
    const auto& p = j["sigma_profile"];
    const std::string type = p.value("type", "");
    if (type == "constant") {
      c.sigma_sq = constant_profile(c.n);
    } else if (type == "massive") {
      if (!p.contains("m2")) fail("config: sigma_profile massive needs m2");
      c.sigma_sq = massive_profile(c.b, c.n, p["m2"].get<double>());
    } else if (type == "custom") {
      if (!p.contains("values")) fail("config: sigma_profile custom needs values");
      c.sigma_sq = p["values"].get<std::vector<double>>();
    } else {
      fail("config: sigma_profile.type must be constant|massive|custom");
    }
  } else {
    c.sigma_sq = constant_profile(c.n);
  }

  if (j.contains("measure")) {
    const auto& p = j["measure"];
    const std::string type = p.value("type", "");
    if (type == "dg") {
      c.measure = MeasureSpec::dg();
    } else if (type == "sine_gordon") {
      if (!p.contains("kappa")) fail("config: measure sine_gordon needs kappa");
      c.measure = MeasureSpec::sine_gordon(p["kappa"].get<double>());
    } else if (type == "hard_core") {
      if (!p.contains("kappa")) fail("config: measure hard_core needs kappa");
      c.measure = MeasureSpec::hard_core(p["kappa"].get<double>());
    } else if (type == "custom") {
      if (!p.contains("coeffs")) fail("config: measure custom needs coeffs");
      c.measure = MeasureSpec::custom_coeffs(p["coeffs"].get<std::vector<double>>());
    } else {
      fail("config: measure.type must be dg|sine_gordon|hard_core|custom");
    }
  }

  c.validate();
  return c;
}

LaplacianProfile build_profile(const ModelConfig& config) {
  config.validate();
  const int n = config.n;
  const double bd = config.b;
  LaplacianProfile p;
  p.b = config.b;
  p.n = n;
  p.partial_sum.resize(static_cast<std::size_t>(n) + 1);
  p.partial_sum[0] = config.sigma_sq[0];
  double bk = 1.0;
  for (int k = 1; k <= n; ++k) {
    bk *= bd;
    p.partial_sum[k] = p.partial_sum[k - 1] + bk * config.sigma_sq[k];
  }
  p.conductance.resize(static_cast<std::size_t>(n) + 1);
  bk = 1.0;
  for (int k = 1; k <= n; ++k) {
    bk *= bd;
    p.conductance[k - 1] =
        (1.0 / p.partial_sum[k - 1] - 1.0 / p.partial_sum[k]) / bk;
  }
  p.conductance[n] = 1.0 / p.partial_sum[n];
  return p;
}

std::vector<double> sigma_from_profile(const LaplacianProfile& profile) {
  const int n = profile.n;
  const double bd = profile.b;
  if (profile.conductance.size() != static_cast<std::size_t>(n) + 1)
    fail("sigma_from_profile: conductance must have n+1 entries");
  std::vector<double> u(static_cast<std::size_t>(n) + 1);
  u[n] = 1.0 / profile.conductance[n];
  for (int k = n; k >= 1; --k)
    u[k - 1] = 1.0 / (std::pow(bd, k) * profile.conductance[k - 1] + 1.0 / u[k]);
  std::vector<double> s(static_cast<std::size_t>(n) + 1);
  s[0] = u[0];
  for (int k = 1; k <= n; ++k) s[k] = (u[k] - u[k - 1]) / std::pow(bd, k);
  return s;
}

int branch_depth(std::uint64_t x, std::uint64_t y, int b, int n) {
  if (b < 2 || n < 1) fail("branch_depth: need b >= 2, n >= 1");
  int k = 0;
  while (x != y) {
    x /= static_cast<std::uint64_t>(b);
    y /= static_cast<std::uint64_t>(b);
    ++k;
  }
  if (k > n) fail("branch_depth: leaf index out of range");
  return k;
}

double hier_distance(std::uint64_t x, std::uint64_t y, int b, int n) {
  if (x == y) return 0.0;
  return std::pow(static_cast<double>(b), 0.5 * branch_depth(x, y, b, n));
}

}  // namespace hrg
