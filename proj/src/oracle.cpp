#include "hrg/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hrg/chain.hpp"   // wrapped_gauss

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;

struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  void merge(const Kahan& o) {
    add(o.sum);
    add(-o.comp);
  }
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string canonical_key(const ModelConfig& cfg, int q_site,
                          const std::vector<GibbsObservable>& obs) {
  char buf[64];
  std::string key;
  auto putd = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    key += buf;
  };
  key += "b=" + std::to_string(cfg.b) + ";n=" + std::to_string(cfg.n) + ";beta=";
  putd(cfg.beta);
  key += ";sigma=";
  for (double s : cfg.sigma_sq) {
    putd(s);
    key += ",";
  }
  key += ";q=" + std::to_string(q_site) + ";obs=";
  for (const auto& o : obs) {
    key += std::to_string(o.x) + ":" + std::to_string(o.y) + ":";
    putd(o.alpha);
    key += ",";
  }
  return key;
}

}  // namespace

Eigen::MatrixXd build_laplacian(const LaplacianProfile& profile) {
  const int b = profile.b, n = profile.n;
  std::size_t sites = 1;
  for (int i = 0; i < n; ++i) sites *= static_cast<std::size_t>(b);
  if (sites > 4096)
    throw std::invalid_argument("build_laplacian: b^n too large for a dense matrix");
  const auto& c = profile.conductance;
  // tail[k] = c_k + ... + c_n; entries at branch depth k couple via tail[k]
  std::vector<double> tail(n + 2, 0.0);
  for (int k = n; k >= 1; --k) tail[k] = tail[k + 1] + c[k - 1];
  double diag = -c[n];
  double bk = 1.0;
  for (int k = 1; k <= n; ++k) {
    bk *= b;
    diag -= c[k - 1] * (bk - 1.0);
  }
  const Eigen::Index N = static_cast<Eigen::Index>(sites);
  Eigen::MatrixXd D(N, N);
  for (Eigen::Index x = 0; x < N; ++x) {
    for (Eigen::Index y = 0; y < N; ++y) {
      D(x, y) = (x == y)
                    ? diag
                    : tail[branch_depth(static_cast<std::uint64_t>(x),
                                        static_cast<std::uint64_t>(y), b, n)];
    }
  }
  return D;
}

double verify_decomposition(const LaplacianProfile& profile,
                            const std::vector<double>& sigma_sq) {
  const int b = profile.b, n = profile.n;
  if (sigma_sq.size() != static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("verify_decomposition: sigma_sq size mismatch");
  const Eigen::MatrixXd D = build_laplacian(profile);
  const Eigen::MatrixXd inv = (-D).inverse();
  const Eigen::Index N = D.rows();
  double worst = 0.0;
  for (Eigen::Index x = 0; x < N; ++x) {
    for (Eigen::Index y = 0; y < N; ++y) {
      const int k = branch_depth(static_cast<std::uint64_t>(x),
                                 static_cast<std::uint64_t>(y), b, n);
      double m = (k == 0) ? sigma_sq[0] : 0.0;
      for (int j = std::max(k, 1); j <= n; ++j) m += sigma_sq[j];
      worst = std::max(worst, std::abs(inv(x, y) - m));
    }
  }
  return worst;
}

GibbsResult gibbs_brute(const ModelConfig& config, int q_site,
                        const std::vector<GibbsObservable>& observables,
                        const std::string& cache_dir) {
  config.validate();
  if (config.measure.kind != MeasureSpec::Kind::DG)
    throw std::invalid_argument("gibbs_brute: integer enumeration needs the DG measure");
  if (q_site < 1) throw std::invalid_argument("gibbs_brute: q_site must be >= 1");
  const std::size_t sites = config.sites();
  const double states_d = std::pow(2.0 * q_site + 1.0, static_cast<double>(sites));
  if (states_d > 2.5e8)
    throw std::invalid_argument("gibbs_brute: state space exceeds enumeration budget");

  const std::string key = canonical_key(config, q_site, observables);
  std::filesystem::path cache_file;
  if (!cache_dir.empty()) {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(key)));
    cache_file = std::filesystem::path(cache_dir) / ("gibbs-" + std::string(hex) + ".json");
    if (std::filesystem::exists(cache_file)) {
      std::ifstream in(cache_file);
      nlohmann::json j;
      in >> j;
      if (j.value("key", "") == key) {
        GibbsResult r;
        r.log_z = j["log_z"].get<double>();
        r.states = j["states"].get<long>();
        for (const auto& v : j["values"]) {
          GibbsValue gv;
          gv.covariance = v["cov"].get<double>();
          gv.charge = v["charge"].get<double>();
          gv.covariance_prev_q = v["cov_prev"].get<double>();
          gv.charge_prev_q = v["charge_prev"].get<double>();
          r.values.push_back(gv);
        }
        return r;
      }
    }
  }

  const Eigen::MatrixXd D = build_laplacian(build_profile(config));
  const int N = static_cast<int>(sites);
  const int m = static_cast<int>(observables.size());
  const int width = 2 * q_site + 1;

  // accumulators: full truncation and the q_site-1 restriction
  Kahan z_full, z_prev;
  std::vector<Kahan> cov_full(m), ch_full(m), cov_prev(m), ch_prev(m);
  long count = 0;

  std::vector<int> phi(N);
  // partition over the value of site 0; merge block partials in fixed order
  for (int s0 = -q_site; s0 <= q_site; ++s0) {
    Kahan bz_full, bz_prev;
    std::vector<Kahan> bcov_full(m), bch_full(m), bcov_prev(m), bch_prev(m);
    phi.assign(N, -q_site);
    phi[0] = s0;
    while (true) {
      double energy = 0.0;
      for (int i = 0; i < N; ++i) {
        double row = 0.0;
        for (int j = 0; j < N; ++j) row += D(i, j) * phi[j];
        energy += phi[i] * row;
      }
      const double w = std::exp(0.5 * config.beta * energy);
      bool interior = std::abs(s0) < q_site;
      for (int i = 1; i < N && interior; ++i)
        interior = std::abs(phi[i]) < q_site;
      bz_full.add(w);
      if (interior) bz_prev.add(w);
      for (int o = 0; o < m; ++o) {
        const auto& ob = observables[o];
        const double pc = static_cast<double>(phi[ob.x]) * phi[ob.y];
        const double ang = (ob.x == ob.y)
                               ? 2.0 * kPi * ob.alpha * phi[ob.x]
                               : 2.0 * kPi * ob.alpha *
                                     (static_cast<double>(phi[ob.x]) - phi[ob.y]);
        bcov_full[o].add(pc * w);
        bch_full[o].add(std::cos(ang) * w);
        if (interior) {
          bcov_prev[o].add(pc * w);
          bch_prev[o].add(std::cos(ang) * w);
        }
      }
      ++count;
      // odometer over sites 1..N-1
      int i = N - 1;
      for (; i >= 1; --i) {
        if (phi[i] < q_site) {
          ++phi[i];
          break;
        }
        phi[i] = -q_site;
      }
      if (i == 0) break;
    }
    z_full.merge(bz_full);
    z_prev.merge(bz_prev);
    for (int o = 0; o < m; ++o) {
      cov_full[o].merge(bcov_full[o]);
      ch_full[o].merge(bch_full[o]);
      cov_prev[o].merge(bcov_prev[o]);
      ch_prev[o].merge(bch_prev[o]);
    }
  }

  GibbsResult r;
  r.log_z = std::log(z_full.sum);
  r.states = count;
  r.values.resize(m);
  for (int o = 0; o < m; ++o) {
    r.values[o].covariance = cov_full[o].sum / z_full.sum;
    r.values[o].charge = ch_full[o].sum / z_full.sum;
    r.values[o].covariance_prev_q = cov_prev[o].sum / z_prev.sum;
    r.values[o].charge_prev_q = ch_prev[o].sum / z_prev.sum;
  }

  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    nlohmann::json j;
    j["key"] = key;
    j["log_z"] = r.log_z;
    j["states"] = r.states;
    j["values"] = nlohmann::json::array();
    for (const auto& v : r.values) {
      j["values"].push_back({{"cov", v.covariance},
                             {"charge", v.charge},
                             {"cov_prev", v.covariance_prev_q},
                             {"charge_prev", v.charge_prev_q}});
    }
    std::ofstream out(cache_file);
    out << j.dump(1) << "\n";
  }
  return r;
}

PeriodicFunction potential_recursion_direct(const PeriodicFunction& v,
                                            double sigma_sq_over_beta, int b) {
  const int g = v.grid_size();
  std::vector<double> ebv(g);
  for (int j = 0; j < g; ++j) ebv[j] = std::exp(-b * v[j]);
  PeriodicFunction out;
  out.values.resize(g);
  double mean = 0.0;
  for (int z = 0; z < g; ++z) {
    double acc = 0.0;
    for (int u = 0; u < g; ++u)
      acc += ebv[u] * wrapped_gauss(double(u - z) / g, sigma_sq_over_beta);
    acc /= g;
    out.values[z] = acc;
    mean += acc;
  }
  mean /= g;
  for (double& x : out.values) x = -std::log(x / mean);
  return out;
}

std::vector<double> normalized_modes(const PeriodicFunction& v, int q_max) {
  const int g = v.grid_size();
  std::vector<double> e(g);
  for (int j = 0; j < g; ++j) e[j] = std::exp(-v[j]);
  std::vector<double> m(q_max + 1, 0.0);
  for (int q = 0; q <= q_max; ++q) {
    double acc = 0.0;
    for (int j = 0; j < g; ++j)
      acc += e[j] * std::cos(2.0 * kPi * q * j / g);
    m[q] = acc / g;
  }
  const double m0 = m[0];
  for (double& x : m) x /= m0;
  return m;
}

}  // namespace hrg
