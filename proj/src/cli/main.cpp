// Command-line front end: figure data files (CSV), estimator runs (JSON), and
// self-verification. Exit codes: 0 ok, 1 threshold/check failure, 2 usage or
// config error, 3 numerical failure.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrg/chain.hpp"
#include "hrg/model.hpp"
#include "hrg/observables.hpp"
#include "hrg/oracle.hpp"
#include "hrg/rgflow.hpp"
#include "hrg/sampler.hpp"

namespace {

using namespace hrg;

constexpr const char* kVersion = "1.0.0";
constexpr double kPi = std::numbers::pi;

std::string fnum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void parallel_for(int jobs, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t]() {
      for (int i = t; i < jobs; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

// Output sink: file when a path is given (parent directories created),
// stdout otherwise.
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
};
Sink open_sink(const std::string& path) {
  Sink s;
  if (!path.empty()) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    s.file.open(p);
    if (!s.file) throw std::invalid_argument("cannot open output file: " + path);
    s.os = &s.file;
  }
  return s;
}

using KV = std::vector<std::pair<std::string, std::string>>;

void write_header(std::ostream& os, const std::string& command,
                  const KV& fields) {
  os << "# hrg " << kVersion << "\n# command=" << command << "\n";
  for (const auto& [k, v] : fields) os << "# " << k << "=" << v << "\n";
}

KV config_fields(const ModelConfig& cfg) {
  bool flat = true;
  for (double s : cfg.sigma_sq) flat &= (s == cfg.sigma_sq[0]);
  std::string profile =
      flat ? "constant(" + fnum(cfg.sigma_sq.empty() ? 1.0 : cfg.sigma_sq[0]) + ")"
           : "custom(" + std::to_string(cfg.sigma_sq.size()) + " values)";
  std::string mname = cfg.measure.name();
  if (cfg.measure.kind == MeasureSpec::Kind::SineGordon ||
      cfg.measure.kind == MeasureSpec::Kind::HardCore)
    mname += "(kappa=" + fnum(cfg.measure.kappa) + ")";
  else if (cfg.measure.kind == MeasureSpec::Kind::Custom)
    mname += "(" + std::to_string(cfg.measure.custom.size()) + " coeffs)";
  return {
      {"b", std::to_string(cfg.b)},
      {"beta", fnum(cfg.beta)},
      {"n", std::to_string(cfg.n)},
      {"measure", mname},
      {"sigma_profile", profile},
      {"q_max", std::to_string(cfg.q_max)},
      {"grid_size", std::to_string(cfg.grid_size)},
      {"seed", std::to_string(cfg.seed)},
      {"theta", fnum(cfg.theta())},
      {"beta_c", fnum(cfg.beta_c())},
  };
}

// Options shared by every subcommand; option pointers record what was set.
struct CommonOpts {
  std::string config_path;
  std::string out;
  int b = 2, n = 8, q_max = 16, grid = 512, threads = 1;
  double beta = 20.0, theta = 0.0;
  std::uint64_t seed = 1;
  CLI::Option* ob = nullptr;
  CLI::Option* obeta = nullptr;
  CLI::Option* otheta = nullptr;
  CLI::Option* on = nullptr;
  CLI::Option* oq = nullptr;
  CLI::Option* og = nullptr;
  CLI::Option* oseed = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--out", o.out, "output path (stdout when omitted)");
  o.oseed = sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 1024));
  o.ob = sub->add_option("--b", o.b, "branching factor");
  o.obeta = sub->add_option("--beta", o.beta, "inverse temperature");
  o.otheta = sub->add_option("--theta", o.theta, "sets beta via theta = e^{-2 pi^2 / beta}");
  o.on = sub->add_option("--n", o.n, "tree depth");
  o.oq = sub->add_option("--q-max", o.q_max, "spectral truncation");
  o.og = sub->add_option("--grid", o.grid, "quadrature grid size");
}

ModelConfig resolve_config(const CommonOpts& o) {
  ModelConfig cfg = o.config_path.empty() ? make_config(2, 20.0, 8)
                                          : load_config(o.config_path);
  if (o.ob->count()) cfg.b = o.b;
  if (o.obeta->count()) cfg.beta = o.beta;
  if (o.otheta->count()) {
    if (!(o.theta > 0.0 && o.theta < 1.0))
      throw std::invalid_argument("--theta must lie in (0, 1)");
    cfg.beta = -2.0 * kPi * kPi / std::log(o.theta);
  }
  if (o.on->count()) cfg.n = o.n;
  if (o.oq->count()) cfg.q_max = o.q_max;
  if (o.og->count()) cfg.grid_size = o.grid;
  if (o.oseed->count()) cfg.seed = o.seed;
  if (cfg.sigma_sq.size() != static_cast<std::size_t>(cfg.n) + 1) {
    bool flat = true;
    for (double s : cfg.sigma_sq) flat &= (s == cfg.sigma_sq[0]);
    if (!flat)
      throw std::invalid_argument(
          "--n conflicts with the config's explicit sigma profile");
    cfg.sigma_sq.assign(cfg.n + 1, cfg.sigma_sq.empty() ? 1.0 : cfg.sigma_sq[0]);
  }
  cfg.validate();
  return cfg;
}

double theta_from(const CommonOpts& o, const ModelConfig& cfg) {
  if (o.otheta->count()) return o.theta;
  return cfg.theta();
}

// ---------------------------------------------------------------- commands

int cmd_flow(const CommonOpts& o) {
  ModelConfig cfg = resolve_config(o);
  FlowTrace t = run_flow(cfg);
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  write_header(os, "flow", config_fields(cfg));
  os << "k,lam1,lam2,lam2_over_lam1_sq,sup_ratio,log_a0_per_site,lam1_sqrtk\n";
  double per_site = t.log_a0[0];
  double bpow = 1.0;
  for (int k = 0; k <= cfg.n; ++k) {
    if (k > 0) {
      bpow *= cfg.b;
      per_site += t.log_g0[k] / bpow;
    }
    const double l1 = t.levels[k].at(1);
    const double l2 = t.levels[k].at(2);
    os << k << ',' << fnum(l1) << ',' << fnum(l2) << ','
       << fnum(l1 > 0.0 ? l2 / (l1 * l1) : 0.0) << ','
       << fnum(t.sup_ratio[k]) << ',' << fnum(per_site) << ','
       << fnum(l1 * std::sqrt(static_cast<double>(k))) << '\n';
  }
  return 0;
}

int cmd_fixed_point(const CommonOpts& o, double tol, long max_iters) {
  ModelConfig cfg = resolve_config(o);
  const double theta = theta_from(o, cfg);
  FixedPointResult fp = fixed_point(cfg.b, theta, cfg.q_max, tol, max_iters);
  StarData star = star_data(cfg.b, theta, cfg.q_max, cfg.grid_size, tol, max_iters);

  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = {
      {"b", std::to_string(cfg.b)},
      {"theta", fnum(theta)},
      {"beta", fnum(-2.0 * kPi * kPi / std::log(theta))},
      {"q_max", std::to_string(cfg.q_max)},
      {"tol", fnum(tol)},
      {"trivial", fp.trivial ? "true" : "false"},
      {"converged", fp.converged ? "true" : "false"},
      {"iterations", std::to_string(fp.iterations)},
      {"residual", fnum(fp.residual)},
      {"error_estimate", fnum(fp.error_estimate)},
      {"identity_residual", fnum(star.identity_residual)},
  };
  write_header(os, "fixed-point", fields);
  os << "q,lam_star\n";
  for (int q = 0; q <= fp.lam.max_q(); ++q)
    os << q << ',' << fnum(fp.lam.at(q)) << '\n';
  if (!fp.converged) {
    std::cerr << "fixed-point: not converged after " << fp.iterations
              << " iterations (residual " << fnum(fp.residual) << ")\n";
    return 3;
  }
  return 0;
}

int cmd_sigma2_scan(const CommonOpts& o, double lo, double hi, int points) {
  ModelConfig cfg = resolve_config(o);
  auto rows = sigma2_scan(cfg.b, lo, hi, points, cfg.q_max, cfg.grid_size, o.threads);
  KV fields = {
      {"b", std::to_string(cfg.b)},
      {"beta_lo", fnum(lo)},
      {"beta_hi", fnum(hi)},
      {"points", std::to_string(points)},
      {"beta_c", fnum(beta_critical(cfg.b))},
  };
  try {
    fields.emplace_back("jump_estimate", fnum(sigma2_jump_estimate(rows, cfg.b)));
  } catch (const std::invalid_argument&) {
    fields.emplace_back("jump_estimate", "n/a (range does not straddle beta_c)");
  }
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  write_header(os, "sigma2-scan", fields);
  os << "beta,sigma2,dsigma2_dbeta,fp_converged\n";
  for (const auto& r : rows)
    os << fnum(r.beta) << ',' << fnum(r.sigma2) << ',' << fnum(r.dsigma2_dbeta)
       << ',' << (r.fp_converged ? 1 : 0) << '\n';
  return 0;
}

struct SurfaceCell {
  double t_star = 1.0;
  double kappa = 0.0;
  double sigma2 = 0.0;
  bool converged = true;
};

// One column of the (alpha, beta) surfaces: the fixed point is shared by all
// alpha at a given beta.
std::vector<std::vector<SurfaceCell>> surface_grid(
    int b, int q_max, int grid_size, const std::vector<double>& alphas,
    const std::vector<double>& betas, int threads) {
  const double bc = beta_critical(b);
  std::vector<std::vector<SurfaceCell>> cells(
      alphas.size(), std::vector<SurfaceCell>(betas.size()));
  parallel_for(static_cast<int>(betas.size()), threads, [&](int ib) {
    const double beta = betas[ib];
    const double theta = std::exp(-2.0 * kPi * kPi / beta);
    const bool super = b * theta > 1.0;
    StarData star;
    if (super) star = star_data(b, theta, q_max, grid_size);
    const double s2 = super ? sigma2_from_star(star, beta, b) : 1.0 / beta;
    for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
      const double alpha = alphas[ia];
      SurfaceCell& c = cells[ia][ib];
      c.sigma2 = s2;
      c.converged = !super || star.converged;
      if (super && alpha != 0.0)
        c.t_star = t_star_solve(charge_path_sums(star.gamma_star, theta, alpha));
      c.kappa = 4.0 * bc * alpha * alpha / beta -
                4.0 / std::log(static_cast<double>(b)) * std::log(c.t_star);
    }
  });
  return cells;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("grid needs >= 2 points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  return v;
}

int cmd_kappa_surface(const CommonOpts& o, double alo, double ahi, int apoints,
                      double blo, double bhi, int bpoints) {
  ModelConfig cfg = resolve_config(o);
  auto alphas = linspace(alo, ahi, apoints);
  auto betas = linspace(blo, bhi, bpoints);
  if (ahi >= 0.5 || alo < -0.5 + 1e-12)
    throw std::invalid_argument("kappa-surface: alpha range must lie in (-1/2, 1/2)");
  auto cells = surface_grid(cfg.b, cfg.q_max, cfg.grid_size, alphas, betas, o.threads);
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = {
      {"b", std::to_string(cfg.b)},
      {"alpha_lo", fnum(alo)}, {"alpha_hi", fnum(ahi)},
      {"alpha_points", std::to_string(apoints)},
      {"beta_lo", fnum(blo)}, {"beta_hi", fnum(bhi)},
      {"beta_points", std::to_string(bpoints)},
      {"beta_c", fnum(beta_critical(cfg.b))},
  };
  write_header(os, "kappa-surface", fields);
  os << "alpha,beta,kappa,log_t_star\n";
  int bad = 0;
  for (std::size_t ia = 0; ia < alphas.size(); ++ia)
    for (std::size_t ib = 0; ib < betas.size(); ++ib) {
      const SurfaceCell& c = cells[ia][ib];
      bad += c.converged ? 0 : 1;
      os << fnum(alphas[ia]) << ',' << fnum(betas[ib]) << ',' << fnum(c.kappa)
         << ',' << fnum(std::log(c.t_star)) << '\n';
    }
  if (bad > 0) os << "# warning: " << bad << " cells with unconverged fixed point\n";
  return 0;
}

int cmd_tstar_surface(const CommonOpts& o, double alo, double ahi, int apoints,
                      double blo, double bhi, int bpoints) {
  ModelConfig cfg = resolve_config(o);
  auto alphas = linspace(alo, ahi, apoints);
  auto betas = linspace(blo, bhi, bpoints);
  if (ahi >= 0.5 || alo < -0.5 + 1e-12)
    throw std::invalid_argument("tstar-surface: alpha range must lie in (-1/2, 1/2)");
  auto cells = surface_grid(cfg.b, cfg.q_max, cfg.grid_size, alphas, betas, o.threads);
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = {
      {"b", std::to_string(cfg.b)},
      {"alpha_lo", fnum(alo)}, {"alpha_hi", fnum(ahi)},
      {"alpha_points", std::to_string(apoints)},
      {"beta_lo", fnum(blo)}, {"beta_hi", fnum(bhi)},
      {"beta_points", std::to_string(bpoints)},
      {"beta_c", fnum(beta_critical(cfg.b))},
  };
  write_header(os, "tstar-surface", fields);
  os << "alpha,beta,theta,t_star,kappa,tau,sigma2\n";
  for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
    const double tau = tau_exponent(alphas[ia], cfg.b);
    for (std::size_t ib = 0; ib < betas.size(); ++ib) {
      const SurfaceCell& c = cells[ia][ib];
      const double theta = std::exp(-2.0 * kPi * kPi / betas[ib]);
      os << fnum(alphas[ia]) << ',' << fnum(betas[ib]) << ',' << fnum(theta)
         << ',' << fnum(c.t_star) << ',' << fnum(c.kappa) << ',' << fnum(tau)
         << ',' << fnum(c.sigma2) << '\n';
    }
  }
  return 0;
}

int cmd_vstar_profile(const CommonOpts& o, std::vector<double> thetas,
                      double tol, long max_iters) {
  ModelConfig cfg = resolve_config(o);
  if (thetas.empty()) thetas = {0.501, 0.6, 0.84};
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = {{"b", std::to_string(cfg.b)},
               {"grid_size", std::to_string(cfg.grid_size)},
               {"q_max", std::to_string(cfg.q_max)}};
  write_header(os, "vstar-profile", fields);
  os << "theta,z,exp_neg_vstar\n";
  for (double theta : thetas) {
    if (!(theta > 0.0 && theta < 1.0))
      throw std::invalid_argument("vstar-profile: theta must lie in (0, 1)");
    if (cfg.b * theta <= 1.0) {
      os << "# theta=" << fnum(theta)
         << ": subcritical (b*theta <= 1), trivial profile skipped\n";
      continue;
    }
    FixedPointResult fp = fixed_point(cfg.b, theta, cfg.q_max, tol, max_iters);
    if (!fp.converged) {
      os << "# theta=" << fnum(theta) << ": fixed point did not converge after "
         << fp.iterations << " iterations (residual " << fnum(fp.residual)
         << "), rows skipped\n";
      continue;
    }
    // zero mode of e^{-v} is g0^{-1/(b-1)}
    const double g0 = std::exp(rg_step(fp.lam, theta, cfg.b).log_g0);
    const double scale = std::pow(g0, -1.0 / (cfg.b - 1.0));
    for (int j = 0; j < cfg.grid_size; ++j) {
      const double z = static_cast<double>(j) / cfg.grid_size;
      double d = 1.0;
      for (int q = 1; q <= fp.lam.max_q(); ++q)
        d += 2.0 * fp.lam.at(q) * std::cos(2.0 * kPi * q * z);
      os << fnum(theta) << ',' << fnum(z) << ',' << fnum(scale * d) << '\n';
    }
  }
  return 0;
}

int cmd_covariance(const CommonOpts& o) {
  ModelConfig cfg = resolve_config(o);
  ChainLevels chain = build_chain(cfg);
  auto table = chain_level_table(chain, 0.0);
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = config_fields(cfg);
  fields.emplace_back("cov_depth0", fnum(covariance_exact(chain, 0)));
  fields.emplace_back("sigma2_effective", fnum(sigma2(cfg.beta, cfg.b, cfg.q_max,
                                                      cfg.grid_size)));
  write_header(os, "covariance", fields);
  os << "k,covariance,increment,tv_to_stationary\n";
  for (const auto& r : table)
    os << r.k << ',' << fnum(r.em2) << ',' << fnum(r.increment) << ','
       << fnum(r.tv_to_nu_star) << '\n';
  return 0;
}

int cmd_charge(const CommonOpts& o, double alpha) {
  ModelConfig cfg = resolve_config(o);
  ChainLevels chain = build_chain(cfg);
  auto table = chain_level_table(chain, alpha);
  ChargeExponentData kd = kappa_exponent(alpha, cfg.beta, cfg.b, cfg.q_max);
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  KV fields = config_fields(cfg);
  fields.emplace_back("alpha", fnum(alpha));
  fields.emplace_back("kappa", fnum(kd.kappa));
  fields.emplace_back("t_star", fnum(kd.t_star));
  fields.emplace_back("tau", fnum(kd.tau));
  fields.emplace_back("w0_ratio_limit",
                      fnum(kd.t_star * std::pow(kd.theta, alpha * alpha)));
  fields.emplace_back("single_charge", fnum(single_charge_exact(chain, alpha)));
  write_header(os, "charge", fields);
  os << "k,w0,w0_ratio,pair_correlation\n";
  for (const auto& r : table)
    os << r.k << ',' << fnum(r.w0) << ',' << fnum(r.w0_ratio) << ','
       << fnum(charge_correlation_exact(chain, alpha, r.k)) << '\n';
  return 0;
}

int cmd_sample(const CommonOpts& o, int k, double alpha, long n_samples) {
  ModelConfig cfg = resolve_config(o);
  ChainLevels chain = build_chain(cfg);
  PairEstimate est = sample_pair(chain, k, alpha, n_samples, cfg.seed, o.threads);
  const double cov_exact = covariance_exact(chain, k);
  const double charge_exact = charge_correlation_exact(chain, alpha, k);

  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["command"] = "sample";
  for (const auto& [key, val] : config_fields(cfg)) j["config"][key] = val;
  j["k"] = k;
  j["alpha"] = alpha;
  j["n_samples"] = est.covariance.n_samples;
  j["seed"] = est.covariance.seed;
  j["threads"] = o.threads;
  auto block = [](const EstimatorResult& e, double exact) {
    nlohmann::ordered_json b;
    b["mean"] = e.mean;
    b["se"] = e.se;
    b["exact"] = exact;
    b["z"] = e.se > 0.0 ? (e.mean - exact) / e.se : 0.0;
    return b;
  };
  j["covariance"] = block(est.covariance, cov_exact);
  j["charge_cos"] = block(est.charge_cos, charge_exact);
  j["charge_sin"] = block(est.charge_sin, 0.0);

  Sink sink = open_sink(o.out);
  *sink.os << j.dump(2) << "\n";
  return 0;
}

int cmd_oracle_check(const CommonOpts& o, const std::string& cache_dir) {
  Sink sink = open_sink(o.out);
  std::ostream& os = *sink.os;
  write_header(os, "oracle-check", {});
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, double value, double tol) {
    os << (ok ? "[PASS] " : "[FAIL] ") << name << "  value=" << fnum(value)
       << " tol=" << fnum(tol) << "\n";
    failures += ok ? 0 : 1;
  };

  // inverse-Laplacian decomposition on three shapes x three profiles
  struct Shape { int b, n; };
  for (Shape s : {Shape{2, 3}, Shape{3, 2}, Shape{4, 2}}) {
    ModelConfig cfg = make_config(s.b, 15.0, s.n);
    double worst = verify_decomposition(build_profile(cfg), cfg.sigma_sq);
    report(worst < 1e-10, "decomposition constant b=" + std::to_string(s.b) +
                              " n=" + std::to_string(s.n), worst, 1e-10);
    KeyedRng rng(977, s.b, s.n);
    for (double& v : cfg.sigma_sq) v = 0.5 + rng.uniform();
    worst = verify_decomposition(build_profile(cfg), cfg.sigma_sq);
    report(worst < 1e-10, "decomposition random b=" + std::to_string(s.b) +
                              " n=" + std::to_string(s.n), worst, 1e-10);
  }
  {
    ModelConfig cfg = make_config(4, 15.0, 2);
    cfg.sigma_sq = massive_profile(4, 2, 0.05);
    double worst = verify_decomposition(build_profile(cfg), cfg.sigma_sq);
    report(worst < 1e-10, "decomposition massive b=4 n=2", worst, 1e-10);
  }

  // chain vs brute-force enumeration
  {
    ModelConfig cfg = make_config(2, 10.0, 2);
    std::vector<GibbsObservable> obs = {
        {0, 0, 0.0}, {0, 1, 0.0}, {0, 2, 0.0},
        {0, 1, 0.1}, {0, 2, 0.1}, {0, 1, 0.3}, {0, 2, 0.3},
    };
    GibbsResult g = gibbs_brute(cfg, 6, obs, cache_dir);
    ChainLevels chain = build_chain(cfg);
    const double tol = 1e-4;
    for (int k = 0; k <= 2; ++k) {
      double diff = std::abs(covariance_exact(chain, k) - g.values[k].covariance);
      report(diff < tol, "chain covariance depth " + std::to_string(k), diff, tol);
    }
    int idx = 3;
    for (double alpha : {0.1, 0.3})
      for (int k = 1; k <= 2; ++k) {
        double diff =
            std::abs(charge_correlation_exact(chain, alpha, k) - g.values[idx].charge);
        report(diff < tol, "chain charge alpha=" + fnum(alpha) + " depth " +
                               std::to_string(k), diff, tol);
        ++idx;
      }
  }

  // spectral step vs direct quadrature of the coarsening integral
  {
    ModelConfig cfg = make_config(2, 25.0, 4);
    SpectralCoeffs lam0 = init_coeffs(cfg);
    RgStepResult step = rg_step(lam0, cfg.theta_level(1), cfg.b);
    Potentials p0 = potential_from_coeffs(lam0, cfg.grid_size);
    PeriodicFunction v1 =
        potential_recursion_direct(p0.v, cfg.sigma_sq[1] / cfg.beta, cfg.b);
    auto modes = normalized_modes(v1, step.lam.max_q());
    double worst = 0.0;
    for (int q = 0; q <= step.lam.max_q(); ++q)
      worst = std::max(worst, std::abs(modes[q] - step.lam.at(q)));
    report(worst < 1e-8, "one-step quadrature vs spectral update", worst, 1e-8);
  }

  os << (failures == 0 ? "all oracle checks passed\n"
                       : std::to_string(failures) + " oracle checks failed\n");
  return failures == 0 ? 0 : 1;
}

int cmd_all_figures(const CommonOpts& o, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const int b = o.ob->count() ? o.b : 2;
  const int threads = o.threads;
  nlohmann::ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["b"] = b;
  manifest["threads"] = threads;
  manifest["files"] = nlohmann::ordered_json::array();
  bool all_pass = true;
  auto timed = [&](const std::string& name, const std::function<void()>& run) {
    auto t0 = std::chrono::steady_clock::now();
    run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest["files"].push_back({{"name", name}, {"seconds", secs}});
  };

  // data underlying the variance-jump figure
  std::vector<Sigma2Row> scan;
  timed("sigma2_scan.csv", [&] {
    CommonOpts so = o;
    so.out = (fs::path(out_dir) / "sigma2_scan.csv").string();
    cmd_sigma2_scan(so, 20.0, 40.0, 200);
    scan = sigma2_scan(b, 20.0, 40.0, 200, 16, 512, threads);
  });

  // charge-exponent surfaces
  std::vector<double> alphas = linspace(0.0, 0.4, 40);
  std::vector<double> betas = linspace(20.0, 40.0, 40);
  std::vector<std::vector<SurfaceCell>> cells;
  timed("kappa_surface.csv", [&] {
    CommonOpts so = o;
    so.out = (fs::path(out_dir) / "kappa_surface.csv").string();
    cmd_kappa_surface(so, 0.0, 0.4, 40, 20.0, 40.0, 40);
    cells = surface_grid(b, 16, 512, alphas, betas, threads);
  });
  timed("tstar_surface.csv", [&] {
    CommonOpts so = o;
    so.out = (fs::path(out_dir) / "tstar_surface.csv").string();
    cmd_tstar_surface(so, 0.0, 0.4, 40, 20.0, 40.0, 40);
  });

  // limit-potential profiles
  std::vector<double> thetas = {0.501, 0.6, 0.84};
  timed("vstar_profile.csv", [&] {
    CommonOpts so = o;
    so.out = (fs::path(out_dir) / "vstar_profile.csv").string();
    cmd_vstar_profile(so, thetas, 1e-12, 1'000'000);
  });

  auto check = [&](const std::string& name, bool ok, double value) {
    manifest["checks"][name] = {{"pass", ok}, {"value", value}};
    all_pass &= ok;
  };

  double jump = sigma2_jump_estimate(scan, b);
  check("jump_in_bracket_0.006_0.009", jump > 0.006 && jump < 0.009, jump);

  double worst_a0 = 0.0;
  for (std::size_t ibeta = 0; ibeta < betas.size(); ++ibeta)
    worst_a0 = std::max(worst_a0, std::abs(cells[0][ibeta].kappa));
  check("alpha0_kappa_identically_zero", worst_a0 == 0.0, worst_a0);

  const double bc = beta_critical(b);
  ChargeExponentData sub = kappa_exponent(0.3, 25.0, b);
  double sub_want = 4.0 * bc * 0.09 / 25.0;
  check("subcritical_closed_form", std::abs(sub.kappa - sub_want) < 1e-12,
        sub.kappa - sub_want);

  ChargeExponentData sup = kappa_exponent(0.3, 33.0, b);
  check("supercritical_below_closed_form", sup.kappa < 4.0 * bc * 0.09 / 33.0,
        sup.kappa);

  FixedPointResult near = fixed_point(b, 0.501);
  double osc = 0.0;
  const double g0 = std::exp(rg_step(near.lam, 0.501, b).log_g0);
  const double scale = std::pow(g0, -1.0 / (b - 1.0));
  for (int j = 0; j < 512; ++j) {
    double d = 1.0;
    for (int q = 1; q <= near.lam.max_q(); ++q)
      d += 2.0 * near.lam.at(q) * std::cos(2.0 * kPi * q * j / 512.0);
    osc = std::max(osc, std::abs(scale * d - 1.0));
  }
  check("vstar_near_one_at_theta_0.501", near.converged && osc < 0.07, osc);

  manifest["all_pass"] = all_pass;
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::cout << (all_pass ? "all-figures: all checks passed\n"
                         : "all-figures: some checks FAILED\n")
            << "manifest: " << (fs::path(out_dir) / "manifest.json").string() << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical Coulomb-gas RG toolkit"};
  app.set_version_flag("--version", std::string("hrg ") + kVersion);
  app.require_subcommand(1);
  int rc = 0;

  CommonOpts flow_o;
  auto* flow = app.add_subcommand("flow", "coefficient flow along the profile (CSV)");
  add_common(flow, flow_o);
  flow->callback([&] { rc = cmd_flow(flow_o); });

  CommonOpts fp_o;
  double fp_tol = 1e-12;
  long fp_iters = 1'000'000;
  auto* fp = app.add_subcommand("fixed-point", "supercritical limit coefficients (CSV)");
  add_common(fp, fp_o);
  fp->add_option("--tol", fp_tol, "successive-iterate tolerance");
  fp->add_option("--max-iters", fp_iters, "iteration cap");
  fp->callback([&] { rc = cmd_fixed_point(fp_o, fp_tol, fp_iters); });

  CommonOpts scan_o;
  double scan_lo = 20.0, scan_hi = 40.0;
  int scan_points = 200;
  auto* scan = app.add_subcommand("sigma2-scan", "effective variance over a beta range (CSV)");
  add_common(scan, scan_o);
  scan->add_option("--beta-lo", scan_lo, "range start");
  scan->add_option("--beta-hi", scan_hi, "range end");
  scan->add_option("--points", scan_points, "grid points")->check(CLI::Range(2, 100000));
  scan->callback([&] { rc = cmd_sigma2_scan(scan_o, scan_lo, scan_hi, scan_points); });

  CommonOpts ks_o;
  double ks_alo = 0.0, ks_ahi = 0.4, ks_blo = 20.0, ks_bhi = 40.0;
  int ks_apoints = 40, ks_bpoints = 40;
  auto* ks = app.add_subcommand("kappa-surface", "charge exponent over (alpha, beta) (CSV)");
  add_common(ks, ks_o);
  ks->add_option("--alpha-lo", ks_alo);
  ks->add_option("--alpha-hi", ks_ahi);
  ks->add_option("--alpha-points", ks_apoints)->check(CLI::Range(2, 10000));
  ks->add_option("--beta-lo", ks_blo);
  ks->add_option("--beta-hi", ks_bhi);
  ks->add_option("--beta-points", ks_bpoints)->check(CLI::Range(2, 10000));
  ks->callback([&] {
    rc = cmd_kappa_surface(ks_o, ks_alo, ks_ahi, ks_apoints, ks_blo, ks_bhi, ks_bpoints);
  });

  CommonOpts ts_o;
  double ts_alo = 0.0, ts_ahi = 0.4, ts_blo = 20.0, ts_bhi = 40.0;
  int ts_apoints = 40, ts_bpoints = 40;
  auto* ts = app.add_subcommand("tstar-surface", "t_star and derived exponents over (alpha, beta) (CSV)");
  add_common(ts, ts_o);
  ts->add_option("--alpha-lo", ts_alo);
  ts->add_option("--alpha-hi", ts_ahi);
  ts->add_option("--alpha-points", ts_apoints)->check(CLI::Range(2, 10000));
  ts->add_option("--beta-lo", ts_blo);
  ts->add_option("--beta-hi", ts_bhi);
  ts->add_option("--beta-points", ts_bpoints)->check(CLI::Range(2, 10000));
  ts->callback([&] {
    rc = cmd_tstar_surface(ts_o, ts_alo, ts_ahi, ts_apoints, ts_blo, ts_bhi, ts_bpoints);
  });

  CommonOpts vp_o;
  std::vector<double> vp_thetas;
  double vp_tol = 1e-12;
  long vp_iters = 200'000;
  auto* vp = app.add_subcommand("vstar-profile", "limit potential e^{-v} profiles (CSV)");
  add_common(vp, vp_o);
  vp->add_option("--theta-list", vp_thetas, "theta values (default 0.501 0.6 0.84)");
  vp->add_option("--tol", vp_tol, "successive-iterate tolerance");
  vp->add_option("--max-iters", vp_iters, "iteration cap per theta");
  vp->callback([&] { rc = cmd_vstar_profile(vp_o, vp_thetas, vp_tol, vp_iters); });

  CommonOpts cov_o;
  auto* cov = app.add_subcommand("covariance", "exact per-level covariance ladder (CSV)");
  add_common(cov, cov_o);
  cov->callback([&] { rc = cmd_covariance(cov_o); });

  CommonOpts ch_o;
  double ch_alpha = 0.2;
  auto* ch = app.add_subcommand("charge", "fractional-charge weights and correlations (CSV)");
  add_common(ch, ch_o);
  ch->add_option("--alpha", ch_alpha, "charge value, |alpha| < 1/2");
  ch->callback([&] { rc = cmd_charge(ch_o, ch_alpha); });

  CommonOpts sm_o;
  int sm_k = 0;
  double sm_alpha = 0.2;
  long sm_samples = 100'000;
  auto* sm = app.add_subcommand("sample", "Monte Carlo pair estimators vs exact values (JSON)");
  add_common(sm, sm_o);
  sm->add_option("--k", sm_k, "branch depth of the pair");
  sm->add_option("--alpha", sm_alpha, "charge value");
  sm->add_option("--n-samples", sm_samples, "sample count")->check(CLI::Range(2L, 2'000'000'000L));
  sm->callback([&] { rc = cmd_sample(sm_o, sm_k, sm_alpha, sm_samples); });

  CommonOpts oc_o;
  std::string oc_cache;
  auto* oc = app.add_subcommand("oracle-check", "cross-validate engines against brute force");
  add_common(oc, oc_o);
  oc->add_option("--cache-dir", oc_cache, "cache directory for enumeration results");
  oc->callback([&] { rc = cmd_oracle_check(oc_o, oc_cache); });

  CommonOpts af_o;
  std::string af_dir = "figures";
  auto* af = app.add_subcommand("all-figures", "emit every figure data file plus a manifest");
  add_common(af, af_o);
  af->add_option("--out-dir", af_dir, "output directory");
  af->callback([&] { rc = cmd_all_figures(af_o, af_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
