#include "homog/runner.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "homog/cellsolve.hpp"
#include "homog/csv.hpp"
#include "homog/errors.hpp"
#include "homog/front.hpp"
#include "homog/log.hpp"
#include "homog/measures.hpp"
#include "homog/obstacle.hpp"

namespace homog {

void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(1, jobs), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::string provenance_line(const std::string& sub, const Config& cfg) {
  std::ostringstream os;
  os << "homog " << sub;
  for (const auto& [k, v] : cfg.entries()) os << " " << k << "=" << v;
  return os.str();
}

std::string out_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<std::string> tensor_columns(int d, const std::string& stem) {
  std::vector<std::string> cols;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cols.push_back(stem + std::to_string(i + 1) + std::to_string(j + 1));
  return cols;
}

void append_tensor(std::vector<double>& row, const Mat& m, int d) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) row.push_back(at(m, i, j));
}

int run_effective(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  const std::vector<std::string> dkeys = cfg.indexed("direction");
  if (dkeys.empty()) throw ConfigError("missing key `direction0`");
  const int S = static_cast<int>(cfg.get_int("effective.s_samples", 32));
  const int M = grid_from_config(cfg, "effective.M", 64);

  std::vector<EffectiveTensors> results(dkeys.size());
  parallel_for(jobs, dkeys.size(), [&](std::size_t i) {
    const Direction e = direction_from_config(cfg, dkeys[i], f.d);
    results[i] = effective_tensors_rational(f, e, S, M);
  });

  std::vector<std::string> cols = {"e1", "e2", "e3"};
  for (const std::string& c : tensor_columns(f.d, "a")) cols.push_back(c);
  cols.push_back("m_bar");
  cols.push_back("m_pl");
  CsvWriter csv(out_path(dir, "effective.csv"), cols, provenance_line("effective", cfg));
  for (const EffectiveTensors& et : results) {
    std::vector<double> row = {et.e.e[0], et.e.e[1], et.e.e[2]};
    append_tensor(row, et.a_bar, f.d);
    row.push_back(et.m_bar);
    row.push_back(et.m_pl);
    csv.row(row);
  }
  return 0;
}

int run_limits(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const std::vector<std::string> ekeys = cfg.indexed("eta");
  if (ekeys.empty()) throw ConfigError("missing key `eta0`");
  const int S = static_cast<int>(cfg.get_int("limits.s_samples", 64));
  const int M = grid_from_config(cfg, "limits.M", 64);

  std::vector<LimitingTensors> results(ekeys.size());
  parallel_for(jobs, ekeys.size(), [&](std::size_t i) {
    const std::vector<double> ev = cfg.get_double_list(ekeys[i]);
    Vec eta{};
    for (int c = 0; c < f.d && c < static_cast<int>(ev.size()); ++c) eta[c] = ev[c];
    results[i] = limiting_tensors(f, e, eta, S, M);
  });

  std::vector<std::string> cols = {"eta1", "eta2", "eta3"};
  for (const std::string& c : tensor_columns(f.d, "a_tilde")) cols.push_back(c);
  cols.push_back("m_tilde");
  CsvWriter csv(out_path(dir, "limits.csv"), cols, provenance_line("limits", cfg));
  for (const LimitingTensors& lt : results) {
    std::vector<double> row = {lt.eta[0], lt.eta[1], lt.eta[2]};
    append_tensor(row, lt.a_tilde, f.d);
    row.push_back(lt.m_tilde);
    csv.row(row);
  }
  return 0;
}

int run_sweep(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const std::vector<std::string> ekeys = cfg.indexed("eta");
  if (ekeys.empty()) throw ConfigError("missing key `eta0`");
  const int depth = static_cast<int>(cfg.get_int("sweep.depth", 4));
  const int S = static_cast<int>(cfg.get_int("sweep.s_samples", 32));
  const int M = grid_from_config(cfg, "sweep.M", 64);

  struct Row {
    std::size_t eta_index;
    int n;
    double knorm, theta;
    EffectiveTensors et;
    LimitingTensors limit;
  };
  std::vector<std::vector<Row>> per_eta(ekeys.size());
  parallel_for(jobs, ekeys.size(), [&](std::size_t i) {
    const std::vector<double> ev = cfg.get_double_list(ekeys[i]);
    Vec eta{};
    for (int c = 0; c < f.d && c < static_cast<int>(ev.size()); ++c) eta[c] = ev[c];
    const ApproachSpec spec = approach_sequence(e, eta, depth);
    const LimitingTensors lim = limiting_tensors(f, e, eta, std::max(S, 32), M);
    for (int n = 0; n < depth; ++n) {
      Row r;
      r.eta_index = i;
      r.n = n;
      r.knorm = inorm(f.d, spec.sequence[n].k);
      r.theta = spec.theta[n];
      r.et = effective_tensors_rational(f, spec.sequence[n], S, M);
      r.limit = lim;
      per_eta[i].push_back(r);
    }
  });

  std::vector<std::string> cols = {"eta_index", "n", "k_norm", "theta"};
  for (const std::string& c : tensor_columns(f.d, "a")) cols.push_back(c);
  cols.push_back("m_bar");
  for (const std::string& c : tensor_columns(f.d, "a_tilde")) cols.push_back(c);
  cols.push_back("m_tilde");
  CsvWriter csv(out_path(dir, "sweep.csv"), cols, provenance_line("sweep", cfg));
  for (const auto& rows : per_eta)
    for (const Row& r : rows) {
      std::vector<double> row = {static_cast<double>(r.eta_index), static_cast<double>(r.n),
                                 r.knorm, r.theta};
      append_tensor(row, r.et.a_bar, f.d);
      row.push_back(r.et.m_bar);
      append_tensor(row, r.limit.a_tilde, f.d);
      row.push_back(r.limit.m_tilde);
      csv.row(row);
    }
  return 0;
}

int run_front(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const std::vector<double> eps_list = cfg.get_double_list("front.epsilon");
  const double alpha = cfg.get_double("front.alpha");
  const double crossings = cfg.get_double("front.T", 4.0);
  const int N = grid_from_config(cfg, "front.grid", 32);
  const int S = static_cast<int>(cfg.get_int("front.s_samples", 64));
  const int M = grid_from_config(cfg, "front.M", 64);

  const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, S), M);
  const PulsatingWave wave = pulsating_profile(osc.m_perp, e);

  std::vector<FrontState> states(eps_list.size());
  parallel_for(jobs, eps_list.size(), [&](std::size_t i) {
    const double eps = eps_list[i];
    const double T = crossings * eps * wave.m_pl / alpha; // crossings periods
    states[i] = simulate_front(f, e, alpha, eps, T, std::vector<int>(f.d, N));
  });

  CsvWriter csv(out_path(dir, "front_speeds.csv"),
                {"epsilon", "speed", "alpha_over_m_pl", "rel_error", "fit_rms"},
                provenance_line("front", cfg));
  const double ref = alpha / wave.m_pl;
  for (std::size_t i = 0; i < states.size(); ++i) {
    csv.row({eps_list[i], states[i].speed, ref, std::abs(states[i].speed - ref) / std::abs(ref),
             states[i].fit_rms});
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    CsvWriter ts(out_path(dir, "front_series_" + std::to_string(i) + ".csv"),
                 {"t", "mean_w"}, provenance_line("front", cfg));
    for (std::size_t j = 0; j < states[i].sample_t.size(); ++j)
      ts.row({states[i].sample_t[j], states[i].sample_mean[j]});
  }
  return 0;
}

int run_speed2d(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  if (f.d != 2) throw ConfigError("key `field.d`: speed2d requires d = 2");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const std::vector<double> alphas = cfg.get_double_list("speed2d.alpha");
  const double crossings = cfg.get_double("speed2d.T", 4.0);
  const int N = grid_from_config(cfg, "speed2d.grid", 64);
  const int S = static_cast<int>(cfg.get_int("speed2d.s_samples", 64));
  const int M = grid_from_config(cfg, "speed2d.M", 64);
  std::vector<int> dims = {N, N};
  if (cfg.has("speed2d.grid2")) dims[1] = grid_from_config(cfg, "speed2d.grid2", N);

  const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, S), M);
  const PulsatingWave wave = pulsating_profile(osc.m_perp, e);

  std::vector<double> speeds(alphas.size());
  parallel_for(jobs, alphas.size(), [&](std::size_t i) {
    const double T = crossings * wave.m_pl / alphas[i];
    speeds[i] = front_speed_2d(f, e, alphas[i], T, dims);
  });

  CsvWriter csv(out_path(dir, "speed2d.csv"),
                {"alpha", "lambda", "lambda_over_alpha", "inv_m_pl"},
                provenance_line("speed2d", cfg));
  for (std::size_t i = 0; i < alphas.size(); ++i)
    csv.row({alphas[i], speeds[i], speeds[i] / alphas[i], 1.0 / wave.m_pl});
  return 0;
}

int run_obstacle(const Config& cfg, int jobs, const std::string& dir) {
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const ProjectedOperator op = project_A(f, e);
  const std::vector<double> R_list = cfg.get_double_list("obstacle.R");
  const double tol = cfg.get_double("obstacle.tol", 1e-2);
  const int M = static_cast<int>(cfg.get_int("obstacle.M", 128));
  const int N = grid_from_config(cfg, "obstacle.N", 64);
  const std::vector<std::string> xkeys = cfg.indexed("X");
  if (xkeys.empty()) throw ConfigError("missing key `X0`");
  const SliceChart chart = slice_lattice_basis(e);
  const std::vector<Vec> shifts = default_obstacle_shifts(chart, 1.0);

  struct Item {
    double R;
    Mat X;
    CriticalMu mu;
    double F_bar;
  };
  std::vector<Item> items;
  for (double R : R_list)
    for (const std::string& xk : xkeys) {
      Item it;
      it.R = R;
      std::vector<double> xs = cfg.get_double_list(xk);
      if (static_cast<int>(xs.size()) != f.d * f.d)
        throw ConfigError("key `" + xk + "`: expected " + std::to_string(f.d * f.d) +
                          " entries");
      for (int i = 0; i < f.d; ++i)
        for (int j = 0; j < f.d; ++j) at(it.X, i, j) = xs[static_cast<std::size_t>(i) * f.d + j];
      items.push_back(it);
    }

  parallel_for(jobs, items.size(), [&](std::size_t i) {
    Item& it = items[i];
    it.mu = critical_mu(op, it.X, it.R, 1.0, shifts, tol, M);
    const std::vector<double> deltas = {0.64, 0.32, 0.16, 0.08};
    const OscillatingProfile prof = extract_Fperp(op, it.X, deltas, N, 2);
    double mean = 0;
    for (double v : prof.scalars) mean += v;
    it.F_bar = mean / static_cast<double>(prof.scalars.size());
  });

  CsvWriter csv(out_path(dir, "obstacle.csv"),
                {"R", "X11", "mu_hat", "sub_lo", "sub_hi", "super_lo", "super_hi",
                 "minus_F_bar", "rel_gap"},
                provenance_line("obstacle", cfg));
  for (const Item& it : items) {
    const double denom = std::max(std::abs(it.F_bar), 1e-300);
    csv.row({it.R, at(it.X, 0, 0), it.mu.mu_hat, it.mu.sub_lo, it.mu.sub_hi, it.mu.super_lo,
             it.mu.super_hi, -it.F_bar, std::abs(it.mu.mu_hat + it.F_bar) / denom});
  }
  return 0;
}

int run_fourier(const Config& cfg, int jobs, const std::string& dir) {
  (void)jobs;
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const double C_e = cfg.get_double("fourier.C_e", 0.3);
  const double tau = cfg.get_double("fourier.tau", 1.0);
  const int K_max = static_cast<int>(cfg.get_int("fourier.K_max", 50));
  const int K = static_cast<int>(cfg.get_int("fourier.K", 8));
  const int N = grid_from_config(cfg, "fourier.N", 64);

  const DiophantineResult dio = diophantine_check(e, C_e, tau, K_max);
  const Corrector cor = fourier_corrector(f, e, K, N);

  CsvWriter csv(out_path(dir, "fourier.csv"),
                {"C_e", "tau", "K_max", "pass", "worst_value", "K", "N", "residual",
                 "tail_bound"},
                provenance_line("fourier", cfg));
  csv.row({C_e, tau, static_cast<double>(K_max), dio.pass ? 1.0 : 0.0, dio.worst_value,
           static_cast<double>(K), static_cast<double>(N), cor.residual_inf, cor.tail_bound});
  return 0;
}

int run_invariant(const Config& cfg, int jobs, const std::string& dir) {
  (void)jobs;
  const CoefficientField f = field_from_config(cfg, "field");
  const Direction e = direction_from_config(cfg, "direction", f.d);
  const ProjectedOperator op = project_A(f, e);
  const SliceChart chart = slice_lattice_basis(e);
  const double s = cfg.get_double("invariant.s", 0.0);
  const int M = grid_from_config(cfg, "invariant.M", 64);
  const int bins = static_cast<int>(cfg.get_int("invariant.bins", 32));
  const long long steps = cfg.get_int("invariant.steps", 1000000);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 12345));
  const double dt = cfg.get_double("invariant.dt", 1.0 / (2.0 * f.Lambda * bins * bins));

  const InvariantMeasure mu = invariant_measure_slice(op, chart, s, M);
  const std::vector<double> pde = bin_density(mu, bins);
  const EmpiricalMeasure emp = sde_empirical_measure(op, chart, s, steps, dt, bins, seed);
  const double tv = tv_distance(pde, emp.density, chart.sdim, bins);

  {
    CsvWriter csv(out_path(dir, "invariant_bins.csv"), {"bin1", "bin2", "pde", "sde"},
                  provenance_line("invariant", cfg));
    const int b1 = (chart.sdim == 2) ? bins : 1;
    for (int i = 0; i < bins; ++i)
      for (int j = 0; j < b1; ++j) {
        const std::size_t id = (chart.sdim == 2) ? static_cast<std::size_t>(i) * bins + j
                                                 : static_cast<std::size_t>(i);
        csv.row({static_cast<double>(i), static_cast<double>(j), pde[id], emp.density[id]});
      }
  }
  {
    CsvWriter csv(out_path(dir, "invariant_summary.csv"),
                  {"tv", "steps", "dt", "seed", "bins", "measure_residual"},
                  provenance_line("invariant", cfg));
    csv.row({tv, static_cast<double>(steps), dt, static_cast<double>(seed),
             static_cast<double>(bins), mu.residual});
  }
  return 0;
}

} // namespace

int run_subcommand(const std::string& name, const Config& cfg, int jobs,
                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  log_info("run " + name + " -> " + out_dir);
  if (name == "effective") return run_effective(cfg, jobs, out_dir);
  if (name == "limits") return run_limits(cfg, jobs, out_dir);
  if (name == "sweep") return run_sweep(cfg, jobs, out_dir);
  if (name == "front") return run_front(cfg, jobs, out_dir);
  if (name == "speed2d") return run_speed2d(cfg, jobs, out_dir);
  if (name == "obstacle") return run_obstacle(cfg, jobs, out_dir);
  if (name == "fourier") return run_fourier(cfg, jobs, out_dir);
  if (name == "invariant") return run_invariant(cfg, jobs, out_dir);
  throw ConfigError("unknown subcommand `" + name + "`");
}

} // namespace homog
