#include "memdd/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "memdd/csv.hpp"
#include "memdd/errors.hpp"

namespace memdd {

namespace {

// Calls fn(i) for i in [0, n), concurrently when asked. Exceptions from any
// member surface from here.
template <class Fn>
auto map_members(std::size_t n, bool parallel, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<R>> futures;
  futures.reserve(n);
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

Problem reduced_problem(const ExperimentConfig& cfg) {
  Problem p = cfg.problem();
  p.model = Model::reduced();
  return p;
}

std::string eps_tag(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", e);
  return buf;
}

}  // namespace

LoglogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("log-log fit needs at least two (x, y) pairs");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("log-log fit needs distinct x values");
  LoglogFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

LimitStudyResult limit_study(const ExperimentConfig& cfg, bool parallel) {
  const Problem base = reduced_problem(cfg);
  const TimeGrid tg = cfg.time_grid();
  const std::size_t n = cfg.eps_list.size();
  // Member 0 is the reduced model, member i the full model with eps_list[i-1].
  auto runs = map_members(n + 1, parallel, [&](std::size_t i) {
    Problem p = base;
    if (i > 0) {
      p.model = Model::full(cfg.eps_list[i - 1]);
      p.device.eps = cfg.eps_list[i - 1];
    }
    return run(p, tg);
  });
  LimitStudyResult r;
  r.eps = cfg.eps_list;
  r.reduced = std::move(runs[0]);
  for (std::size_t i = 0; i < n; ++i) {
    r.full.push_back(std::move(runs[i + 1]));
    r.l1_distance.push_back(l1_trajectory_distance(r.full.back(), r.reduced, base.grid));
  }
  if (n >= 2) r.fit = loglog_fit(r.eps, r.l1_distance);
  return r;
}

std::vector<SweepMember> de_sweep(const ExperimentConfig& cfg, bool parallel) {
  const Problem base = reduced_problem(cfg);
  const TimeGrid tg = cfg.time_grid();
  RunOptions opts;
  opts.snapshot_stride = tg.M;
  opts.record_diagnostics = false;
  return map_members(cfg.de_ratios.size(), parallel, [&](std::size_t i) {
    Problem p = base;
    p.bias = BiasProgram::constant(0.0, 0.0);
    p.device.D_e = cfg.de_ratios[i] * cfg.D_init;
    Trajectory t = run(p, tg, opts);
    return SweepMember{cfg.de_ratios[i], p.device, p.bias, t.snapshots.back()};
  });
}

std::vector<SweepMember> bias_sweep(const ExperimentConfig& cfg, bool parallel) {
  const Problem base = reduced_problem(cfg);
  const TimeGrid tg = cfg.time_grid();
  RunOptions opts;
  opts.snapshot_stride = tg.M;
  opts.record_diagnostics = false;
  return map_members(cfg.voltages.size(), parallel, [&](std::size_t i) {
    Problem p = base;
    p.bias = BiasProgram::constant(cfg.U0, cfg.U0 + cfg.voltages[i]);
    Trajectory t = run(p, tg, opts);
    return SweepMember{cfg.voltages[i], p.device, p.bias, t.snapshots.back()};
  });
}

std::vector<double> zero_bias_potential(const Grid& grid, const SweepMember& m) {
  const BoundaryData bc = boundary_data(m.device, m.bias, 0.0);
  const double U0 = bc.U_left;
  const double UL = bc.U_right;
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double applied = (UL - U0) * grid.x(k) / grid.length() - U0;
    out[k] = m.final_state.V[k] - bc.Vbi_left - applied;
  }
  return out;
}

std::vector<IvSample> iv_sweep(const ExperimentConfig& cfg) {
  const Problem p = reduced_problem(cfg);
  RunOptions opts;
  opts.snapshot_stride = cfg.time_grid().M;
  const Trajectory t = run(p, cfg.time_grid(), opts);
  std::vector<IvSample> out;
  out.reserve(t.records.size());
  for (const auto& r : t.records) out.push_back({r.t, r.applied_voltage, r.current});
  return out;
}

LoopMetrics analyze_loop(const std::vector<IvSample>& tr, double probe) {
  LoopMetrics m;
  for (const auto& s : tr) m.peak_current = std::max(m.peak_current, std::fabs(s.current));

  // Zero crossings of the voltage, with the current interpolated linearly in U.
  // cuts[c] is the sample just before crossing c, cut_I its current
  std::vector<std::size_t> cuts;
  std::vector<double> cut_I;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double a = tr[i].voltage;
    const double b = tr[i + 1].voltage;
    if (a == 0.0 || a * b < 0.0) {
      const double w = a == 0.0 ? 0.0 : a / (a - b);
      const double I = tr[i].current + w * (tr[i + 1].current - tr[i].current);
      m.max_current_at_zero_voltage = std::max(m.max_current_at_zero_voltage, std::fabs(I));
      ++m.zero_crossings;
      cuts.push_back(i);
      cut_I.push_back(I);
    }
  }
  if (!tr.empty() && tr.back().voltage == 0.0) {
    m.max_current_at_zero_voltage =
        std::max(m.max_current_at_zero_voltage, std::fabs(tr.back().current));
    ++m.zero_crossings;
    cuts.push_back(tr.size() - 1);
    cut_I.push_back(tr.back().current);
  }

  // Each stretch between consecutive crossings is one lobe.
  m.min_branch_gap = HUGE_VAL;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const std::size_t lo = cuts[c];
    const std::size_t hi = cuts[c + 1] + 1;
    // trapezoids along (0, I_c), samples lo+1 .. cuts[c+1], (0, I_{c+1})
    double area = 0.0;
    double U_prev = 0.0, I_prev = cut_I[c];
    for (std::size_t i = lo + 1; i <= cuts[c + 1]; ++i) {
      area += 0.5 * (I_prev + tr[i].current) * (tr[i].voltage - U_prev);
      U_prev = tr[i].voltage;
      I_prev = tr[i].current;
    }
    area += 0.5 * (I_prev + cut_I[c + 1]) * (0.0 - U_prev);
    m.loop_area += std::fabs(area);

    // Rising |U| through the probe, then falling back through it.
    double I_rise = NAN;
    double I_fall = NAN;
    for (std::size_t i = lo; i + 1 <= hi && i + 1 < tr.size(); ++i) {
      const double a = std::fabs(tr[i].voltage) - probe;
      const double b = std::fabs(tr[i + 1].voltage) - probe;
      if (a * b > 0.0 || a == b) continue;
      const double w = a / (a - b);
      const double I = tr[i].current + w * (tr[i + 1].current - tr[i].current);
      if (b > a && std::isnan(I_rise)) I_rise = I;
      if (b < a && !std::isnan(I_rise)) I_fall = I;
    }
    if (!std::isnan(I_rise) && !std::isnan(I_fall)) {
      const double scale = std::max(std::fabs(I_rise), std::fabs(I_fall));
      const double gap = scale > 0.0 ? std::fabs(I_rise - I_fall) / scale : 0.0;
      m.min_branch_gap = std::min(m.min_branch_gap, gap);
      ++m.lobes_probed;
    }
  }
  if (m.lobes_probed == 0) m.min_branch_gap = 0.0;
  return m;
}

namespace {

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void write_profile_pair(const std::string& dir, const std::string& stem, const Grid& grid,
                        const Trajectory& t, std::size_t early) {
  write_csv(profile_table(grid, t.snapshots[early]), join(dir, stem + "_early.csv"));
  write_csv(profile_table(grid, t.snapshots.back()), join(dir, stem + "_final.csv"));
}

int run_transient(const ExperimentConfig& cfg) {
  const Problem p = cfg.problem();
  RunOptions opts;
  opts.snapshot_stride = cfg.stride;
  const Trajectory t = run(p, cfg.time_grid(), opts);
  write_csv(diagnostics_table(t.records), join(cfg.out_dir, "diagnostics.csv"));
  write_csv(profile_table(p.grid, t.snapshots.back()), join(cfg.out_dir, "profile.csv"));
  std::vector<std::string> cols{"t"};
  for (const auto& c : profile_columns()) cols.push_back(c);
  CsvTable snaps{cols, {}};
  for (std::size_t m = 0; m < t.snapshots.size(); ++m) {
    const CsvTable prof = profile_table(p.grid, t.snapshots[m]);
    for (const auto& row : prof.rows) {
      std::vector<double> r{t.times[m]};
      r.insert(r.end(), row.begin(), row.end());
      snaps.add_row(std::move(r));
    }
  }
  write_csv(snaps, join(cfg.out_dir, "snapshots.csv"));
  return 0;
}

int run_steady(const ExperimentConfig& cfg) {
  const Problem p = reduced_problem(cfg);
  const State s = solve_stationary(p);
  const BoundaryData bc = boundary_data(p.device, p.bias, 0.0);
  write_csv(profile_table(p.grid, s), join(cfg.out_dir, "profile.csv"));
  write_csv(diagnostics_table({make_record(0.0, s, bc, p.grid, p.device, p.model, 0)}),
            join(cfg.out_dir, "diagnostics.csv"));
  return 0;
}

int run_limit(const ExperimentConfig& cfg) {
  const LimitStudyResult r = limit_study(cfg);
  const Grid grid = cfg.grid();
  const int M = cfg.time_grid().M;
  std::size_t early = static_cast<std::size_t>(std::lround(M / 10.0));
  early = std::min<std::size_t>(std::max<std::size_t>(early, 1), r.reduced.snapshots.size() - 1);
  CsvTable table{{"eps", "l1_distance"}, {}};
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    table.add_row({r.eps[i], r.l1_distance[i]});
    write_profile_pair(cfg.out_dir, "profile_eps_" + eps_tag(r.eps[i]), grid, r.full[i], early);
  }
  write_profile_pair(cfg.out_dir, "profile_reduced", grid, r.reduced, early);
  write_csv(table, join(cfg.out_dir, "limit.csv"));
  write_csv(CsvTable{{"slope", "intercept", "t_early", "t_final"},
                     {{r.fit.slope, r.fit.intercept, r.reduced.times[early],
                       r.reduced.times.back()}}},
            join(cfg.out_dir, "limit_fit.csv"));
  std::printf("limit-study slope %.6g\n", r.fit.slope);
  return 0;
}

int run_de_sweep(const ExperimentConfig& cfg) {
  const Grid grid = cfg.grid();
  CsvTable t{{"ratio", "x", "D", "D_over_De", "V"}, {}};
  for (const auto& m : de_sweep(cfg)) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double D = m.final_state.D(k);
      t.add_row({m.parameter, grid.x(k), D, D / m.device.D_e, m.final_state.V[k]});
    }
  }
  write_csv(t, join(cfg.out_dir, "de_sweep.csv"));
  return 0;
}

int run_bias_sweep(const ExperimentConfig& cfg) {
  const Grid grid = cfg.grid();
  CsvTable t{{"voltage_UT", "x", "zero_bias_potential", "D", "V"}, {}};
  for (const auto& m : bias_sweep(cfg)) {
    const std::vector<double> zb = zero_bias_potential(grid, m);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      t.add_row({m.parameter, grid.x(k), zb[k], m.final_state.D(k), m.final_state.V[k]});
    }
  }
  write_csv(t, join(cfg.out_dir, "bias_sweep.csv"));
  return 0;
}

int run_iv(const ExperimentConfig& cfg) {
  const std::vector<IvSample> trace = iv_sweep(cfg);
  CsvTable t{{"t", "voltage_UT", "voltage_volts", "current_scaled", "current_Acm2"}, {}};
  for (const auto& s : trace) {
    t.add_row({s.t, s.voltage, s.voltage * cfg.scaling.U_T, s.current, s.current * cfg.scaling.J0});
  }
  write_csv(t, join(cfg.out_dir, "iv.csv"));
  const LoopMetrics m = analyze_loop(trace);
  std::printf("iv-sweep peak |I| %.6g, max |I| at U=0 %.3g, loop area %.6g, branch gap %.3g\n",
              m.peak_current, m.max_current_at_zero_voltage, m.loop_area, m.min_branch_gap);
  return 0;
}

int run_lemmas(const ExperimentConfig& cfg) {
  const LemmaReport r = verify_truncation_lemmas();
  std::ofstream out(join(cfg.out_dir, "lemma_report.txt"));
  if (!out) throw IoError("cannot write lemma report");
  out.precision(17);
  out << "truncation_samples = " << r.truncation_samples << "\n"
      << "max_h_excess = " << r.max_h_excess << "\n"
      << "empirical_C_g = " << r.empirical_C_g << "\n"
      << "empirical_C_h = " << r.empirical_C_h << "\n"
      << "truncation_ok = " << r.truncation_ok << "\n"
      << "conjugate_samples = " << r.conjugate_samples << "\n"
      << "max_conjugate_excess = " << r.max_conjugate_excess << "\n"
      << "conjugate_ok = " << r.conjugate_ok << "\n"
      << "max_convexity_defect = " << r.max_convexity_defect << "\n"
      << "convexity_ok = " << r.convexity_ok << "\n";
  if (!out) throw IoError("write to lemma report failed");
  std::printf("verify-lemmas %s (C_g %.6g)\n", r.all_ok() ? "ok" : "FAILED", r.empirical_C_g);
  return r.all_ok() ? 0 : 1;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.experiment) throw InvalidConfig("no experiment selected");
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir)) {
    throw IoError("cannot create output directory '" + cfg.out_dir + "'");
  }
  try {
    switch (*cfg.experiment) {
      case Experiment::transient_full:
      case Experiment::transient_reduced:
        return run_transient(cfg);
      case Experiment::steady:
        return run_steady(cfg);
      case Experiment::limit_study:
        return run_limit(cfg);
      case Experiment::de_sweep:
        return run_de_sweep(cfg);
      case Experiment::bias_sweep:
        return run_bias_sweep(cfg);
      case Experiment::iv_sweep:
        return run_iv(cfg);
      case Experiment::verify_lemmas:
        return run_lemmas(cfg);
    }
  } catch (const StepError& e) {
    std::cerr << "solver failure at t = " << e.time() << " (dt " << e.dt() << "): " << e.what()
              << "\n";
    return 2;
  } catch (const StationaryError& e) {
    std::cerr << "solver failure at t = 0: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace memdd
