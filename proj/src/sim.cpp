#include "phil/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace phil {

namespace {

enum Output : Eigen::Index { kVref, kIref, kV1, kVc, kI1, kId, kV, kJB, kOutputs };

std::size_t sample_count(double duration, double ts) {
  if (duration <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(duration / ts - 1e-9));
}

double rms(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t k = from; k < to; ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return to > from ? std::sqrt(acc / static_cast<double>(to - from)) : 0.0;
}

double peak(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  double out = 0.0;
  for (std::size_t k = from; k < to; ++k) out = std::max(out, std::abs(a[k] - b[k]));
  return out;
}

void truncate(PhaseTrace& p, std::size_t n) {
  for (auto* v : {&p.v_grid, &p.v1, &p.i1, &p.vc, &p.id, &p.v, &p.jb, &p.v_ref, &p.i_ref}) {
    if (v->size() > n) v->resize(n);
  }
}

}  // namespace

void SimOptions::validate() const {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::ValidationError, "simulation.duration must be >= 0");
  }
  if (!(divergence_factor > 0.0) || !(voltage_bound > 0.0) || !(current_bound > 0.0) ||
      !(v_command_bound > 0.0) || !(jb_command_bound > 0.0)) {
    throw Error(ErrorCode::ValidationError, "simulation divergence bounds must be > 0");
  }
}

std::array<std::vector<double>, 3> three_phase_source(double v_rms, double f0, double sample_time, double duration) {
  if (!(sample_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample time must be positive");
  const std::size_t n = sample_count(duration, sample_time);
  const double amplitude = v_rms * std::sqrt(2.0);
  std::array<std::vector<double>, 3> out;
  for (int phase = 0; phase < 3; ++phase) {
    auto& v = out[static_cast<std::size_t>(phase)];
    v.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * sample_time;
      v[k] = amplitude * std::sin(2.0 * std::numbers::pi * f0 * t - 2.0 * std::numbers::pi * phase / 3.0);
    }
  }
  return out;
}

StateSpace closed_loop_system(const PhilScenario& scenario, const InterfaceAlgorithm& interface) {
  const PartitionedPlant plant = physical_interconnection(scenario);
  if (!(interface.realization.domain() == plant.sys().domain())) {
    throw Error(ErrorCode::DomainMismatch, "interface sample time differs from the scenario sample time");
  }
  // Append the actuation commands to z so they can be recorded.
  const StateSpace& p = plant.sys();
  const Eigen::Index n = p.states(), nz = plant.n_z(), ny = plant.n_y();
  Matrix c(nz + 2 + ny, n);
  c << p.c().topRows(nz), Matrix::Zero(2, n), p.c().bottomRows(ny);
  Matrix d(nz + 2 + ny, 3);
  d << p.d().topRows(nz), (Matrix(2, 3) << 0, 1, 0, 0, 0, 1).finished(), p.d().bottomRows(ny);
  const PartitionedPlant augmented(StateSpace(p.a(), p.b(), c, d, p.domain()), 1, 2, nz + 2, ny);
  return lft_lower(augmented, interface.realization);
}

SimTrace run_closed_loop(const PhilScenario& scenario, const InterfaceAlgorithm& interface,
                         const SimOptions& options) {
  options.validate();
  const StateSpace cl = closed_loop_system(scenario, interface);
  const auto sources = three_phase_source(scenario.v_grid_rms, scenario.f0, scenario.sample_time, options.duration);
  const std::size_t n = sources[0].size();

  std::array<double, kOutputs> bound{};
  const double f = options.divergence_factor;
  bound[kVref] = bound[kV1] = bound[kVc] = f * options.voltage_bound;
  bound[kIref] = bound[kI1] = bound[kId] = f * options.current_bound;
  bound[kV] = f * options.v_command_bound;
  bound[kJB] = f * options.jb_command_bound;

  SimTrace trace;
  trace.sample_time = scenario.sample_time;
  trace.f0 = scenario.f0;
  const Matrix& a = cl.a();
  const Vector b = cl.b().col(0);
  const Matrix& c = cl.c();
  const Vector d = cl.d().col(0);
  for (std::size_t phase = 0; phase < 3; ++phase) {
    PhaseTrace& out = trace.phases[phase];
    for (auto* v : {&out.v_grid, &out.v1, &out.i1, &out.vc, &out.id, &out.v, &out.jb, &out.v_ref, &out.i_ref}) {
      v->reserve(n);
    }
    Vector x = Vector::Zero(cl.states());
    Vector y(kOutputs);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = sources[phase][k];
      y.noalias() = c * x;
      y += d * w;
      x = a * x + b * w;
      out.v_grid.push_back(w);
      out.v_ref.push_back(y(kVref));
      out.i_ref.push_back(y(kIref));
      out.v1.push_back(y(kV1));
      out.vc.push_back(y(kVc));
      out.i1.push_back(y(kI1));
      out.id.push_back(y(kId));
      out.v.push_back(y(kV));
      out.jb.push_back(y(kJB));
      if (!y.allFinite() || !x.allFinite()) {
        if (!trace.divergence_sample || k < *trace.divergence_sample) trace.divergence_sample = k;
        break;
      }
      bool diverged = false;
      for (Eigen::Index i = 0; i < kOutputs; ++i) diverged = diverged || std::abs(y(i)) > bound[static_cast<std::size_t>(i)];
      if (diverged) {
        if (!trace.divergence_sample || k < *trace.divergence_sample) trace.divergence_sample = k;
        break;
      }
    }
  }
  if (trace.divergence_sample) {
    for (auto& p : trace.phases) truncate(p, *trace.divergence_sample + 1);
  }
  return trace;
}

AccuracyMetrics accuracy_metrics(const SimTrace& trace, double settle_fraction) {
  const std::size_t n = trace.samples();
  if (n == 0) throw Error(ErrorCode::EmptyTrace, "accuracy metrics need a non-empty trace");
  if (!(settle_fraction >= 0.0 && settle_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "settle_fraction must lie in [0, 1)");
  }
  AccuracyMetrics m;
  m.stable = !trace.divergence_sample;
  if (!m.stable) return m;

  const auto start = static_cast<std::size_t>(std::floor(settle_fraction * static_cast<double>(n)));
  std::size_t window = n - start;
  const double periods = std::floor(static_cast<double>(window) * trace.sample_time * trace.f0 + 1e-9);
  if (periods >= 1.0) {
    window = std::min(window, static_cast<std::size_t>(std::llround(periods / (trace.f0 * trace.sample_time))));
  }
  const std::size_t from = n - window;
  for (const PhaseTrace& p : trace.phases) {
    m.ss_rms_eV = std::max(m.ss_rms_eV, rms(p.v1, p.vc, from, n));
    m.ss_rms_eI = std::max(m.ss_rms_eI, rms(p.i1, p.id, from, n));
    m.ss_rms_tV = std::max({m.ss_rms_tV, rms(p.v1, p.v_ref, from, n), rms(p.vc, p.v_ref, from, n)});
    m.ss_rms_tI = std::max({m.ss_rms_tI, rms(p.i1, p.i_ref, from, n), rms(p.id, p.i_ref, from, n)});
    m.peak_eV = std::max(m.peak_eV, peak(p.v1, p.vc, from, n));
    m.peak_eI = std::max(m.peak_eI, peak(p.i1, p.id, from, n));
  }
  return m;
}

unsigned max_sweep_threads() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHIL_FORGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return threads;
}

std::vector<SweepRow> sweep_scr(const PhilScenario& scenario_template, const InterfaceAlgorithm& interface,
                                const std::vector<double>& s_values, const SimOptions& options,
                                double settle_fraction) {
  std::vector<SweepRow> rows(s_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      row.scr = s_values[i];
      try {
        PhilScenario scenario = scenario_template;
        scenario.scr = s_values[i];
        row.metrics = accuracy_metrics(run_closed_loop(scenario, interface, options), settle_fraction);
        row.stable = row.metrics.stable;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const unsigned count = std::min<unsigned>(max_sweep_threads(), static_cast<unsigned>(rows.size()));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

ThresholdResult find_itm_threshold(const PhilScenario& scenario_template, double filter_cutoff_hz, double s_lo,
                                   double s_hi, double tol, const SimOptions& options) {
  if (!(s_lo > 0.0) || !(s_hi > s_lo) || !(tol > 0.0)) {
    throw Error(ErrorCode::BracketInvalid, "threshold search needs 0 < s_lo < s_hi and tol > 0");
  }
  const InterfaceAlgorithm itm = itm_interface(filter_cutoff_hz, scenario_template.sample_time);
  auto stable_at = [&](double s) {
    PhilScenario scenario = scenario_template;
    scenario.scr = s;
    return !run_closed_loop(scenario, itm, options).divergence_sample.has_value();
  };
  if (stable_at(s_lo)) throw Error(ErrorCode::BracketInvalid, "ITM is stable at the lower S bound");
  if (!stable_at(s_hi)) throw Error(ErrorCode::BracketInvalid, "ITM is unstable at the upper S bound");
  ThresholdResult r;
  r.lo = s_lo;
  r.hi = s_hi;
  while (r.hi - r.lo > tol) {
    const double mid = 0.5 * (r.lo + r.hi);
    (stable_at(mid) ? r.hi : r.lo) = mid;
    ++r.iterations;
  }
  r.s_star = 0.5 * (r.lo + r.hi);
  return r;
}

}  // namespace phil
