#include "kvstring/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kvstring/analysis.hpp"
#include "kvstring/evolution.hpp"
#include "kvstring/oracles.hpp"
#include "kvstring/resolvent.hpp"
#include "kvstring/spectral.hpp"

namespace kvstring {

namespace {

struct Lab {
  unsigned threads;
  std::map<std::pair<double, int>, SystemMatrices> systems;
  std::map<std::pair<double, int>, ResolventScan> dip_scans;

  const SystemMatrices& system(double alpha, int n) {
    auto key = std::make_pair(alpha, n);
    auto it = systems.find(key);
    if (it == systems.end())
      it = systems.emplace(key, assemble(build_mesh(n), DampingProfile(alpha))).first;
    return it->second;
  }

  const ResolventScan& dip_scan(double alpha, int n) {
    auto key = std::make_pair(alpha, n);
    auto it = dip_scans.find(key);
    if (it == dip_scans.end())
      it = dip_scans.emplace(key, scan_resolvent_dips(system(alpha, n), 10.0, 100.0, threads))
               .first;
    return it->second;
  }
};

struct Check {
  bool ok = true;
  std::ostringstream out;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (out.tellp() > 0) out << "; ";
      out << "FAILED: " << what;
    }
  }
  void note(const std::string& what) {
    if (out.tellp() > 0) out << "; ";
    out << what;
  }
};

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Criterion 1: the fitted resolvent growth exponent over omega in [10,100]
// matches (1-alpha)/(2-alpha) within 0.08 at n=2048 and is stable under mesh
// doubling. The fit runs on the resonance-dip envelope of sigma_min, where
// the growth law lives.
CriterionResult criterion_resolvent_exponent(Lab& lab) {
  Check c;
  for (double alpha : {0.0, 0.25, 0.5}) {
    const double predicted = predict_rates(alpha).theta;
    const RateFit coarse = fit_theta(lab.dip_scan(alpha, 2048), 10.0, 100.0);
    const RateFit fine = fit_theta(lab.dip_scan(alpha, 4096), 10.0, 100.0);
    c.note("alpha=" + fmt(alpha) + ": theta_fit=" + fmt(coarse.slope) + " (predicted " +
           fmt(predicted) + ", doubled-mesh " + fmt(fine.slope) + ")");
    c.require(std::abs(coarse.slope - predicted) <= 0.08,
              "alpha=" + fmt(alpha) + " |theta_fit - theta| = " +
                  fmt(std::abs(coarse.slope - predicted)) + " > 0.08");
    c.require(std::abs(coarse.slope - fine.slope) <= 0.05,
              "alpha=" + fmt(alpha) + " mesh-doubling drift " +
                  fmt(std::abs(coarse.slope - fine.slope)) + " > 0.05");
  }
  return {1, "resolvent exponent", c.ok, c.out.str()};
}

// Criterion 2: with theta fixed at the predicted value, min omega^theta
// sigma_min over the window is positive and stable within a factor 2 under
// mesh doubling.
CriterionResult criterion_lower_bound(Lab& lab) {
  Check c;
  for (double alpha : {0.0, 0.25, 0.5}) {
    const double predicted = predict_rates(alpha).theta;
    const double r1 = lower_bound_witness(lab.dip_scan(alpha, 2048), predicted, 10.0, 100.0);
    const double r2 = lower_bound_witness(lab.dip_scan(alpha, 4096), predicted, 10.0, 100.0);
    c.note("alpha=" + fmt(alpha) + ": r=" + fmt(r1) + " / " + fmt(r2));
    c.require(r1 > 0.0 && r2 > 0.0, "alpha=" + fmt(alpha) + " witness not positive");
    const double ratio = std::max(r1 / r2, r2 / r1);
    c.require(ratio < 2.0, "alpha=" + fmt(alpha) + " witness ratio " + fmt(ratio) + " >= 2");
  }
  return {2, "lower-bound witness", c.ok, c.out.str()};
}

// Criterion 3: damped spectra are dissipative with a positive axis gap; the
// undamped control reproduces +-i k pi/2 to 1e-3 relative for k <= n/10.
CriterionResult criterion_spectrum(Lab& lab) {
  Check c;
  for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
    for (int n : {64, 128}) {
      const SpectrumResult spec = compute_spectrum(lab.system(alpha, n));
      double max_abs = 0.0;
      for (const auto& ev : spec.eigenvalues) max_abs = std::max(max_abs, std::abs(ev));
      c.require(spec.abscissa <= 1e-10 * max_abs,
                "alpha=" + fmt(alpha) + " n=" + std::to_string(n) + " abscissa " +
                    fmt(spec.abscissa) + " above 1e-10*max|lambda|");
      c.require(spec.axis_gap > 0.0,
                "alpha=" + fmt(alpha) + " n=" + std::to_string(n) + " axis gap not positive");
    }
  }

  const int n_control = 512;
  SystemMatrices undamped = lab.system(0.0, n_control);
  undamped.damping = SymTridiagonal(undamped.n_dof);  // control case: D = 0
  const SpectrumResult spec = compute_spectrum(undamped);
  std::vector<double> upper;
  for (const auto& ev : spec.eigenvalues)
    if (ev.imag() > 0.0) upper.push_back(ev.imag());
  std::sort(upper.begin(), upper.end());
  double worst = 0.0;
  int worst_k = 0;
  for (int k = 1; k <= n_control / 10; ++k) {
    const double exact = k * std::numbers::pi / 2.0;
    const double rel = std::abs(upper[static_cast<std::size_t>(k - 1)] - exact) / exact;
    if (rel > worst) {
      worst = rel;
      worst_k = k;
    }
  }
  c.note("undamped control n=" + std::to_string(n_control) + ": max rel error " + fmt(worst) +
         " at k=" + std::to_string(worst_k) + " (k <= " + std::to_string(n_control / 10) + ")");
  c.require(worst <= 1e-3, "undamped eigenvalue error " + fmt(worst) + " > 1e-3");
  return {3, "dissipativity and axis gap", c.ok, c.out.str()};
}

// Criterion 4: fitted log-energy slopes for graph-normalized smooth data over
// t in [10, min(100, 0.5/|abscissa|)]. The abscissa shrinks monotonically
// under refinement (verified on dense-feasible meshes), which pins the
// window cap at 100 for n=2048.
CriterionResult criterion_energy_decay(Lab& lab) {
  Check c;
  double prev = 0.0;
  bool monotone = true;
  double last_margin = 0.0;
  for (int n : {64, 128, 256}) {
    const double a = std::abs(compute_spectrum(lab.system(0.0, n)).abscissa);
    if (n > 64 && a >= prev) monotone = false;
    prev = a;
    last_margin = 0.5 / a;
  }
  c.note("abscissa trend: 0.5/|a(256)| = " + fmt(last_margin));
  c.require(monotone && last_margin > 200.0,
            "cannot certify t_hi = 100 (abscissa trend broken or margin too small)");
  const double t_hi = 100.0;

  struct Case {
    double alpha;
    double bound;
  };
  for (const Case& cs : {Case{0.0, -3.5}, Case{0.5, -4.5}}) {
    const SystemMatrices& sys = lab.system(cs.alpha, 2048);
    const State u0 = make_initial_data(build_mesh(2048), sys, InitialDataKind::graph_normalized);
    const EnergyTrace trace = simulate(sys, u0, t_hi, 1e-3, 100);
    const LineFit fit = fit_decay_exponent(trace, 10.0, t_hi);
    c.note("alpha=" + fmt(cs.alpha) + ": slope=" + fmt(fit.slope) + " (bound " + fmt(cs.bound) +
           ")");
    c.require(fit.slope <= cs.bound, "alpha=" + fmt(cs.alpha) + " slope " + fmt(fit.slope) +
                                         " above " + fmt(cs.bound));
  }
  return {4, "energy decay consistency", c.ok, c.out.str()};
}

// Criterion 5: fast paths agree with their independent dense oracles.
CriterionResult criterion_oracles(Lab& lab) {
  Check c;

  // sigma_min vs dense weighted SVD at n_dof = 31.
  {
    const SystemMatrices& sys = lab.system(0.5, 32);
    double worst = 0.0;
    for (double omega : {0.3, 1.0, 2.4, 3.2, 7.7, 19.0}) {
      const double fast = sigma_min(sys, omega);
      const double dense = oracles::dense_sigma_min(sys, omega);
      worst = std::max(worst, std::abs(fast - dense) / dense);
    }
    c.note("sigma_min vs dense SVD: max rel " + fmt(worst));
    c.require(worst <= 1e-6, "sigma_min oracle disagreement " + fmt(worst) + " > 1e-6");
  }

  // implicit midpoint vs matrix exponential at n_elements = 8, t = 1.
  {
    const SystemMatrices& sys = lab.system(0.5, 8);
    const Mesh mesh = build_mesh(8);
    const State u0 = make_initial_data(mesh, sys, InitialDataKind::sine_displacement);
    const double dt = 1e-4;
    MidpointStepper stepper(sys, dt);
    State state = u0;
    for (int k = 0; k < 10000; ++k) state = stepper.step(state);
    const Eigen::MatrixXd prop = oracles::expm_propagator(sys, 1.0);
    const State exact = oracles::unpack_state(prop * oracles::pack_state(u0));
    State diff;
    diff.u.resize(sys.n_dof);
    diff.v.resize(sys.n_dof);
    for (std::size_t i = 0; i < sys.n_dof; ++i) {
      diff.u[i] = state.u[i] - exact.u[i];
      diff.v[i] = state.v[i] - exact.v[i];
    }
    const double err = std::sqrt(energy(sys, diff) / energy(sys, u0));
    c.note("midpoint vs expm at t=1: rel " + fmt(err));
    c.require(err <= 1e-6, "trajectory error " + fmt(err) + " > 1e-6");
  }

  // exact damping assembly vs adaptive quadrature.
  {
    double worst = 0.0;
    for (double alpha : {0.0, 0.25, 0.5, 0.9}) {
      for (int n : {8, 64}) {
        const Mesh mesh = build_mesh(n);
        const SystemMatrices sys = assemble(mesh, DampingProfile(alpha));
        const SymTridiagonal ref = oracles::adaptive_damping_matrix(mesh, DampingProfile(alpha));
        double num = 0.0;
        for (std::size_t i = 0; i < sys.n_dof; ++i)
          num = std::max(num, std::abs(sys.damping.diag[i] - ref.diag[i]));
        for (std::size_t i = 0; i + 1 < sys.n_dof; ++i)
          num = std::max(num, std::abs(sys.damping.off[i] - ref.off[i]));
        worst = std::max(worst, num / ref.inf_norm());
      }
    }
    c.note("assembled D vs adaptive quadrature: max rel " + fmt(worst));
    c.require(worst <= 1e-10, "damping assembly error " + fmt(worst) + " > 1e-10");
  }
  return {5, "oracle equivalence", c.ok, c.out.str()};
}

// Criterion 6: Hardy ratios stay bounded under 8x refinement on the default
// grid; the excluded exponent beta = -1 demonstrably diverges.
CriterionResult criterion_hardy(Lab& lab) {
  Check c;
  const std::vector<double> alphas{-1.0, 0.0, 0.5, 0.9};
  const std::vector<double> betas{-0.5, 0.0, 1.0, 2.0};
  const auto cases = hardy_sweep(alphas, betas, 200, 0, lab.threads);
  double worst_growth = 0.0;
  for (const auto& hc : cases) {
    if (hc.ratio_coarse == 0.0) {
      c.require(hc.ratio_fine == 0.0, "alpha=" + fmt(hc.alpha) + " beta=" + fmt(hc.beta) +
                                          " ratio appeared under refinement");
      continue;
    }
    const double growth = hc.ratio_fine / hc.ratio_coarse;
    worst_growth = std::max(worst_growth, growth);
    c.require(growth < 1.5, "alpha=" + fmt(hc.alpha) + " beta=" + fmt(hc.beta) +
                                " ratio grew by " + fmt(growth) + "x under refinement");
  }
  c.note("max refinement growth " + fmt(worst_growth) + "x over " +
         std::to_string(cases.size()) + " pairs");

  // beta = -1 divergence probe with xi = 1 - x.
  PiecewiseLinear xi;
  xi.nodes = {0.0, 1.0};
  xi.values = {1.0, 0.0};
  double previous = 0.0;
  bool increasing = true;
  double first = 0.0, last = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
    const double r = hardy_ratio_truncated(xi, 0.0, -1.0, eps);
    if (eps == 1e-2)
      first = r;
    else if (r <= previous)
      increasing = false;
    previous = r;
    last = r;
  }
  c.note("beta=-1 truncated ratio grows " + fmt(first) + " -> " + fmt(last));
  c.require(increasing && last > 5.0 * first, "beta=-1 ratio failed to diverge");
  return {6, "Hardy inequality", c.ok, c.out.str()};
}

// Criterion 7: no trace ever gains energy beyond 1e-12 * E(0), for time steps
// across four orders of magnitude.
CriterionResult criterion_monotonicity(Lab& lab) {
  Check c;
  for (double alpha : {0.0, 0.5}) {
    const SystemMatrices& sys = lab.system(alpha, 128);
    const Mesh mesh = build_mesh(128);
    for (InitialDataKind kind :
         {InitialDataKind::sine_displacement, InitialDataKind::bump_velocity}) {
      const State u0 = make_initial_data(mesh, sys, kind);
      for (double dt : {1e-4, 1e-2, 1.0}) {
        const double t_final = dt == 1e-4 ? 0.5 : (dt == 1e-2 ? 20.0 : 500.0);
        const EnergyTrace trace = simulate(sys, u0, t_final, dt, 1);
        const double slack = 1e-12 * trace.energies.front();
        bool monotone = true;
        for (std::size_t i = 1; i < trace.energies.size(); ++i)
          if (trace.energies[i] > trace.energies[i - 1] + slack) monotone = false;
        c.require(monotone, "alpha=" + fmt(alpha) + " dt=" + fmt(dt) + " energy increased");
      }
    }
  }
  if (c.ok) c.note("all traces nonincreasing for dt in {1e-4, 1e-2, 1}");
  return {7, "energy monotonicity", c.ok, c.out.str()};
}

// Criterion 8: the comparison table carries the right orders: 2 at alpha=0,
// (2-alpha)/(1-alpha) on (0,1), with the previous order strictly smaller.
CriterionResult criterion_table(Lab&) {
  Check c;
  const std::vector<double> alphas{0.0, 0.5};
  const auto rows = build_comparison_table(alphas);
  c.require(rows.size() == 2, "table row count");
  c.require(std::abs(rows[0].decay_order - 2.0) <= 1e-14, "alpha=0 decay order is not 2");
  c.require(std::abs(rows[0].prior_order - 1.5) <= 1e-14, "alpha=0 prior order is not 1.5");
  c.require(std::abs(rows[1].decay_order - 3.0) <= 1e-14, "alpha=0.5 decay order is not 3");
  c.require(std::abs(rows[1].prior_order - 2.5) <= 1e-14, "alpha=0.5 prior order is not 2.5");
  for (const auto& row : rows) {
    c.require(row.prior_order < row.decay_order, "prior order not strictly smaller");
    const double expected = (2.0 - row.alpha) / (1.0 - row.alpha);
    c.require(std::abs(row.decay_order - expected) <= 1e-14, "decay order formula mismatch");
  }
  if (c.ok) c.note("orders 2 and 3 with priors 1.5 and 2.5");
  return {8, "conclusion-table reproduction", c.ok, c.out.str()};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log) {
  Lab lab{options.threads, {}, {}};
  using Fn = std::function<CriterionResult(Lab&)>;
  const std::vector<Fn> criteria{
      criterion_resolvent_exponent, criterion_lower_bound, criterion_spectrum,
      criterion_energy_decay,       criterion_oracles,     criterion_hardy,
      criterion_monotonicity,       criterion_table};

  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int index = static_cast<int>(i) + 1;
    if (options.criterion != 0 && options.criterion != index) continue;
    if (options.quick && index != 5) continue;
    CriterionResult r = criteria[i](lab);
    log << "CRITERION " << r.index << " " << (r.passed ? "PASS" : "FAIL") << " - " << r.name
        << ": " << r.details << "\n";
    log.flush();
    results.push_back(std::move(r));
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return !results.empty();
}

}  // namespace kvstring
