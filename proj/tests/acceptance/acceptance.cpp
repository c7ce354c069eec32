// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures. The CLI path is the first argument (criterion 10).

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "collrabi/analysis.hpp"
#include "collrabi/broadening.hpp"
#include "collrabi/core_model.hpp"
#include "collrabi/datagen.hpp"
#include "collrabi/dynamics.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/units.hpp"

using namespace collrabi;
using units::angular_to_mhz;
using units::mhz_to_angular;

namespace {

// Tolerances and thresholds.
constexpr double kRabiDiscrepancyMax = 0.01;
constexpr double kChirpAsymptoteTol = 1e-3;
constexpr double kChirpDerivativeTol = 1e-6;
constexpr int kChirpSamples = 1000;
constexpr double kQuadratureTol = 1e-8;
constexpr int kQuadratureTimes = 500;
constexpr double kRecoveryTol = 0.02;
constexpr int kRecoverySeeds = 100;
constexpr double kSingleRecoveryRate = 0.95;
constexpr double kDoubleRecoveryRate = 0.90;
constexpr double kFittedChirpZero = 0.05;
constexpr double kPeriodTol = 1e-3;
constexpr double kVarianceRatioTol = 0.10;
constexpr int kStatSeeds = 200;
constexpr int kContextSeeds = 1000;
constexpr double kPullMeanMax = 0.2;
constexpr double kPullVarLo = 0.5;
constexpr double kPullVarHi = 2.0;

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

FitModelSpec default_fit(const SynthSpec& s, FitKind kind) {
  FitModelSpec spec;
  spec.kind = kind;
  spec.fixed["alpha"] = s.model.params.at("alpha");
  return spec;
}

void criterion1() {
  const DriveParams d{mhz_to_angular(44.8), mhz_to_angular(23.4), mhz_to_angular(-2.7)};
  const double got = angular_to_mhz(effective_rabi(d));
  const long double exact = std::sqrt(44.8L * 44.8L + 23.4L * 23.4L);
  const double rel_exact = std::abs(got - static_cast<double>(exact)) / static_cast<double>(exact);
  const double discrepancy = std::abs(got - 50.9) / 50.9;
  const bool ok = rel_exact < 1e-14 && std::abs(got - 50.54) < 5e-3 && discrepancy < kRabiDiscrepancyMax;
  report(1, ok, "effective Rabi frequency",
         fmt("omega_n = 2pi x %.6f MHz (analytic %.6Lf), vs fitted 50.9: %.3f%%", got, exact, 100 * discrepancy));
}

void criterion2() {
  const double omega = mhz_to_angular(50.9);
  const double at0 = instantaneous_frequency(6.0, omega, 0.0);
  const double asym = instantaneous_frequency(5.0, omega, 1.0);
  const double asym_rel = std::abs(asym / (omega / std::numbers::sqrt2) - 1.0);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> c(0.0, 20.0), w(mhz_to_angular(10), mhz_to_angular(80)), t(1e-3, 0.4);
  double worst = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < kChirpSamples; ++i) {
    const double ci = c(gen), wi = w(gen), ti = t(gen);
    const double fd = (chirp_phase(ci, wi, ti + h) - chirp_phase(ci, wi, ti - h)) / (2 * h);
    worst = std::max(worst, std::abs(fd / instantaneous_frequency(ci, wi, ti) - 1.0));
  }
  const bool ok = at0 == omega && asym_rel < kChirpAsymptoteTol && worst < kChirpDerivativeTol;
  report(2, ok, "chirp asymptote and derivative",
         fmt("f(0)/omega = %.17g, |f(Ct=5)/(omega/sqrt2) - 1| = %.2e, worst FD rel err = %.2e over %d samples",
             at0 / omega, asym_rel, worst, kChirpSamples));
}

void criterion3() {
  double worst = 0.0;
  std::string where;
  std::vector<double> times(kQuadratureTimes);
  for (int i = 0; i < kQuadratureTimes; ++i) times[i] = 0.3 * i / (kQuadratureTimes - 1);
  for (double f : {41.4, 50.9, 68.4}) {
    for (double c : {0.0, 6.0, 12.0}) {
      for (double sigma : {0.5, 2.5, 5.0}) {
        const ChirpedOscParams p{8.0, c, 0.1, mhz_to_angular(f), 0.0};
        const BroadeningParams b{units::alpha_from_sigma(mhz_to_angular(sigma)), kDefaultHermiteNodes};
        for (double t : times) {
          const double err = std::abs(inhomogeneous_signal(p, b, t) - reference_integrate(p, b, t));
          if (err > worst) {
            worst = err;
            where = fmt("omega_n=%.1f MHz C=%.0f sigma=%.1f MHz t=%.4f", f, c, sigma, t);
          }
        }
      }
    }
  }
  report(3, worst < kQuadratureTol, "Hermite(40) vs adaptive Simpson",
         fmt("max |diff| = %.2e over 27 x %d points (at %s)", worst, kQuadratureTimes, where.c_str()));
}

// |c| error bound from peak times quantized to +-h/2: the c row of the OLS
// solution is a fixed linear combination of the peak times.
double curvature_bound(std::size_t n_peaks, double h) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n_peaks), 3);
  for (std::size_t k = 0; k < n_peaks; ++k) {
    const double o = static_cast<double>(k + 1);
    x.row(static_cast<Eigen::Index>(k)) << 1.0, o, o * o;
  }
  const Eigen::MatrixXd pinv = (x.transpose() * x).inverse() * x.transpose();
  return 0.5 * h * pinv.row(2).cwiseAbs().sum();
}

void criterion4() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig2b", "fig2c", "fig2d", "fig2e"}) {
    SynthSpec s = preset(name);
    const TimeTrace chirped = expected_trace(s);
    const PeakSet pc = find_peaks(chirped, 0, 1e-6);
    const double c_chirped = quadratic_peak_fit(pc).c;
    s.model.params["C"] = 0.0;
    const TimeTrace flat = expected_trace(s);
    const PeakSet pf = find_peaks(flat, 0, 1e-6);
    const double c_flat = quadratic_peak_fit(pf).c;
    const double bound = curvature_bound(pf.size(), flat.bin_width());
    // Counting-noise traces, counts smoothing.
    int noisy_positive = 0;
    s.model.params["C"] = preset(name).model.params.at("C");
    for (int seed = 1; seed <= 20; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      const TimeTrace tr = synth(s);
      const double range = *std::max_element(tr.counts.begin(), tr.counts.end()) -
                           *std::min_element(tr.counts.begin(), tr.counts.end());
      if (quadratic_peak_fit(find_peaks(tr, kCountsSmoothing, 0.05 * range)).c > 0) ++noisy_positive;
    }
    const bool this_ok = c_chirped > 0 && std::abs(c_flat) < bound && noisy_positive == 20;
    ok = ok && this_ok;
    detail += fmt("%s c(C=6)=%.2e c(C=0)=%.1e bound=%.1e noisy c>0 %d/20; ", name, c_chirped, c_flat, bound,
                  noisy_positive);
  }
  report(4, ok, "peak-time curvature", detail);
}

void criterion5() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig2b", "fig2c", "fig2d", "fig2e"}) {
    SynthSpec s = preset(name);
    const double truth = s.model.params.at("omega_n");
    int good = 0;
    for (int seed = 1; seed <= kRecoverySeeds; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      try {
        const FitResult r = multi_start_fit(synth(s), default_fit(s, FitKind::single), 1, 1);
        if (r.converged && std::abs(r.estimates.at("omega_n") / truth - 1.0) < kRecoveryTol) ++good;
      } catch (const Error&) {
      }
    }
    const double rate = static_cast<double>(good) / kRecoverySeeds;
    ok = ok && rate >= kSingleRecoveryRate;
    detail += fmt("%s %d/%d; ", name, good, kRecoverySeeds);
  }
  report(5, ok, "single-frequency round trip within 2%", detail);
}

void criterion6() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig4e", "fig4f"}) {
    SynthSpec s = preset(name);
    const double lo = s.model.params.at("omega_n1");
    const double hi = s.model.params.at("omega_n2");
    int good = 0;
    for (int seed = 1; seed <= kRecoverySeeds; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      try {
        const FitResult r = multi_start_fit(synth(s), default_fit(s, FitKind::two_component), 1, 1);
        const double a = r.estimates.at("omega_n1");
        const double b = r.estimates.at("omega_n2");
        if (r.converged && a < b && std::abs(a / lo - 1) < kRecoveryTol && std::abs(b / hi - 1) < kRecoveryTol) ++good;
      } catch (const Error&) {
      }
    }
    ok = ok && static_cast<double>(good) / kRecoverySeeds >= kDoubleRecoveryRate;
    detail += fmt("%s %d/%d; ", name, good, kRecoverySeeds);
  }
  report(6, ok, "two-frequency round trip within 2%, ascending", detail);
}

FitResult fit_mechanistic(const StateTrajectory& traj, std::size_t stride) {
  const TimeTrace full = traj.intensity_trace();
  std::vector<double> t, y;
  for (std::size_t i = 0; i < full.size(); i += stride) {
    t.push_back(full.times[i]);
    y.push_back(full.counts[i]);
  }
  const TimeTrace binned = make_trace(t, y);
  FitModelSpec spec;
  spec.weighting = Weighting::data;
  spec.fixed["alpha"] = 1e6;
  spec.bounds["t0"] = {binned.times.front(), binned.times.back()};
  return fit(binned, spec, initialize(binned, spec));
}

void criterion7() {
  DynamicsConfig cfg = default_dynamics_config();
  const auto stride = static_cast<std::size_t>(std::lround(0.002 / cfg.dt));
  const StateTrajectory decaying = evolve(cfg);
  const TimeTrace tr = decaying.intensity_trace();
  const auto peaks = refined_peak_times(tr, find_peaks(tr, 0, 1e-9));
  bool increasing = peaks.size() >= 5;
  for (std::size_t k = 2; k < peaks.size(); ++k) {
    increasing = increasing && (peaks[k] - peaks[k - 1] > peaks[k - 1] - peaks[k - 2]);
  }
  const FitResult with_decay = fit_mechanistic(decaying, stride);

  cfg.gamma_loss = cfg.gamma_conv = cfg.gamma_e = 0.0;
  const StateTrajectory steady = evolve(cfg);
  const FitResult without = fit_mechanistic(steady, stride);
  const double period = estimate_period(steady.intensity_trace(), 1e-9);
  const double analytic = units::kTwoPi / cfg.s0.omega;
  const double period_rel = std::abs(period / analytic - 1.0);

  const bool ok = increasing && with_decay.converged && with_decay.estimates.at("C") > 0 && without.converged &&
                  std::abs(without.estimates.at("C")) < kFittedChirpZero && period_rel < kPeriodTol;
  report(7, ok, "mechanistic chirp emergence",
         fmt("%zu peaks, spacings strictly increasing: %s (%.2f -> %.2f ns); fitted C = %.3f /us with decay, "
             "%.2e /us without; period %.6f ns vs %.6f ns (%.1e)",
             peaks.size(), increasing ? "yes" : "no", 1e3 * (peaks[1] - peaks[0]),
             1e3 * (peaks.back() - peaks[peaks.size() - 2]), with_decay.estimates.at("C"),
             without.estimates.at("C"), 1e3 * period, 1e3 * analytic, period_rel));
}

void criterion8() {
  const SynthSpec s = preset("fig2e");
  const ChirpedOscParams p{s.model.params.at("beta"), s.model.params.at("C"), s.model.params.at("t0"),
                           s.model.params.at("omega_n"), 0.0};
  std::vector<double> times(3001);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 0.3 * static_cast<double>(i) / 3000.0;
  std::vector<double> vis;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    const BroadeningParams b{units::alpha_from_sigma(mhz_to_angular(sigma)), kDefaultHermiteNodes};
    std::vector<double> y(times.size());
    broadened_signal_reference(p, b, times, y);
    vis.push_back(visibility(times, y, 0.0, 0.3));
  }
  const bool ok = vis[0] > vis[1] && vis[1] > vis[2] && vis[2] > vis[3];
  report(8, ok, "visibility falls with broadening",
         fmt("sigma 0.5/1/2/4 MHz -> %.4f %.4f %.4f %.4f", vis[0], vis[1], vis[2], vis[3]));
}

struct PullStats {
  std::vector<double> pulls;
  double mean = 0.0;
  double var = 0.0;
};

// (estimate - truth) / std_error of omega_n on fig2e traces.
PullStats pull_stats(int first_seed, int n_seeds) {
  SynthSpec e = preset("fig2e");
  const double truth = e.model.params.at("omega_n");
  PullStats out;
  for (int k = 0; k < n_seeds; ++k) {
    e.seed = static_cast<std::uint64_t>(first_seed + k);
    try {
      const FitResult r = multi_start_fit(synth(e), default_fit(e, FitKind::single), 1, 1);
      if (r.converged && r.std_errors.at("omega_n") > 0) {
        out.pulls.push_back((r.estimates.at("omega_n") - truth) / r.std_errors.at("omega_n"));
      }
    } catch (const Error&) {
    }
  }
  for (double v : out.pulls) out.mean += v;
  out.mean /= static_cast<double>(out.pulls.size());
  for (double v : out.pulls) out.var += (v - out.mean) * (v - out.mean);
  out.var /= static_cast<double>(out.pulls.size() - 1);
  return out;
}

void criterion9() {
  SynthSpec s = preset("fig2b");
  const std::size_t n = static_cast<std::size_t>(s.n_bins);
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  for (int k = 0; k < kStatSeeds; ++k) {
    s.seed = static_cast<std::uint64_t>(k + 1);
    const TimeTrace tr = synth(s);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += tr.counts[i];
      sq[i] += tr.counts[i] * tr.counts[i];
    }
  }
  double var_total = 0.0, mean_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / kStatSeeds;
    var_total += (sq[i] - kStatSeeds * mean * mean) / (kStatSeeds - 1);
    mean_total += mean;
  }
  const double ratio = var_total / mean_total;

  // Pulls on seeds 1000..1199 decide; seeds 1000..1999 are reported as context only.
  const PullStats block = pull_stats(1000, kStatSeeds);
  const PullStats wide = pull_stats(1000, kContextSeeds);
  const std::vector<double>& pulls = block.pulls;
  const double m = block.mean;
  const double var = block.var;
  const bool ok = std::abs(ratio - 1.0) < kVarianceRatioTol && pulls.size() == static_cast<std::size_t>(kStatSeeds) &&
                  std::abs(m) < kPullMeanMax && var >= kPullVarLo && var <= kPullVarHi;
  report(9, ok, "Poisson dispersion and fit pulls",
         fmt("variance/mean = %.4f over %d seeds; omega_n pulls n=%zu mean=%.3f var=%.3f "
             "(context, %zu seeds: mean=%.3f var=%.3f)",
             ratio, kStatSeeds, pulls.size(), m, var, wide.pulls.size(), wide.mean, wide.var));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion10(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "collrabi_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string trace = (dir / "input.csv").string();
  bool ok = std::system((cli + " synth --preset fig4f --seed 11 --out " + trace + " 2>/dev/null").c_str()) == 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --preset fig2b --plot svg"},
      {"simulate-dynamics", "simulate --model dynamics --plot data"},
      {"synth", "synth --preset fig2e --seed 42 --plot data"},
      {"fit", "fit " + trace + " --preset fig4f --set fit.n_starts=4 --plot svg"},
      {"peaks", "peaks " + trace + " --plot data"},
      {"compare", "compare --plot svg"},
  };
  std::string detail;
  for (const auto& [label, args] : commands) {
    bool same = true;
    std::string first, first_plot;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (label + std::to_string(run) + ".out");
      const int code = std::system((cli + " " + args + " --out " + out.string() + " 2>/dev/null").c_str());
      same = same && code == 0;
      const std::string body = slurp(out);
      std::string plot = slurp(out.string() + ".svg") + slurp(out.string() + ".plot.dat");
      if (run == 0) {
        first = body;
        first_plot = plot;
        same = same && !body.empty() && !plot.empty();
      } else {
        same = same && body == first && plot == first_plot;
      }
    }
    ok = ok && same;
    detail += label + (same ? " identical; " : " DIFFERENT; ");
  }
  fs::remove_all(dir);
  report(10, ok, "byte-identical CLI outputs across runs", detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-collrabi-cli>\n");
    return 2;
  }
  const std::vector<std::function<void()>> checks = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9,
                                                     [&] { criterion10(argv[1]); }};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, "unexpected exception", e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures;
}
