// Command line front end: figures of merit of the continuous
// maximum-likelihood polarimeter, optimality-condition verification, and
// CSV data for the standard comparison plots against the adaptive greedy
// scheme.
//
// Exit status: 0 success, 1 usage error, 2 verification failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "polarimetry/bloch.hpp"
#include "polarimetry/fockspace.hpp"
#include "polarimetry/greedy.hpp"
#include "polarimetry/ml_povm.hpp"
#include "polarimetry/photon_stats.hpp"
#include "polarimetry/rng.hpp"

namespace {

using namespace polarimetry;

constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;

// Stream identifiers for deriving per-column Monte Carlo seeds.
enum SeedColumn : std::uint64_t { kSeedFock = 1, kSeedPoisson = 2, kSeedThermal = 3 };

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

struct Sweep {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> points() const {
    std::vector<double> pts;
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) pts.push_back(start + i * step);
    return pts;
  }
};

Sweep parse_sweep(const std::string& spec) {
  Sweep s;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &s.start, &s.stop, &s.step, &extra) != 3) {
    throw std::runtime_error("bad sweep spec '" + spec + "', expected start:stop:step");
  }
  if (!std::isfinite(s.start) || !std::isfinite(s.stop) || !std::isfinite(s.step) ||
      s.step <= 0.0 || s.stop < s.start || s.start < 0.0) {
    throw std::runtime_error("bad sweep spec '" + spec + "': need 0 <= start <= stop, step > 0");
  }
  return s;
}

PhotonDistribution parse_distribution(const std::string& spec, double param) {
  if (spec == "fock") {
    if (!is_integer(param) || param < 0) {
      throw std::runtime_error("fock distribution needs an integer --param >= 0");
    }
    return PhotonDistribution::fock(static_cast<int>(std::llround(param)));
  }
  if (spec == "poisson") return PhotonDistribution::poisson(param);
  if (spec == "thermal") return PhotonDistribution::thermal(param);
  if (spec.rfind("custom:", 0) == 0) {
    return PhotonDistribution::custom_from_file(spec.substr(7));
  }
  throw std::runtime_error("unknown distribution '" + spec +
                           "', expected fock|poisson|thermal|custom:<path>");
}

// Output sink: a file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct CommonOptions {
  std::string out = "-";
  std::uint64_t seed = 1;
  int trials = 10000;
  int threads = 0;
  double epsilon = 0.2 * std::numbers::pi;
  std::string sweep = "0:30:0.5";
};

int cmd_likelihood(const CommonOptions& opt, const std::string& sweep_spec, int u_steps) {
  if (u_steps < 1) throw std::runtime_error("--u-steps must be >= 1");
  const Sweep sweep = parse_sweep(sweep_spec);
  Output output(opt.out);
  std::ostream& os = output.stream();
  os << "# command=likelihood sweep=" << sweep_spec << " u_steps=" << u_steps
     << " seed=" << opt.seed << "\n";
  os << "nbar,fidelity_u,likelihood\n";
  for (double nbar : sweep.points()) {
    const LikelihoodModel model(PhotonDistribution::poisson(nbar));
    for (int k = 0; k <= u_steps; ++k) {
      const double u = static_cast<double>(k) / u_steps;
      os << fmt(nbar) << ',' << fmt(u) << ',' << fmt(model.likelihood_at(u)) << "\n";
    }
  }
  return 0;
}

// Shared driver for the figure commands: walks the sweep, evaluates the
// exact Fock/Poisson/thermal columns and, when trials > 0, the greedy Monte
// Carlo columns (Fock rows only at integer nbar).
template <typename ExactFn, typename GreedyFn>
int figure_command(const CommonOptions& opt, const char* name, const std::string& header,
                   const std::string& extra_config, ExactFn&& exact_columns,
                   GreedyFn&& greedy_columns) {
  const Sweep sweep = parse_sweep(opt.sweep);
  Output output(opt.out);
  std::ostream& os = output.stream();
  os << "# command=" << name << extra_config << " sweep=" << opt.sweep
     << " trials=" << opt.trials << " seed=" << opt.seed << "\n";
  os << header << "\n";

  const auto points = sweep.points();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double nbar = points[p];
    const bool fock_row = is_integer(nbar);
    const int fock_n = fock_row ? static_cast<int>(std::llround(nbar)) : -1;

    os << fmt(nbar);
    exact_columns(os, nbar, fock_row, fock_n);

    if (opt.trials > 0) {
      std::vector<double> fock_fid, poi_fid, th_fid;
      if (fock_row) {
        fock_fid = trial_fidelities(PhotonDistribution::fock(fock_n), opt.trials,
                                    derive_seed(opt.seed, kSeedFock, p), opt.threads);
      }
      poi_fid = trial_fidelities(PhotonDistribution::poisson(nbar), opt.trials,
                                 derive_seed(opt.seed, kSeedPoisson, p), opt.threads);
      th_fid = trial_fidelities(PhotonDistribution::thermal(nbar), opt.trials,
                                derive_seed(opt.seed, kSeedThermal, p), opt.threads);
      greedy_columns(os, fock_fid, poi_fid, th_fid);
    } else {
      greedy_columns(os, std::vector<double>{}, std::vector<double>{}, std::vector<double>{});
    }
    os << "\n";
  }
  return 0;
}

int cmd_fig2(const CommonOptions& opt) {
  const double eps = opt.epsilon;
  if (!(eps >= 0.0 && eps <= std::numbers::pi)) {
    throw std::runtime_error("--epsilon must lie in [0, pi]");
  }
  std::ostringstream extra;
  extra << " epsilon=" << fmt(eps);
  return figure_command(
      opt, "fig2", "nbar,Q_N,Q_Poi,Q_th,Q_N_g,Q_N_g_se,Q_Poi_g,Q_Poi_g_se,Q_th_g,Q_th_g_se",
      extra.str(),
      [&](std::ostream& os, double nbar, bool fock_row, int fock_n) {
        os << ',';
        if (fock_row) {
          os << fmt(LikelihoodModel(PhotonDistribution::fock(fock_n)).success_probability(eps));
        }
        os << ','
           << fmt(LikelihoodModel(PhotonDistribution::poisson(nbar)).success_probability(eps))
           << ','
           << fmt(LikelihoodModel(PhotonDistribution::thermal(nbar)).success_probability(eps));
      },
      [&](std::ostream& os, const std::vector<double>& fock_fid,
          const std::vector<double>& poi_fid, const std::vector<double>& th_fid) {
        for (const auto* fid : {&fock_fid, &poi_fid, &th_fid}) {
          if (fid->empty()) {
            os << ",,";
          } else {
            const McEstimate est = reduce_success(*fid, eps);
            os << ',' << fmt(est.value) << ',' << fmt(est.std_error);
          }
        }
      });
}

int cmd_fig3(const CommonOptions& opt) {
  return figure_command(
      opt, "fig3", "nbar,F_N,F_Poi,F_th,F_N_g,F_N_g_se,F_Poi_g,F_Poi_g_se,F_th_g,F_th_g_se",
      "",
      [&](std::ostream& os, double nbar, bool fock_row, int fock_n) {
        os << ',';
        if (fock_row) {
          os << fmt(LikelihoodModel(PhotonDistribution::fock(fock_n)).mean_fidelity());
        }
        os << ',' << fmt(LikelihoodModel(PhotonDistribution::poisson(nbar)).mean_fidelity())
           << ',' << fmt(LikelihoodModel(PhotonDistribution::thermal(nbar)).mean_fidelity());
      },
      [&](std::ostream& os, const std::vector<double>& fock_fid,
          const std::vector<double>& poi_fid, const std::vector<double>& th_fid) {
        for (const auto* fid : {&fock_fid, &poi_fid, &th_fid}) {
          if (fid->empty()) {
            os << ",,";
          } else {
            const McEstimate est = reduce_mean(*fid);
            os << ',' << fmt(est.value) << ',' << fmt(est.std_error);
          }
        }
      });
}

int cmd_fig4(const CommonOptions& opt) {
  return figure_command(
      opt, "fig4",
      "nbar,F_N,F_N_sd,F_Poi,F_Poi_sd,F_th,F_th_sd,"
      "F_N_g,F_N_g_sd,F_Poi_g,F_Poi_g_sd,F_th_g,F_th_g_sd",
      "",
      [&](std::ostream& os, double nbar, bool fock_row, int fock_n) {
        os << ',';
        if (fock_row) {
          const LikelihoodModel model(PhotonDistribution::fock(fock_n));
          os << fmt(model.mean_fidelity()) << ',' << fmt(std::sqrt(model.fidelity_variance()));
        } else {
          os << ',';
        }
        const LikelihoodModel poi(PhotonDistribution::poisson(nbar));
        const LikelihoodModel th(PhotonDistribution::thermal(nbar));
        os << ',' << fmt(poi.mean_fidelity()) << ',' << fmt(std::sqrt(poi.fidelity_variance()))
           << ',' << fmt(th.mean_fidelity()) << ',' << fmt(std::sqrt(th.fidelity_variance()));
      },
      [&](std::ostream& os, const std::vector<double>& fock_fid,
          const std::vector<double>& poi_fid, const std::vector<double>& th_fid) {
        // The upper band mean + sd may exceed 1; emitted uncapped, the
        // per-trial fidelities themselves never leave [0, 1].
        for (const auto* fid : {&fock_fid, &poi_fid, &th_fid}) {
          if (fid->empty()) {
            os << ",,";
          } else {
            os << ',' << fmt(reduce_mean(*fid).value) << ','
               << fmt(std::sqrt(reduce_variance(*fid).value));
          }
        }
      });
}

struct VerifyOptions {
  std::string dist_spec = "fock";
  double param = 1.0;
  int n_max = -1;  // -1: use the distribution's truncation index
  int samples = 20;
  int corrupt_block = -1;
  double corrupt_scale = 1.0;
};

int cmd_verify(const CommonOptions& opt, const VerifyOptions& vopt) {
  const PhotonDistribution dist = parse_distribution(vopt.dist_spec, vopt.param);
  const int n_max = vopt.n_max >= 0 ? vopt.n_max : dist.truncation_index();
  if (vopt.samples < 1) throw std::runtime_error("--samples must be >= 1");

  const SphereQuadrature quad = build_quadrature(2 * n_max + 2);
  PovmPerturbation pert;
  pert.block = vopt.corrupt_block;
  pert.scale = vopt.corrupt_scale;
  const MlConditionVerifier verifier(dist, n_max, quad, pert);

  // Draw all test points up front so the report does not depend on the
  // number of workers.
  std::vector<PolVec> points;
  points.reserve(vopt.samples);
  Rng rng(derive_seed(opt.seed, 0x7e57));
  for (int i = 0; i < vopt.samples; ++i) points.push_back(uniform_sample(rng));

  std::vector<MlConditionsReport> reports(vopt.samples);
  const int hw = std::thread::hardware_concurrency() == 0
                     ? 1
                     : static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min(opt.threads > 0 ? opt.threads : hw, vopt.samples));
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < vopt.samples; i += workers) reports[i] = verifier.verify(points[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  Output output(opt.out);
  std::ostream& os = output.stream();
  os << "# command=verify dist=" << vopt.dist_spec << " param=" << fmt(vopt.param)
     << " nmax=" << n_max << " samples=" << vopt.samples << " seed=" << opt.seed << "\n";
  int passed = 0;
  for (int i = 0; i < vopt.samples; ++i) {
    os << "r_index=" << i << " theta=" << fmt(points[i].theta())
       << " phi=" << fmt(points[i].phi()) << ' ' << reports[i].to_key_value() << "\n";
    if (reports[i].certified()) ++passed;
  }
  os << "summary certified=" << passed << "/" << vopt.samples << "\n";
  return passed == vopt.samples ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization estimation with the continuous maximum-likelihood POVM"};
  app.require_subcommand(1);

  CommonOptions opt;
  VerifyOptions vopt;
  std::string likelihood_sweep = "0:20:0.5";
  int u_steps = 50;

  auto add_common = [&](CLI::App* cmd, bool with_mc) {
    cmd->add_option("--out", opt.out, "Output path, or - for stdout");
    cmd->add_option("--seed", opt.seed, "Random seed; runs are reproducible from it");
    if (with_mc) {
      cmd->add_option("--trials", opt.trials,
                      "Monte Carlo trials per greedy column (0 skips greedy columns)");
      cmd->add_option("--threads", opt.threads,
                      "Worker threads (0 = hardware); never changes the output");
      cmd->add_option("--sweep", opt.sweep, "Mean photon number sweep start:stop:step");
    }
  };

  CLI::App* c_like = app.add_subcommand(
      "likelihood", "Outcome likelihood over a (nbar, fidelity) grid, Poisson statistics");
  add_common(c_like, false);
  c_like->add_option("--sweep", likelihood_sweep, "nbar sweep start:stop:step");
  c_like->add_option("--u-steps", u_steps, "Number of fidelity grid intervals on [0, 1]");

  CLI::App* c_fig2 = app.add_subcommand(
      "fig2", "Success probabilities vs mean photon number, exact and greedy");
  add_common(c_fig2, true);
  c_fig2->add_option("--epsilon", opt.epsilon, "Cap angular radius in radians");

  CLI::App* c_fig3 =
      app.add_subcommand("fig3", "Mean fidelities vs mean photon number, exact and greedy");
  add_common(c_fig3, true);

  CLI::App* c_fig4 = app.add_subcommand(
      "fig4", "Mean fidelities with standard deviations, exact and greedy");
  add_common(c_fig4, true);

  CLI::App* c_verify = app.add_subcommand(
      "verify", "Certify the estimator optimality conditions for a distribution");
  add_common(c_verify, false);
  c_verify->add_option("--dist", vopt.dist_spec, "fock|poisson|thermal|custom:<path>");
  c_verify->add_option("--param", vopt.param, "Distribution parameter (N or nbar)");
  c_verify->add_option("--nmax", vopt.n_max, "Truncation index (default: from the tail)");
  c_verify->add_option("--samples", vopt.samples, "Number of random test polarizations");
  c_verify->add_option("--threads", opt.threads, "Worker threads (0 = hardware)");
  c_verify->add_option("--corrupt-block", vopt.corrupt_block, "Corrupt this POVM block")
      ->group("");
  c_verify->add_option("--corrupt-scale", vopt.corrupt_scale, "Corruption factor")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_like->parsed()) return cmd_likelihood(opt, likelihood_sweep, u_steps);
    if (c_fig2->parsed()) return cmd_fig2(opt);
    if (c_fig3->parsed()) return cmd_fig3(opt);
    if (c_fig4->parsed()) return cmd_fig4(opt);
    if (c_verify->parsed()) return cmd_verify(opt, vopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
