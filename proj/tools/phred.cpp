// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: generate | reduce | compare | eval.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>
#include "CLI11.hpp"
#include "phred/bench.hpp"
#include "phred/freq.hpp"
#include "phred/init.hpp"
#include "phred/io.hpp"
#include "phred/msd.hpp"
#include "phred/parallel.hpp"
#include "phred/reduce.hpp"

namespace fs = std::filesystem;
using namespace phred;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

class UsageError : public Error
{
public:
  using Error::Error;
};

struct RunConfig
{
  // generate
  MSDConfig msd;
  // reduce / compare / eval
  std::string system_dir;
  std::string out;
  Eigen::Index r = 8;
  std::string r_list = "4:20:2";
  double gamma_max = 0.5;
  double tau_b = 0.1;
  double omega_lo = 1e-8;
  double omega_hi = 1e5;
  std::size_t n_grid = 2000;
  std::size_t fixed_samples = 0;  // 0: adaptive sampling
  std::size_t max_samples = 100000;
  int max_bisect = 30;
  int max_iters = 2000;
  std::size_t n_verify = 100000;
  int repeats = 3;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware count
  std::string against;
  bool entries = false;
  bool quiet = false;
};

void RequirePositive(double v, const char *name)
{
  if (!(v > 0.0))
  {
    throw UsageError(std::string(name) + " must be positive");
  }
}

void ValidateCommon(const RunConfig &cfg)
{
  RequirePositive(cfg.gamma_max, "--gamma-max");
  RequirePositive(cfg.tau_b, "--tau-b");
  RequirePositive(cfg.omega_lo, "--omega-lo");
  if (!(cfg.omega_hi > cfg.omega_lo))
  {
    throw UsageError("--omega-hi must exceed --omega-lo");
  }
  if (cfg.n_grid < 2 || cfg.n_verify < 2)
  {
    throw UsageError("grid sizes must be at least 2");
  }
  if (cfg.max_bisect < 1 || cfg.max_iters < 1 || cfg.repeats < 1)
  {
    throw UsageError("--max-bisect, --max-iters and --repeats must be positive");
  }
}

std::vector<Eigen::Index> ParseRList(const std::string &spec)
{
  // "a:b:step", "a,b,c" or a single value.
  std::vector<Eigen::Index> out;
  try
  {
    if (spec.find(':') != std::string::npos)
    {
      std::vector<long> parts;
      std::stringstream ss(spec);
      std::string tok;
      while (std::getline(ss, tok, ':'))
      {
        parts.push_back(std::stol(tok));
      }
      if (parts.size() < 2 || parts.size() > 3)
      {
        throw UsageError("bad --r range '" + spec + "'");
      }
      const long step = parts.size() == 3 ? parts[2] : 2;
      if (step <= 0)
      {
        throw UsageError("--r range step must be positive");
      }
      for (long r = parts[0]; r <= parts[1]; r += step)
      {
        out.push_back(r);
      }
    }
    else
    {
      std::stringstream ss(spec);
      std::string tok;
      while (std::getline(ss, tok, ','))
      {
        out.push_back(std::stol(tok));
      }
    }
  }
  catch (const std::invalid_argument &)
  {
    throw UsageError("bad --r value '" + spec + "'");
  }
  if (out.empty())
  {
    throw UsageError("empty --r list");
  }
  for (auto r : out)
  {
    if (r < 2 || r % 2 != 0)
    {
      throw UsageError("reduced order r must be even and >= 2, got " + std::to_string(r));
    }
  }
  return out;
}

ReduceOptions MakeReduceOptions(const RunConfig &cfg)
{
  ReduceOptions opt;
  opt.gamma_max = cfg.gamma_max;
  opt.tau_b = cfg.tau_b;
  opt.max_bisect = cfg.max_bisect;
  opt.adaptive = cfg.fixed_samples == 0;
  opt.adapt.max_samples = cfg.max_samples;
  opt.bfgs.max_iters = cfg.max_iters;
  if (!cfg.quiet)
  {
    opt.on_level = [](const LevelRecord &rec) {
      std::fprintf(stderr, "gamma=%-12.6g samples=%-6zu loss=%-11.4g iters=%-5d %.2fs\n",
                   rec.gamma, rec.n_samples, rec.loss, rec.opt_iters, rec.seconds);
    };
  }
  return opt;
}

PHSystem LoadOrGenerate(const RunConfig &cfg)
{
  if (!cfg.system_dir.empty())
  {
    return io::ReadSystem(cfg.system_dir);
  }
  return MassSpringDamperChain(cfg.msd);
}

int CmdGenerate(const RunConfig &cfg)
{
  if (cfg.out.empty())
  {
    throw UsageError("generate: --out is required");
  }
  io::WriteSystem(cfg.out, MassSpringDamperChain(cfg.msd));
  return kExitOk;
}

int CmdReduce(const RunConfig &cfg)
{
  ValidateCommon(cfg);
  if (cfg.r < 2 || cfg.r % 2 != 0)
  {
    throw UsageError("--r must be even and >= 2, got " + std::to_string(cfg.r));
  }
  if (cfg.system_dir.empty() || cfg.out.empty())
  {
    throw UsageError("reduce: --system and --out are required");
  }
  const PHSystem fom = io::ReadSystem(cfg.system_dir);
  if (cfg.r > fom.n())
  {
    throw UsageError("--r exceeds the state dimension of the system");
  }
  auto response = std::make_shared<FomResponse>(fom);
  InitOptions init_opts{cfg.omega_lo, cfg.omega_hi, cfg.n_grid};
  const InitResult init = GreedyInit(fom, response, cfg.r, init_opts);
  const SampleSet samples0 =
    cfg.fixed_samples == 0 ? InitialAdaptiveSamples(cfg.omega_lo, cfg.omega_hi, init.points)
                           : SampleSet(LogSpace(cfg.omega_lo, cfg.omega_hi, cfg.fixed_samples));
  ReduceOptions opt = MakeReduceOptions(cfg);
  opt.keep_levels = true;
  const ReductionReport report = Reduce(response, ThetaFromInit(init.rom), samples0, opt);
  io::WriteRunArtifacts(cfg.out, response, report, {cfg.omega_lo, cfg.omega_hi, cfg.n_grid});
  if (!cfg.quiet)
  {
    std::fprintf(stderr, "final gamma %.6g with %zu samples\n", report.final_gamma,
                 report.samples.size());
  }
  if (report.aborted)
  {
    std::fprintf(stderr, "aborted: %s\n", report.abort_reason.c_str());
    return kExitAbort;
  }
  return kExitOk;
}

int CmdCompare(const RunConfig &cfg)
{
  ValidateCommon(cfg);
  if (cfg.out.empty())
  {
    throw UsageError("compare: --out is required");
  }
  const auto r_list = ParseRList(cfg.r_list);
  const PHSystem fom = LoadOrGenerate(cfg);
  ComparisonProtocol protocol;
  protocol.omega_lo = cfg.omega_lo;
  protocol.omega_hi = cfg.omega_hi;
  protocol.n_fixed = cfg.fixed_samples == 0 ? 800 : cfg.fixed_samples;
  protocol.n_verify = cfg.n_verify;
  protocol.timing_repeats = cfg.repeats;
  protocol.init = {cfg.omega_lo, cfg.omega_hi, cfg.n_grid};
  protocol.reduce = MakeReduceOptions(cfg);
  protocol.reduce.on_level = nullptr;

  const fs::path out(cfg.out);
  fs::create_directories(out);
  auto response = std::make_shared<FomResponse>(fom);
  bool aborted = false;
  const auto result = RunComparison(fom, r_list, protocol, [&](const ComparisonRun &run) {
    const fs::path dir = out / "runs" / std::to_string(run.row.r);
    const io::ArtifactGrid grid{cfg.omega_lo, cfg.omega_hi, cfg.n_grid};
    io::WriteRunArtifacts(dir / "adaptive", response, run.adaptive, grid);
    io::WriteRunArtifacts(dir / "fixed", response, run.fixed, grid);
    aborted = aborted || run.adaptive.aborted || run.fixed.aborted;
    if (!cfg.quiet)
    {
      const auto &row = run.row;
      std::fprintf(stderr,
                   "r=%-3ld fixed %.3fs adaptive %.3fs ratio %.2f samples %zu "
                   "hinf adaptive %.4g fixed %.4g\n",
                   static_cast<long>(row.r), row.seconds_fixed, row.seconds_adaptive, row.ratio,
                   row.n_samples_final, row.hinf_adaptive, row.hinf_fixed);
    }
  });
  io::WriteComparisonCsv(out / "comparison.csv", result);
  if (io::ReadCsvHeader(out / "comparison.csv").size() != 7)
  {
    throw io::IoError("comparison.csv failed schema check");
  }
  return aborted ? kExitAbort : kExitOk;
}

int CmdEval(const RunConfig &cfg)
{
  ValidateCommon(cfg);
  if (cfg.system_dir.empty() || cfg.out.empty())
  {
    throw UsageError("eval: --system and --out are required");
  }
  auto response = std::make_shared<FomResponse>(io::ReadSystem(cfg.system_dir));
  std::optional<ErrorFunction> error;
  if (!cfg.against.empty())
  {
    error.emplace(response, io::ReadSystem(cfg.against));
  }
  const auto omegas = LogSpace(cfg.omega_lo, cfg.omega_hi, cfg.n_grid);
  response->Prefetch(omegas);
  std::vector<Eigen::MatrixXcd> values;
  values.reserve(omegas.size());
  for (double w : omegas)
  {
    values.push_back(error ? error->ErrorMatrix(w) : (*response)(w));
  }
  io::WriteResponseCsv(cfg.out, omegas, values, cfg.entries);
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Structure-preserving model reduction of port-Hamiltonian systems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (flags override)");
  RunConfig cfg;
  app.add_option("--threads", cfg.threads, "worker threads (default: $PHRED_THREADS or all)");
  app.add_flag("--quiet", cfg.quiet, "suppress progress output");

  auto add_grid = [&](CLI::App *cmd) {
    cmd->add_option("--omega-lo", cfg.omega_lo, "lowest frequency");
    cmd->add_option("--omega-hi", cfg.omega_hi, "highest frequency");
    cmd->add_option("--n-grid", cfg.n_grid, "points of the log grids for init and dumps");
  };
  auto add_msd = [&](CLI::App *cmd) {
    cmd->add_option("--masses", cfg.msd.n_masses, "number of masses (n = 2 * masses)");
    cmd->add_option("--inputs", cfg.msd.m_inputs, "inputs/outputs on the first masses");
    cmd->add_option("--mass", cfg.msd.mass, "mass per cell");
    cmd->add_option("--stiffness", cfg.msd.stiffness, "spring stiffness per cell");
    cmd->add_option("--damping", cfg.msd.damping, "damping per cell");
  };
  auto add_reduce = [&](CLI::App *cmd) {
    cmd->add_option("--gamma-max", cfg.gamma_max, "initial upper level");
    cmd->add_option("--tau-b", cfg.tau_b, "relative bisection tolerance");
    cmd->add_option("--fixed-samples", cfg.fixed_samples,
                    "use this many fixed log-spaced samples instead of adaptive sampling");
    cmd->add_option("--max-samples", cfg.max_samples, "growth cap of the adaptive sample set");
    cmd->add_option("--max-bisect", cfg.max_bisect, "cap on bisection iterations");
    cmd->add_option("--max-iters", cfg.max_iters, "BFGS iteration cap per level");
    cmd->add_option("--seed", cfg.seed, "random seed");
    add_grid(cmd);
  };

  auto *gen = app.add_subcommand("generate", "write the mass-spring-damper benchmark system");
  add_msd(gen);
  gen->add_option("--out", cfg.out, "output system directory")->required();

  auto *red = app.add_subcommand("reduce", "reduce a stored system");
  red->add_option("--system", cfg.system_dir, "system directory")->required();
  red->add_option("--r", cfg.r, "reduced order (even)");
  red->add_option("--out", cfg.out, "output run directory")->required();
  add_reduce(red);

  auto *cmp = app.add_subcommand("compare", "adaptive vs fixed sampling over several orders");
  cmp->add_option("--system", cfg.system_dir, "system directory (default: generated benchmark)");
  cmp->add_option("--r", cfg.r_list, "orders: a:b:step or a,b,c");
  cmp->add_option("--repeats", cfg.repeats, "timing repeats (median)");
  cmp->add_option("--n-verify", cfg.n_verify, "verification grid size");
  cmp->add_option("--out", cfg.out, "output directory")->required();
  add_reduce(cmp);
  add_msd(cmp);

  auto *ev = app.add_subcommand("eval", "dump the frequency response of a stored system");
  ev->add_option("--system", cfg.system_dir, "system directory")->required();
  ev->add_option("--against", cfg.against, "second system; dump the error instead");
  ev->add_option("--out", cfg.out, "output CSV")->required();
  ev->add_flag("--entries", cfg.entries, "include re_ij,im_ij columns");
  add_grid(ev);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cfg.threads > 0)
  {
    SetNumThreads(cfg.threads);
  }
  else if (!std::getenv("PHRED_THREADS"))
  {
    SetNumThreads(HardwareThreads());
  }

  try
  {
    if (*gen)
    {
      return CmdGenerate(cfg);
    }
    if (*red)
    {
      return CmdReduce(cfg);
    }
    if (*cmp)
    {
      return CmdCompare(cfg);
    }
    return CmdEval(cfg);
  }
  catch (const UsageError &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  catch (const GrowthLimitError &e)
  {
    std::fprintf(stderr, "aborted: %s\n", e.what());
    return kExitAbort;
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
