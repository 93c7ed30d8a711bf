// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_IO_HPP
#define PHRED_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include "json.hpp"
#include "phred/bench.hpp"
#include "phred/errors.hpp"
#include "phred/freq.hpp"
#include "phred/ph_system.hpp"
#include "phred/reduce.hpp"
#include "phred/sampling.hpp"

namespace phred::io
{

namespace fs = std::filesystem;

class IoError : public Error
{
public:
  using Error::Error;
};

// Shortest decimal text that reads back to the same double.
inline std::string FormatDouble(double x)
{
  char buf[32];
  for (int prec = 15; prec <= 17; prec++)
  {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x)
    {
      break;
    }
  }
  return buf;
}

namespace detail
{

inline std::ofstream OpenOut(const fs::path &path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

inline std::ifstream OpenIn(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ParseError("cannot open " + path.string());
  }
  return in;
}

inline std::string Lower(std::string s)
{
  for (auto &c : s)
  {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace detail

// Dense real matrix in Matrix Market array format (column-major values).
inline void WriteMatrixMarket(const fs::path &path, const Eigen::MatrixXd &M)
{
  auto out = detail::OpenOut(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index j = 0; j < M.cols(); j++)
  {
    for (Eigen::Index i = 0; i < M.rows(); i++)
    {
      out << FormatDouble(M(i, j)) << '\n';
    }
  }
  if (!out)
  {
    throw IoError("write failed: " + path.string());
  }
}

// Reads real Matrix Market files: array or coordinate; general, symmetric or skew-symmetric.
inline Eigen::MatrixXd ReadMatrixMarket(const fs::path &path)
{
  auto in = detail::OpenIn(path);
  const std::string name = path.filename().string();
  auto fail = [&](const std::string &why) -> ParseError {
    return ParseError(name + ": " + why);
  };
  std::string line;
  if (!std::getline(in, line))
  {
    throw fail("empty file");
  }
  std::istringstream header(detail::Lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix")
  {
    throw fail("missing %%MatrixMarket matrix header");
  }
  if (field != "real" && field != "integer")
  {
    throw fail("unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
  {
    throw fail("unsupported symmetry '" + symmetry + "'");
  }
  while (std::getline(in, line) && (line.empty() || line[0] == '%'))
  {
  }
  std::istringstream dims(line);
  long rows = -1, cols = -1, nnz = -1;
  dims >> rows >> cols;
  if (format == "coordinate")
  {
    dims >> nnz;
  }
  if (!dims || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0))
  {
    throw fail("bad size line");
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
  const double mirror = symmetry == "skew-symmetric" ? -1.0 : 1.0;
  if (format == "array")
  {
    for (long j = 0; j < cols; j++)
    {
      const long i0 = symmetry == "general" ? 0 : (symmetry == "symmetric" ? j : j + 1);
      for (long i = i0; i < rows; i++)
      {
        if (!(in >> M(i, j)))
        {
          throw fail("too few entries");
        }
        if (symmetry != "general" && i != j)
        {
          M(j, i) = mirror * M(i, j);
        }
      }
    }
  }
  else if (format == "coordinate")
  {
    for (long k = 0; k < nnz; k++)
    {
      long i, j;
      double v;
      if (!(in >> i >> j >> v))
      {
        throw fail("too few entries");
      }
      if (i < 1 || i > rows || j < 1 || j > cols)
      {
        throw fail("index out of range");
      }
      M(i - 1, j - 1) = v;
      if (symmetry != "general" && i != j)
      {
        M(j - 1, i - 1) = mirror * v;
      }
    }
  }
  else
  {
    throw fail("unsupported format '" + format + "'");
  }
  return M;
}

// Directory with J.mtx, R.mtx, Q.mtx, B.mtx and system.meta ("n=<int>", "m=<int>").
inline void WriteSystem(const fs::path &dir, const PHSystem &sys)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
  {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  WriteMatrixMarket(dir / "J.mtx", sys.J());
  WriteMatrixMarket(dir / "R.mtx", sys.R());
  WriteMatrixMarket(dir / "Q.mtx", sys.Q());
  WriteMatrixMarket(dir / "B.mtx", sys.B());
  auto meta = detail::OpenOut(dir / "system.meta");
  meta << "n=" << sys.n() << "\nm=" << sys.m() << '\n';
}

inline PHSystem ReadSystem(const fs::path &dir)
{
  if (!fs::is_directory(dir))
  {
    throw ParseError("system directory " + dir.string() + " does not exist");
  }
  std::map<std::string, long> meta;
  {
    auto in = detail::OpenIn(dir / "system.meta");
    std::string line;
    while (std::getline(in, line))
    {
      if (line.empty() || line[0] == '#')
      {
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
      {
        throw ParseError("system.meta: expected key=value, got '" + line + "'");
      }
      try
      {
        meta[line.substr(0, eq)] = std::stol(line.substr(eq + 1));
      }
      catch (const std::exception &)
      {
        throw ParseError("system.meta: bad integer in '" + line + "'");
      }
    }
  }
  if (!meta.contains("n") || !meta.contains("m"))
  {
    throw ParseError("system.meta: missing n or m");
  }
  const long n = meta["n"], m = meta["m"];
  Eigen::MatrixXd J = ReadMatrixMarket(dir / "J.mtx");
  Eigen::MatrixXd R = ReadMatrixMarket(dir / "R.mtx");
  Eigen::MatrixXd Q = ReadMatrixMarket(dir / "Q.mtx");
  Eigen::MatrixXd B = ReadMatrixMarket(dir / "B.mtx");
  auto check = [&](const Eigen::MatrixXd &M, long rows, long cols, const char *file) {
    if (M.rows() != rows || M.cols() != cols)
    {
      throw ParseError(std::string(file) + ": expected " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " matrix");
    }
  };
  check(J, n, n, "J.mtx");
  check(R, n, n, "R.mtx");
  check(Q, n, n, "Q.mtx");
  check(B, n, m, "B.mtx");
  return PHSystem(std::move(J), std::move(R), std::move(Q), std::move(B));
}

inline void WriteSamplesCsv(const fs::path &path, const SampleSet &samples)
{
  auto out = detail::OpenOut(path);
  out << "omega\n";
  for (double w : samples)
  {
    out << FormatDouble(w) << '\n';
  }
}

inline SampleSet ReadSamplesCsv(const fs::path &path)
{
  auto in = detail::OpenIn(path);
  std::string line;
  if (!std::getline(in, line) || line != "omega")
  {
    throw ParseError(path.filename().string() + ": expected header 'omega'");
  }
  std::vector<double> omegas;
  for (int row = 2; std::getline(in, line); row++)
  {
    if (line.empty())
    {
      continue;
    }
    std::size_t used = 0;
    try
    {
      omegas.push_back(std::stod(line, &used));
    }
    catch (const std::exception &)
    {
    }
    if (used != line.size())
    {
      throw ParseError(path.filename().string() + ": bad value on line " + std::to_string(row));
    }
  }
  return SampleSet(std::move(omegas));
}

//
// Frequency-response table: omega, sigma_max of the response (or error), and optionally the
// entries re_ij, im_ij (1-based, row-major column order).
//
inline void WriteResponseCsv(const fs::path &path, const std::vector<double> &omegas,
                             const std::vector<Eigen::MatrixXcd> &values, bool entries)
{
  auto out = detail::OpenOut(path);
  out << "omega,sigma_max";
  const Eigen::Index m = values.empty() ? 0 : values.front().rows();
  if (entries)
  {
    for (Eigen::Index i = 1; i <= m; i++)
    {
      for (Eigen::Index j = 1; j <= m; j++)
      {
        out << ",re_" << i << j << ",im_" << i << j;
      }
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < omegas.size(); k++)
  {
    out << FormatDouble(omegas[k]) << ',' << FormatDouble(SigmaMax(values[k]));
    if (entries)
    {
      for (Eigen::Index i = 0; i < m; i++)
      {
        for (Eigen::Index j = 0; j < m; j++)
        {
          out << ',' << FormatDouble(values[k](i, j).real()) << ','
              << FormatDouble(values[k](i, j).imag());
        }
      }
    }
    out << '\n';
  }
}

inline nlohmann::json ReportToJson(const ReductionReport &report)
{
  nlohmann::json j;
  j["iterations"] = nlohmann::json::array();
  for (const auto &rec : report.iterations)
  {
    j["iterations"].push_back({{"gamma", rec.gamma},
                               {"n_samples", rec.n_samples},
                               {"loss", rec.loss},
                               {"opt_iters", rec.opt_iters},
                               {"seconds", rec.seconds},
                               {"grad_norm", rec.grad_norm},
                               {"max_sample_error", rec.max_sample_error},
                               {"stagnated", rec.stagnated}});
  }
  j["final_gamma"] = report.final_gamma;
  j["sampled_hinf"] = report.sampled_hinf;
  j["selected_level"] = report.selected_level;
  j["n_samples_final"] = report.samples.size();
  j["theta_len"] = report.theta_opt ? report.theta_opt->size() : 0;
  j["aborted"] = report.aborted;
  if (report.aborted)
  {
    j["abort_reason"] = report.abort_reason;
  }
  return j;
}

// Throws IoError naming the first missing or mistyped field.
inline void ValidateReportJson(const nlohmann::json &j)
{
  auto require = [&](const nlohmann::json &obj, const char *key, bool number) {
    if (!obj.contains(key) || (number && !obj[key].is_number()))
    {
      throw IoError(std::string("report JSON: missing or non-numeric field '") + key + "'");
    }
  };
  if (!j.contains("iterations") || !j["iterations"].is_array())
  {
    throw IoError("report JSON: missing array 'iterations'");
  }
  for (const auto &rec : j["iterations"])
  {
    for (const char *key : {"gamma", "n_samples", "loss", "opt_iters", "seconds"})
    {
      require(rec, key, true);
    }
  }
  require(j, "final_gamma", true);
  require(j, "theta_len", true);
}

inline void WriteReportJson(const fs::path &path, const ReductionReport &report)
{
  const auto j = ReportToJson(report);
  ValidateReportJson(j);
  auto out = detail::OpenOut(path);
  out << j.dump(2) << '\n';
}

inline void WriteReportCsv(const fs::path &path, const ReductionReport &report)
{
  auto out = detail::OpenOut(path);
  out << "gamma,n_samples,loss,opt_iters,seconds\n";
  for (const auto &rec : report.iterations)
  {
    out << FormatDouble(rec.gamma) << ',' << rec.n_samples << ',' << FormatDouble(rec.loss) << ','
        << rec.opt_iters << ',' << FormatDouble(rec.seconds) << '\n';
  }
}

// Header of a CSV file, split at commas.
inline std::vector<std::string> ReadCsvHeader(const fs::path &path)
{
  auto in = detail::OpenIn(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, ','))
  {
    cols.push_back(col);
  }
  return cols;
}

inline constexpr const char *kComparisonHeader =
  "r,seconds_fixed,seconds_adaptive,ratio,n_samples_final,hinf_adaptive,hinf_fixed";

inline void WriteComparisonCsv(const fs::path &path, const ComparisonResult &result)
{
  auto out = detail::OpenOut(path);
  out << kComparisonHeader << '\n';
  for (const auto &run : result.runs)
  {
    const auto &row = run.row;
    out << row.r << ',' << FormatDouble(row.seconds_fixed) << ','
        << FormatDouble(row.seconds_adaptive) << ',' << FormatDouble(row.ratio) << ','
        << row.n_samples_final << ',' << FormatDouble(row.hinf_adaptive) << ','
        << FormatDouble(row.hinf_fixed) << '\n';
  }
}

struct ArtifactGrid
{
  double omega_lo = 1e-8;
  double omega_hi = 1e5;
  std::size_t n = 2000;
};

//
// Writes the artifacts of one reduction run into dir:
//   report.json, report.csv, samples.csv, rom/ (system directory),
//   fom_response.csv, rom_response.csv, response.csv (error of the final model),
//   levels/level_<k>_{rom,error}.csv and levels/level_<k>_samples.csv when levels were kept.
//
inline void WriteRunArtifacts(const fs::path &dir, const std::shared_ptr<const FomResponse> &fom,
                              const ReductionReport &report, const ArtifactGrid &grid = {})
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
  {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  WriteReportJson(dir / "report.json", report);
  WriteReportCsv(dir / "report.csv", report);
  WriteSamplesCsv(dir / "samples.csv", report.samples);

  const auto omegas = LogSpace(grid.omega_lo, grid.omega_hi, grid.n);
  fom->Prefetch(omegas);
  std::vector<Eigen::MatrixXcd> H;
  H.reserve(omegas.size());
  for (double w : omegas)
  {
    H.push_back((*fom)(w));
  }
  WriteResponseCsv(dir / "fom_response.csv", omegas, H, true);

  auto dump = [&](const ThetaVector &theta, const fs::path &rom_path, const fs::path &err_path) {
    const ErrorFunction e(fom, Assemble(theta));
    std::vector<Eigen::MatrixXcd> rom(omegas.size()), err(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); k++)
    {
      rom[k] = e.RomResponse(omegas[k]);
      err[k] = H[k] - rom[k];
    }
    WriteResponseCsv(rom_path, omegas, rom, true);
    WriteResponseCsv(err_path, omegas, err, true);
  };
  if (report.theta_opt)
  {
    WriteSystem(dir / "rom", Assemble(*report.theta_opt));
    dump(*report.theta_opt, dir / "rom_response.csv", dir / "response.csv");
  }
  if (!report.level_thetas.empty())
  {
    fs::create_directories(dir / "levels", ec);
    for (std::size_t k = 0; k < report.level_thetas.size(); k++)
    {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "level_%02zu", k);
      const fs::path base = dir / "levels" / stem;
      dump(report.level_thetas[k], base.string() + "_rom.csv", base.string() + "_error.csv");
      WriteSamplesCsv(base.string() + "_samples.csv", report.level_samples[k]);
    }
  }
}

}  // namespace phred::io

#endif  // PHRED_IO_HPP
