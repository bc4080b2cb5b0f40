#pragma once

// File formats: single-column / dense CSV, the SPMX binary matrix blob,
// JSON-lines solve traces and kernel-model JSON. Every writer goes through
// write_atomic (temp file in the target directory, then rename).

#include "sparseproj/core.hpp"
#include "sparseproj/density.hpp"
#include "sparseproj/linops.hpp"
#include "sparseproj/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace sparseproj {

/// Malformed or unreadable input.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips a double.
inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return os.str();
}

inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace detail {

inline double parse_double(const std::string& field, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line) + ": not a number: '" + field + "'");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size()) throw IoError("line " + std::to_string(line) + ": trailing characters in '" + field + "'");
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Rows of comma-separated numbers; blank lines and '#' comments skipped.
inline RealMatrix parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) row.push_back(detail::parse_double(detail::trim(field), lineno));
    if (line.back() == ',') throw IoError("line " + std::to_string(lineno) + ": empty trailing field");
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV contains no data");
  RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline DenseVector parse_csv_vector(const std::string& text) {
  const RealMatrix m = parse_csv_matrix(text);
  if (m.cols() != 1) throw IoError("expected a single-column CSV, got " + std::to_string(m.cols()) + " columns");
  return m.col(0);
}

inline std::string format_csv(const RealMatrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline DenseVector read_csv_vector(const std::filesystem::path& path) { return parse_csv_vector(read_file(path)); }
inline RealMatrix read_csv_matrix(const std::filesystem::path& path) { return parse_csv_matrix(read_file(path)); }
inline void write_csv(const std::filesystem::path& path, const RealMatrix& m) { write_atomic(path, format_csv(m)); }

// SPMX blob: "SPMX" | uint64 d | uint32 dtype (0 real, 1 complex) | d*d
// column-major entries (double, or interleaved re/im), all little-endian.
namespace spmx {

inline constexpr std::array<char, 4> magic = {'S', 'P', 'M', 'X'};
inline constexpr std::size_t header_size = 16;

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "SPMX codec assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("SPMX: truncated blob");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace spmx

template <typename Scalar>
std::string encode_spmx(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  if (x.rows() != x.cols()) throw DomainError("SPMX: matrix must be square");
  constexpr bool is_complex = !std::is_same_v<Scalar, double>;
  std::string out(spmx::magic.begin(), spmx::magic.end());
  spmx::put<std::uint64_t>(out, static_cast<std::uint64_t>(x.rows()));
  spmx::put<std::uint32_t>(out, is_complex ? 1u : 0u);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if constexpr (is_complex) {
        spmx::put<double>(out, x(i, j).real());
        spmx::put<double>(out, x(i, j).imag());
      } else {
        spmx::put<double>(out, x(i, j));
      }
    }
  }
  return out;
}

/// Decodes either dtype; real blobs come back with zero imaginary parts.
inline ComplexMatrix decode_spmx(const std::string& blob, bool* was_complex = nullptr) {
  if (blob.size() < spmx::header_size || !std::equal(spmx::magic.begin(), spmx::magic.end(), blob.begin()))
    throw IoError("SPMX: bad magic");
  std::size_t pos = 4;
  const auto d = spmx::get<std::uint64_t>(blob, pos);
  const auto dtype = spmx::get<std::uint32_t>(blob, pos);
  if (dtype > 1) throw IoError("SPMX: unknown dtype " + std::to_string(dtype));
  const std::uint64_t per = dtype == 1 ? 16 : 8;
  if (d > (1u << 20) || blob.size() != spmx::header_size + d * d * per)
    throw IoError("SPMX: size does not match header");
  if (was_complex) *was_complex = dtype == 1;
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = spmx::get<double>(blob, pos);
      const double im = dtype == 1 ? spmx::get<double>(blob, pos) : 0.0;
      x(i, j) = {re, im};
    }
  }
  return x;
}

template <typename Scalar>
void write_spmx(const std::filesystem::path& path, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  write_atomic(path, encode_spmx(x));
}

inline ComplexMatrix read_spmx(const std::filesystem::path& path, bool* was_complex = nullptr) {
  return decode_spmx(read_file(path), was_complex);
}

/// One JSON object per iteration: {"iter", "objective", "change"[, "support"]}.
inline std::string trace_to_jsonl(const SolveTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& rec = trace.iterations[i];
    nlohmann::ordered_json j;
    j["iter"] = i;
    j["objective"] = rec.objective;
    j["change"] = rec.change;
    if (!rec.support.empty()) j["support"] = rec.support;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json kernel_model_to_json(const KernelModel& m) {
  nlohmann::ordered_json j;
  j["centers"] = m.centers;
  j["sigma"] = m.sigma;
  j["support"] = m.support();
  std::vector<double> w(m.weights.data(), m.weights.data() + m.weights.size());
  j["weights"] = w;
  return j;
}

inline KernelModel kernel_model_from_json(const nlohmann::json& j) {
  try {
    KernelModel m;
    m.centers = j.at("centers").get<std::vector<double>>();
    m.sigma = j.at("sigma").get<double>();
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != m.centers.size()) throw IoError("kernel model: weights and centers differ in length");
    if (!(m.sigma > 0.0)) throw IoError("kernel model: sigma must be > 0");
    m.weights = Eigen::Map<const DenseVector>(w.data(), static_cast<Eigen::Index>(w.size()));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("kernel model: ") + e.what());
  }
}

}  // namespace sparseproj
