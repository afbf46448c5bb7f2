#include "pisd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace pisd::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << kSweepHeader << '\n';
  for (const auto& r : result.rows) {
    os << format_double(r.temperature) << ',' << format_double(r.ok ? r.sz_over_hbar : NAN) << ','
       << format_double(r.ok ? r.std_error : NAN) << ',' << model_name(r.variant.kind) << ','
       << r.variant.order << ',' << r.n_samples << ',' << r.seed << '\n';
  }
}

void write_ed_csv(std::ostream& os, const std::vector<EdRow>& rows) {
  os << kEdHeader << '\n';
  for (const auto& r : rows) os << format_double(r.temperature) << ',' << format_double(r.sz_over_hbar) << '\n';
}

void write_diagnostic_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows) {
  os << kDiagnosticHeader << '\n';
  for (const auto& r : rows) {
    os << format_double(r.temperature) << ',' << format_double(r.criterion) << ',' << criterion_name(r.mode)
       << '\n';
  }
}

void write_eigensystem_csv(std::ostream& values, std::ostream& vectors, const EigenSystem& eig) {
  values << kEigenvalueHeader << '\n';
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    values << k << ',' << format_double(eig.eigenvalues(k)) << '\n';
  }
  const Eigen::Index n = eig.eigenvectors.cols();
  for (Eigen::Index k = 0; k < n; ++k) vectors << (k ? "," : "") << "state_" << k;
  vectors << '\n';
  for (Eigen::Index row = 0; row < eig.eigenvectors.rows(); ++row) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto c = eig.eigenvectors(row, k);
      const std::string im = format_double(c.imag());
      vectors << (k ? "," : "") << format_double(c.real()) << (im.front() == '-' ? "" : "+") << im << 'j';
    }
    vectors << '\n';
  }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw std::runtime_error("csv: row width differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace pisd::io
