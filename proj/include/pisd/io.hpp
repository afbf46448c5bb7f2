#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pisd/harness.hpp"

namespace pisd::io {

inline constexpr const char* kSweepHeader = "temperature_K,sz_over_hbar,std_error,model,order,n_samples,seed";
inline constexpr const char* kEdHeader = "temperature_K,sz_over_hbar_exact";
inline constexpr const char* kDiagnosticHeader = "temperature_K,criterion,mode";
inline constexpr const char* kEigenvalueHeader = "index,eigenvalue_J";

// 17 significant digits (%.17g); "nan" for NaN.
std::string format_double(double x);

// Failed sweep rows are written with nan estimate and error.
void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_ed_csv(std::ostream& os, const std::vector<EdRow>& rows);

struct DiagnosticRow {
  double temperature = 0.0;
  double criterion = 0.0;
  CriterionMode mode = CriterionMode::Supremum;
};
void write_diagnostic_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows);

// Eigenvalues as index,eigenvalue_J. The sidecar has one column per
// eigenstate (header state_0,...), one row per product-basis index
// p1 * (2s+1) + p2, each entry written as re+imj.
void write_eigensystem_csv(std::ostream& values, std::ostream& vectors, const EigenSystem& eig);

// Writes to a temporary file beside `path` and renames it into place.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

// Minimal CSV reader for the formats above: header plus rows of raw fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& is);

}  // namespace pisd::io
