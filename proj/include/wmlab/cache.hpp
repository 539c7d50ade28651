#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "wmlab/spectral.hpp"
#include "wmlab/transference.hpp"

namespace wm {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);
// "<kind>-<first 16 hex digits of sha256(canonical json)>"
std::string cache_key(const std::string& kind, const nlohmann::json& config);

struct CacheInfo {
  bool hit = false;
  std::string path;      // directory of the entry
  std::string checksum;  // sha256 of the persisted table file
};

// Columns of the table as CSV: xi, weight, c2, amp, theta, rho_weyl, rho.
std::string basis_columns_csv(const EigenbasisTable& b);
// sha256 over the raw eigenfunction matrix (column-major doubles)
std::string basis_matrix_checksum(const EigenbasisTable& b);

// The eigenfunction matrix is regenerated from the configuration (a few
// seconds) and checked against the recorded checksum; the per-frequency
// columns, the measure and the calibration are persisted as CSV.
EigenbasisTable load_or_build_basis(const BasisConfig& cfg, const std::string& cache_dir, CacheInfo* info = nullptr);

void save_kernel(const KernelTable& k, const std::string& dir, const nlohmann::json& key_config);
KernelTable load_kernel(const std::string& dir, FreqPtr freq);
KernelTable load_or_build_kernel(const EigenbasisTable& basis, const KernelOptions& opt, const std::string& cache_dir,
                                 CacheInfo* info = nullptr);

}  // namespace wm
