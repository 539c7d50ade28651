#include "wmlab/cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace wm {

namespace fs = std::filesystem;

namespace {

constexpr int kFormat = 1;

std::string hex(const unsigned char* d, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < n; ++i) {
    s += digits[d[i] >> 4];
    s += digits[d[i] & 15];
  }
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cache: cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& s) {
  // write then rename so a reader never sees a partial entry
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cache: cannot write " + tmp.string());
    os << s;
  }
  fs::rename(tmp, p);
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string s;
  s.reserve(size_t(m.size()) * 24);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      s += g17(m(i, j));
    }
    s += '\n';
  }
  return s;
}

Eigen::MatrixXd parse_matrix(const std::string& text, Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd out(n, m);
  const char* p = text.c_str();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      char* end = nullptr;
      out(i, j) = std::strtod(p, &end);
      if (end == p) throw std::runtime_error("cache: malformed matrix CSV");
      p = end;
      while (*p == ',' || *p == '\n' || *p == '\r') ++p;
    }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  return hex(md, len);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::string cache_key(const std::string& kind, const nlohmann::json& config) {
  nlohmann::json j = {{"format", kFormat}, {"kind", kind}, {"config", config}};
  return kind + "-" + sha256_hex(j.dump()).substr(0, 16);
}

std::string basis_columns_csv(const EigenbasisTable& b) {
  std::string s = "xi,weight,c2,amp,theta,rho_weyl,rho\n";
  for (size_t j = 0; j < b.n_xi(); ++j) {
    s += g17(b.freq->xi[j]) + ',' + g17(b.freq->w[j]) + ',' + g17(b.c2[j]) + ',' + g17(b.amp[j]) + ',' +
         g17(b.theta[j]) + ',' + g17(b.rho_weyl[j]) + ',' + g17(b.rho[j]) + '\n';
  }
  return s;
}

std::string basis_matrix_checksum(const EigenbasisTable& b) {
  std::string raw(reinterpret_cast<const char*>(b.phi.data()), size_t(b.phi.size()) * sizeof(double));
  return sha256_hex(raw);
}

EigenbasisTable load_or_build_basis(const BasisConfig& cfg, const std::string& cache_dir, CacheInfo* info) {
  EigenbasisTable b = build_basis(cfg);
  build_measure(b, default_calibration_set(b.grid));
  std::string phi_sum = basis_matrix_checksum(b);
  std::string columns = basis_columns_csv(b);
  fs::path dir = fs::path(cache_dir) / cache_key("eigenbasis", cfg.to_json());
  fs::path header = dir / "header.json", cols = dir / "columns.csv";
  CacheInfo ci;
  ci.path = dir.string();
  if (fs::exists(header) && fs::exists(cols)) {
    nlohmann::json h = nlohmann::json::parse(read_file(header));
    std::string stored = read_file(cols);
    if (h.value("phi_sha256", "") == phi_sum && sha256_hex(stored) == h.value("columns_sha256", "")) {
      // the persisted measure is authoritative on a hit
      std::istringstream is(stored);
      std::string line;
      std::getline(is, line);
      for (size_t j = 0; j < b.n_xi() && std::getline(is, line); ++j) {
        std::vector<double> v;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
        if (v.size() == 7) b.rho[j] = v[6];
      }
      b.calibration = h.value("calibration", b.calibration);
      ci.hit = true;
      ci.checksum = h["columns_sha256"];
      if (info) *info = ci;
      return b;
    }
  }
  fs::create_directories(dir);
  write_file(cols, columns);
  nlohmann::json h = {{"format", kFormat},
                      {"kind", "eigenbasis"},
                      {"config", cfg.to_json()},
                      {"n_r", b.n_r()},
                      {"n_xi", b.n_xi()},
                      {"calibration", b.calibration},
                      {"calibration_residual", b.calibration_residual},
                      {"calibration_flag", b.calibration_flag},
                      {"phi_sha256", phi_sum},
                      {"columns_sha256", sha256_hex(columns)}};
  write_file(header, h.dump(2) + "\n");
  ci.checksum = h["columns_sha256"];
  if (info) *info = ci;
  return b;
}

void save_kernel(const KernelTable& k, const std::string& dir, const nlohmann::json& key_config) {
  fs::create_directories(dir);
  std::string values = matrix_csv(k.values);
  Eigen::MatrixXd ibp = k.ibp_used.cast<double>();
  std::string ibp_csv = matrix_csv(ibp);
  std::string rho;
  for (double r : k.rho) rho += g17(r) + '\n';
  write_file(fs::path(dir) / "values.csv", values);
  write_file(fs::path(dir) / "ibp.csv", ibp_csv);
  write_file(fs::path(dir) / "rho.csv", rho);
  nlohmann::json h = {{"format", kFormat},
                      {"kind", k.kind == KernelKind::F ? "F" : k.kind == KernelKind::J ? "J" : "Jtilde"},
                      {"potential", k.potential},
                      {"n", k.values.rows()},
                      {"config", key_config},
                      {"values_sha256", sha256_hex(values)}};
  write_file(fs::path(dir) / "header.json", h.dump(2) + "\n");
}

KernelTable load_kernel(const std::string& dir, FreqPtr freq) {
  nlohmann::json h = nlohmann::json::parse(read_file(fs::path(dir) / "header.json"));
  if (h.value("format", 0) != kFormat) throw std::runtime_error("cache: unsupported kernel format in " + dir);
  std::string values = read_file(fs::path(dir) / "values.csv");
  if (sha256_hex(values) != h.value("values_sha256", ""))
    throw std::runtime_error("cache: checksum mismatch in " + dir);
  Eigen::Index n = h["n"].get<Eigen::Index>();
  if (!freq || Eigen::Index(freq->size()) != n) throw std::runtime_error("cache: kernel size does not match the basis");
  KernelTable k;
  k.freq = freq;
  std::string kind = h["kind"];
  k.kind = kind == "F" ? KernelKind::F : kind == "J" ? KernelKind::J : KernelKind::Jtilde;
  k.potential = h.value("potential", "");
  k.values = parse_matrix(values, n, n);
  k.ibp_used = (parse_matrix(read_file(fs::path(dir) / "ibp.csv"), n, n).array() > 0.5);
  std::istringstream rs(read_file(fs::path(dir) / "rho.csv"));
  for (double r; rs >> r;) k.rho.push_back(r);
  return k;
}

KernelTable load_or_build_kernel(const EigenbasisTable& basis, const KernelOptions& opt, const std::string& cache_dir,
                                 CacheInfo* info) {
  nlohmann::json cfg = {{"basis", basis.config.to_json()},
                        {"potential", opt.potential == WPotential::commutator ? "commutator" : "displayed"},
                        {"ibp_min_sum", opt.ibp_min_sum},
                        {"ibp_min_sep", opt.ibp_min_sep},
                        {"tail", opt.tail}};
  fs::path dir = fs::path(cache_dir) / cache_key("kernel-F", cfg);
  CacheInfo ci;
  ci.path = dir.string();
  if (fs::exists(dir / "header.json")) {
    try {
      KernelTable k = load_kernel(dir.string(), basis.freq);
      ci.hit = true;
      ci.checksum = sha256_file((dir / "values.csv").string());
      if (info) *info = ci;
      return k;
    } catch (const std::exception&) {
      // corrupt or stale entry: rebuild below
    }
  }
  KernelTable k = build_kernel_F(basis, opt);
  save_kernel(k, dir.string(), cfg);
  ci.checksum = sha256_file((dir / "values.csv").string());
  if (info) *info = ci;
  return k;
}

}  // namespace wm
