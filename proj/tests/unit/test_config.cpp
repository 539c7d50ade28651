// Configuration schema and the artifact cache.

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <doctest.h>

#include "fixtures.hpp"
#include "wmlab/cache.hpp"
#include "wmlab/config.hpp"

using namespace wm;
namespace fs = std::filesystem;

namespace {

std::string rejection(const nlohmann::json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("schema rejects kappa = 0.7 naming the field and the bound") {
  std::string m = rejection({{"params.kappa", 0.7}});
  CHECK(m.find("params.kappa") != std::string::npos);
  CHECK(m.find("(0, 1/2)") != std::string::npos);
}

TEST_CASE("schema rejects unknown keys, wrong types and bad choices") {
  CHECK(rejection({{"params.kapa", 0.1}}).find("unknown key") != std::string::npos);
  CHECK(rejection({{"basis.n_xi", 12.5}}).find("integer") != std::string::npos);
  CHECK(rejection({{"kernel.potential", "other"}}).find("commutator") != std::string::npos);
  CHECK(rejection({{"params.nu", "fast"}}).find("number") != std::string::npos);
  CHECK(rejection(nlohmann::json::array()) != "");
  CHECK(rejection({{"params.kappa", 0.2}}) == "");
}

TEST_CASE("flag overrides are validated like file values") {
  RunConfig c;
  c.set("params.tau0", std::string("250"));
  CHECK(c.params().tau0 == 250.0);
  CHECK_THROWS_AS(c.set("params.kappa", std::string("0.7")), std::invalid_argument);
  CHECK_THROWS_AS(c.set("params.kappa", std::string("abc")), std::invalid_argument);
}

TEST_CASE("defaults are valid and every key is documented") {
  RunConfig c;
  CHECK_NOTHROW(c.params().validate());
  for (const auto& k : config_schema()) {
    CHECK(!k.doc.empty());
    CHECK(schema_markdown().find("`" + k.key + "`") != std::string::npos);
  }
}

TEST_CASE("sha256 test vectors and cache keys") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  nlohmann::json a = {{"x", 1}, {"y", 2}};
  CHECK(cache_key("k", a) == cache_key("k", a));
  CHECK(cache_key("k", a) != cache_key("k", {{"x", 1}, {"y", 3}}));
  CHECK(cache_key("k", a).rfind("k-", 0) == 0);
}

TEST_CASE("eigenbasis cache: second load is a byte-identical hit") {
  fs::path dir = fs::temp_directory_path() / "wmlab_unit_cache";
  fs::remove_all(dir);
  auto cfg = test::small_basis_config();
  CacheInfo a, b;
  auto t1 = load_or_build_basis(cfg, dir.string(), &a);
  auto t2 = load_or_build_basis(cfg, dir.string(), &b);
  CHECK(!a.hit);
  CHECK(b.hit);
  CHECK(a.checksum == b.checksum);
  CHECK(basis_columns_csv(t1) == basis_columns_csv(t2));
  fs::remove_all(dir);
}

TEST_CASE("kernel cache round trip") {
  fs::path dir = fs::temp_directory_path() / "wmlab_unit_kernel";
  fs::remove_all(dir);
  const auto& k = test::small_kernel();
  save_kernel(k, dir.string(), {{"unit", true}});
  auto back = load_kernel(dir.string(), k.freq);
  CHECK((back.values - k.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.rho == k.rho);
  CHECK(back.ibp_used == k.ibp_used);
  // corruption is detected
  std::ofstream(dir / "values.csv", std::ios::app) << "1\n";
  CHECK_THROWS(load_kernel(dir.string(), k.freq));
  fs::remove_all(dir);
}
