#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wm {

// Parameters of the radial grid. Nodes are uniform in a computational
// variable s; R(s) = c*log(1+e^s) is geometric near 0 and uniform for
// large s. An optional geometric tail (ratio tail_ratio per node) is
// blended in smoothly beyond r_core and runs out to r_max.
struct GridSpec {
  double r_min = 1e-4;
  double r_core = 8.0;
  double r_max = 400.0;
  int n_core = 24576;
  double map_scale = 0.5;
  double tail_ratio = 1.02;  // <= 1 disables the tail

  nlohmann::json to_json() const;
  static GridSpec from_json(const nlohmann::json& j);
};

class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> make(const GridSpec& spec);
  // r_i = r0 + i*dr, i < n (used by the finite-difference oracle)
  static std::shared_ptr<const RadialGrid> uniform(double r0, double dr, size_t n);

  size_t size() const { return r_.size(); }
  const std::vector<double>& nodes() const { return r_; }
  const std::vector<double>& weights() const { return w_; }
  double R(size_t i) const { return r_[i]; }
  double ds() const { return ds_; }
  // index of the last node that belongs to the fine core (before the tail)
  size_t core_end() const { return core_end_; }
  const GridSpec& spec() const { return spec_; }

  // dR/ds and d2R/ds2 at the nodes
  const std::vector<double>& dr_ds() const { return rs_; }
  const std::vector<double>& d2r_ds2() const { return rss_; }

  // 4th order derivatives in R via the chain rule from s-stencils.
  std::vector<double> d1(const std::vector<double>& f) const;
  std::vector<double> d2(const std::vector<double>& f) const;

  // weights for int . R dR over nodes [0, last] with 4th order end corrections
  std::vector<double> weights_upto(size_t last) const;

  // int f R dR with the grid weights
  double integrate(const std::vector<double>& f) const;
  // running integral int_0^{R_i} f dR, assuming f ~ a R^q below the first node
  std::vector<double> cumulative(const std::vector<double>& f, double q) const;

 private:
  GridSpec spec_;
  double ds_ = 0;
  size_t core_end_ = 0;
  std::vector<double> s_, r_, rs_, rss_, w_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Samples of a radial function with the declared leading power at R = 0.
struct RadialFunction {
  GridPtr grid;
  std::vector<double> values;
  int origin_order = 0;

  RadialFunction() = default;
  RadialFunction(GridPtr g, std::vector<double> v, int p)
      : grid(std::move(g)), values(std::move(v)), origin_order(p) {}

  template <class F>
  static RadialFunction sample(GridPtr g, F&& f, int p) {
    std::vector<double> v(g->size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = f(g->R(i));
    return RadialFunction(std::move(g), std::move(v), p);
  }

  size_t size() const { return values.size(); }
  double norm() const;  // L2(R dR)
  double dot(const RadialFunction& o) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

}  // namespace wm
