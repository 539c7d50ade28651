#include "wmlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wm {

namespace {

double softplus(double x) { return x > 30 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Map {
  double c, gamma, w, st;
  // log R and its first two s-derivatives
  void eval(double s, double& lr, double& g1, double& g2) const {
    double sp = softplus(s), sg = logistic(s);
    lr = std::log(c * sp);
    g1 = sg / sp;
    g2 = (sg * (1 - sg) * sp - sg * sg) / (sp * sp);
    if (gamma > 0) {
      double u = (s - st) / w;
      double su = logistic(u);
      lr += gamma * w * softplus(u);
      g1 += gamma * su;
      g2 += gamma * su * (1 - su) / w;
    }
  }
};

}  // namespace

nlohmann::json GridSpec::to_json() const {
  return {{"r_min", r_min},         {"r_core", r_core},         {"r_max", r_max},
          {"n_core", n_core},       {"map_scale", map_scale},   {"tail_ratio", tail_ratio}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  GridSpec g;
  g.r_min = j.value("r_min", g.r_min);
  g.r_core = j.value("r_core", g.r_core);
  g.r_max = j.value("r_max", g.r_max);
  g.n_core = j.value("n_core", g.n_core);
  g.map_scale = j.value("map_scale", g.map_scale);
  g.tail_ratio = j.value("tail_ratio", g.tail_ratio);
  return g;
}

std::shared_ptr<const RadialGrid> RadialGrid::make(const GridSpec& spec) {
  if (spec.n_core < 8) throw std::invalid_argument("grid: n_core must be at least 8");
  if (!(spec.r_min > 0 && spec.r_core > spec.r_min))
    throw std::invalid_argument("grid: need 0 < r_min < r_core");
  auto g = std::make_shared<RadialGrid>();
  g->spec_ = spec;
  double c = spec.map_scale;
  double s0 = std::log(std::expm1(spec.r_min / c));
  double s1 = std::log(std::expm1(spec.r_core / c));
  double ds = (s1 - s0) / (spec.n_core - 1);
  Map m{c, 0.0, 1.0, 0.0};
  bool tail = spec.tail_ratio > 1.0 && spec.r_max > spec.r_core;
  if (tail) {
    m.w = 20 * ds;
    m.st = s1 + 8 * m.w;
    m.gamma = std::log(spec.tail_ratio) / ds - 1.0 / s1;
    if (m.gamma < 0) m.gamma = 0;
  }
  g->ds_ = ds;
  g->core_end_ = spec.n_core - 1;
  for (size_t i = 0;; ++i) {
    double s = s0 + ds * double(i);
    double lr, g1, g2;
    m.eval(s, lr, g1, g2);
    double r = std::exp(lr);
    g->s_.push_back(s);
    g->r_.push_back(r);
    g->rs_.push_back(r * g1);
    g->rss_.push_back(r * (g2 + g1 * g1));
    if (i + 1 >= size_t(spec.n_core) && (!tail || r >= spec.r_max)) break;
  }
  size_t n = g->r_.size();
  g->w_.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double gw = 1.0;
    size_t k = std::min(i, n - 1 - i);
    if (k == 0) gw = 3.0 / 8;
    else if (k == 1) gw = 7.0 / 6;
    else if (k == 2) gw = 23.0 / 24;
    g->w_[i] = ds * gw * g->rs_[i] * g->r_[i];
  }
  return g;
}

std::shared_ptr<const RadialGrid> RadialGrid::uniform(double r0, double dr, size_t n) {
  if (n < 6 || !(dr > 0) || !(r0 > 0)) throw std::invalid_argument("grid: bad uniform grid");
  auto g = std::make_shared<RadialGrid>();
  g->spec_.r_min = r0;
  g->spec_.r_core = r0 + dr * double(n - 1);
  g->spec_.r_max = g->spec_.r_core;
  g->spec_.n_core = int(n);
  g->spec_.map_scale = 0;
  g->spec_.tail_ratio = 1;
  g->ds_ = 1.0;
  g->core_end_ = n - 1;
  for (size_t i = 0; i < n; ++i) {
    g->s_.push_back(double(i));
    g->r_.push_back(r0 + dr * double(i));
    g->rs_.push_back(dr);
    g->rss_.push_back(0.0);
  }
  g->w_.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    size_t k = std::min(i, n - 1 - i);
    double gw = k == 0 ? 3.0 / 8 : k == 1 ? 7.0 / 6 : k == 2 ? 23.0 / 24 : 1.0;
    g->w_[i] = gw * dr * g->r_[i];
  }
  return g;
}

std::vector<double> RadialGrid::d1(const std::vector<double>& f) const {
  size_t n = size();
  if (n < 5 || f.size() != n) throw std::invalid_argument("grid: derivative needs >= 5 nodes");
  std::vector<double> out(n);
  double h12 = 12 * ds_;
  for (size_t i = 2; i + 2 < n; ++i)
    out[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / h12;
  out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / h12;
  out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / h12;
  size_t a = n - 1, b = n - 2;
  out[a] = (25 * f[a] - 48 * f[a - 1] + 36 * f[a - 2] - 16 * f[a - 3] + 3 * f[a - 4]) / h12;
  out[b] = (3 * f[b + 1] + 10 * f[b] - 18 * f[b - 1] + 6 * f[b - 2] - f[b - 3]) / h12;
  for (size_t i = 0; i < n; ++i) out[i] /= rs_[i];
  return out;
}

std::vector<double> RadialGrid::d2(const std::vector<double>& f) const {
  size_t n = size();
  if (n < 6 || f.size() != n) throw std::invalid_argument("grid: derivative needs >= 6 nodes");
  std::vector<double> fss(n);
  double h2 = 12 * ds_ * ds_;
  for (size_t i = 2; i + 2 < n; ++i)
    fss[i] = (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / h2;
  fss[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / h2;
  fss[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / h2;
  size_t a = n - 1, b = n - 2;
  fss[a] = (45 * f[a] - 154 * f[a - 1] + 214 * f[a - 2] - 156 * f[a - 3] + 61 * f[a - 4] - 10 * f[a - 5]) / h2;
  fss[b] = (10 * f[b + 1] - 15 * f[b] - 4 * f[b - 1] + 14 * f[b - 2] - 6 * f[b - 3] + f[b - 4]) / h2;
  std::vector<double> fr = d1(f);
  for (size_t i = 0; i < n; ++i) fss[i] = (fss[i] - rss_[i] * fr[i]) / (rs_[i] * rs_[i]);
  return fss;
}

std::vector<double> RadialGrid::weights_upto(size_t last) const {
  size_t n = std::min(last + 1, size());
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    size_t k = std::min(i, n - 1 - i);
    double gw = k == 0 ? 3.0 / 8 : k == 1 ? 7.0 / 6 : k == 2 ? 23.0 / 24 : 1.0;
    w[i] = ds_ * gw * rs_[i] * r_[i];
  }
  return w;
}

double RadialGrid::integrate(const std::vector<double>& f) const {
  double s = 0;
  for (size_t i = 0; i < f.size(); ++i) s += w_[i] * f[i];
  return s;
}

std::vector<double> RadialGrid::cumulative(const std::vector<double>& f, double q) const {
  size_t n = size();
  std::vector<double> F(n), out(n);
  for (size_t i = 0; i < n; ++i) F[i] = f[i] * rs_[i];
  out[0] = f[0] * r_[0] / (q + 1);
  double h = ds_ / 24;
  for (size_t i = 0; i + 1 < n; ++i) {
    double piece;
    if (i == 0)
      piece = h * (9 * F[0] + 19 * F[1] - 5 * F[2] + F[3]);
    else if (i + 2 >= n)
      piece = h * (F[i - 2] - 5 * F[i - 1] + 19 * F[i] + 9 * F[i + 1]);
    else
      piece = h * (-F[i - 1] + 13 * F[i] + 13 * F[i + 1] - F[i + 2]);
    out[i + 1] = out[i] + piece;
  }
  return out;
}

double RadialFunction::norm() const { return std::sqrt(dot(*this)); }

double RadialFunction::dot(const RadialFunction& o) const {
  double s = 0;
  const auto& w = grid->weights();
  for (size_t i = 0; i < values.size(); ++i) s += w[i] * values[i] * o.values[i];
  return s;
}

std::string RadialFunction::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "R,value\n";
  for (size_t i = 0; i < values.size(); ++i) os << grid->R(i) << ',' << values[i] << '\n';
  return os.str();
}

nlohmann::json RadialFunction::to_json() const {
  return {{"grid", grid->spec().to_json()}, {"n", values.size()},
          {"origin_order", origin_order}, {"values", values}};
}

}  // namespace wm
