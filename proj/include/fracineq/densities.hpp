// Probability densities: Gaussians with closed-form calculus and uniform
// 1D/2D lattices of cell values with midpoint-rule calculus.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "fracineq/support.hpp"

namespace fracineq {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Non-degenerate normal density N(mean, covariance) on R^n.
class GaussianDensity {
 public:
  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
      : mean_(std::move(mean)), cov_(std::move(covariance)) {
    const auto n = mean_.size();
    if (n < 1) throw std::invalid_argument("gaussian needs dimension >= 1");
    if (cov_.rows() != n || cov_.cols() != n) throw std::invalid_argument("covariance shape does not match mean");
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("covariance is not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("covariance is not positive definite");
    log_det_ = eig.eigenvalues().array().log().sum();
  }

  /// One-dimensional N(mean, variance).
  static GaussianDensity scalar(double mean, double variance) {
    return {Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance)};
  }

  static GaussianDensity isotropic(int n, double variance) {
    return {Eigen::VectorXd::Zero(n), variance * Eigen::MatrixXd::Identity(n, n)};
  }

  int dimension() const noexcept { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  double log_det() const noexcept { return log_det_; }

  double log_pdf(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = x - mean_;
    const double quad = z.dot(cov_.ldlt().solve(z));
    return -0.5 * (dimension() * std::log(kTwoPi) + log_det_ + quad);
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double log_det_ = 0.0;
};

/// Piecewise-constant density on a uniform lattice of cells of side `step`.
/// Cell i along an axis is [origin + i h, origin + (i+1) h); 2D values are
/// stored row-major with the x index outermost.
class GridDensity {
 public:
  static constexpr double kMassTolerance = 1e-6;

  GridDensity(int n, std::array<double, 2> origin, double step, std::array<std::size_t, 2> shape,
              std::vector<double> values)
      : n_(n), origin_(origin), step_(step), shape_(shape), values_(std::move(values)) {
    if (n_ != 1 && n_ != 2) throw std::invalid_argument("grid densities are 1D or 2D");
    if (n_ == 1) {
      shape_[1] = 1;
      origin_[1] = 0.0;
    }
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw std::invalid_argument("grid step must be positive");
    if (shape_[0] == 0 || shape_[1] == 0 || values_.size() != shape_[0] * shape_[1])
      throw std::invalid_argument("grid values do not match grid shape");
    for (double v : values_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid values must be finite and nonnegative");
    if (std::abs(mass() - 1.0) > kMassTolerance)
      throw std::invalid_argument("grid mass " + std::to_string(mass()) + " differs from 1");
  }

  /// Builds a grid after rescaling `values` to unit mass.
  static GridDensity normalized(int n, std::array<double, 2> origin, double step, std::array<std::size_t, 2> shape,
                                std::vector<double> values) {
    double total = pairwise_sum(values) * std::pow(step, n);
    if (!(total > 0.0)) throw std::invalid_argument("grid has zero mass");
    for (double& v : values) v /= total;
    return {n, origin, step, shape, std::move(values)};
  }

  int dimension() const noexcept { return n_; }
  const std::array<double, 2>& origin() const noexcept { return origin_; }
  double step() const noexcept { return step_; }
  const std::array<std::size_t, 2>& shape() const noexcept { return shape_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double cell_volume() const noexcept { return n_ == 1 ? step_ : step_ * step_; }
  double center(int axis, std::size_t i) const noexcept { return origin_[axis] + (static_cast<double>(i) + 0.5) * step_; }
  double mass() const { return pairwise_sum(values_) * cell_volume(); }
  /// Relative mass correction applied when this grid was produced by a
  /// convolution; 0 for grids built directly.
  double renormalization() const noexcept { return renormalization_; }

  double value_at(double x) const {
    if (n_ != 1) throw std::logic_error("value_at(x) needs a 1D grid");
    const double t = std::floor((x - origin_[0]) / step_);
    if (t < 0 || t >= static_cast<double>(shape_[0])) return 0.0;
    return values_[static_cast<std::size_t>(t)];
  }

 private:
  friend GridDensity convolve_grids_impl(const GridDensity&, const GridDensity&, bool);

  int n_;
  std::array<double, 2> origin_;
  double step_;
  std::array<std::size_t, 2> shape_;
  std::vector<double> values_;
  double renormalization_ = 0.0;
};

using Density = std::variant<GaussianDensity, GridDensity>;

inline int dimension(const Density& f) {
  return std::visit([](const auto& g) { return g.dimension(); }, f);
}

inline bool is_gaussian(const Density& f) noexcept { return std::holds_alternative<GaussianDensity>(f); }

// ---------------------------------------------------------------------------
// Construction helpers

/// Uniform density on [a, b] with cells of width `step`; (b-a)/step must be
/// an integer.
inline GridDensity uniform_grid(double a, double b, double step) {
  if (!(b > a)) throw std::invalid_argument("uniform grid needs a < b");
  const double cells = (b - a) / step;
  const auto count = static_cast<std::size_t>(std::llround(cells));
  if (count == 0 || std::abs(cells - static_cast<double>(count)) > 1e-6)
    throw std::invalid_argument("interval length is not a multiple of the grid step");
  const double h = (b - a) / static_cast<double>(count);
  return GridDensity::normalized(1, {a, 0.0}, h, {count, 1}, std::vector<double>(count, 1.0));
}

/// Samples a 1D or 2D Gaussian at cell centers on mean +- window_sd standard
/// deviations per axis and renormalizes.
inline GridDensity discretize(const GaussianDensity& g, double step, double window_sd = 8.0) {
  const int n = g.dimension();
  if (n > 2) throw std::invalid_argument("only 1D and 2D Gaussians can be discretized");
  std::array<double, 2> origin{0.0, 0.0};
  std::array<std::size_t, 2> shape{1, 1};
  for (int a = 0; a < n; ++a) {
    const double sd = std::sqrt(g.covariance()(a, a));
    const auto cells = static_cast<std::size_t>(std::ceil(2.0 * window_sd * sd / step));
    shape[a] = std::max<std::size_t>(cells, 1);
    origin[a] = g.mean()(a) - 0.5 * static_cast<double>(shape[a]) * step;
  }
  std::vector<double> values(shape[0] * shape[1]);
  const Eigen::MatrixXd precision = g.covariance().inverse();
  const double log_norm = -0.5 * (n * std::log(kTwoPi) + g.log_det());
  Eigen::VectorXd x(n);
  for (std::size_t i = 0; i < shape[0]; ++i) {
    for (std::size_t j = 0; j < shape[1]; ++j) {
      x(0) = origin[0] + (static_cast<double>(i) + 0.5) * step;
      if (n == 2) x(1) = origin[1] + (static_cast<double>(j) + 0.5) * step;
      const Eigen::VectorXd z = x - g.mean();
      values[i * shape[1] + j] = std::exp(log_norm - 0.5 * z.dot(precision * z));
    }
  }
  return GridDensity::normalized(n, origin, step, shape, std::move(values));
}

/// Every other cell along each axis at twice the step, renormalized. Used
/// to estimate midpoint-rule error by step doubling.
inline GridDensity coarsen(const GridDensity& f) {
  const int n = f.dimension();
  std::array<std::size_t, 2> shape{(f.shape()[0] + 1) / 2, n == 2 ? (f.shape()[1] + 1) / 2 : 1};
  std::vector<double> values(shape[0] * shape[1]);
  for (std::size_t i = 0; i < shape[0]; ++i)
    for (std::size_t j = 0; j < shape[1]; ++j)
      values[i * shape[1] + j] = f.values()[(2 * i) * f.shape()[1] + (n == 2 ? 2 * j : 0)];
  const double h = f.step();
  std::array<double, 2> origin{f.origin()[0] - 0.5 * h, n == 2 ? f.origin()[1] - 0.5 * h : 0.0};
  return GridDensity::normalized(n, origin, 2.0 * h, shape, std::move(values));
}

/// Loads a grid from CSV rows "x,value" (1D) or "x,y,value" (2D) on a
/// uniform lattice of cell centers. A non-numeric first line is treated as a
/// header; cells absent from the file are zero. The result is normalized.
inline GridDensity load_grid_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + " is not numeric");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + " has the wrong number of columns");
    if (row.size() != 2 && row.size() != 3)
      throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + " needs 2 or 3 columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("grid CSV has no data rows");
  const int n = static_cast<int>(rows.front().size()) - 1;

  std::array<double, 2> lo{0.0, 0.0};
  std::array<std::size_t, 2> shape{1, 1};
  double step = 0.0;
  std::array<std::vector<double>, 2> coords;
  for (int a = 0; a < n; ++a) {
    for (const auto& r : rows) coords[a].push_back(r[a]);
    std::sort(coords[a].begin(), coords[a].end());
    coords[a].erase(std::unique(coords[a].begin(), coords[a].end()), coords[a].end());
    for (std::size_t k = 1; k < coords[a].size(); ++k) {
      const double gap = coords[a][k] - coords[a][k - 1];
      if (step == 0.0 || gap < step) step = gap;
    }
    lo[a] = coords[a].front();
  }
  if (!(step > 0.0)) throw std::invalid_argument("grid CSV needs at least two distinct coordinates");
  for (int a = 0; a < n; ++a) {
    const double span = (coords[a].back() - lo[a]) / step;
    shape[a] = static_cast<std::size_t>(std::llround(span)) + 1;
  }
  std::vector<double> values(shape[0] * shape[1], 0.0);
  for (const auto& r : rows) {
    std::array<std::size_t, 2> idx{0, 0};
    for (int a = 0; a < n; ++a) {
      const double t = (r[a] - lo[a]) / step;
      if (std::abs(t - std::round(t)) > 1e-6) throw std::invalid_argument("grid CSV coordinates are not on a uniform lattice");
      idx[a] = static_cast<std::size_t>(std::llround(t));
    }
    values[idx[0] * shape[1] + idx[1]] = r[n];
  }
  return GridDensity::normalized(n, {lo[0] - 0.5 * step, n == 2 ? lo[1] - 0.5 * step : 0.0}, step, shape,
                                 std::move(values));
}

inline GridDensity load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open grid CSV " + path);
  return load_grid_csv(in);
}

// ---------------------------------------------------------------------------
// Convolution

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::size_t fft_size(std::size_t n) {
  std::size_t s = 1;
  while (s < n) s <<= 1;
  return s;
}

/// Linear convolution of two real row-major arrays via zero-padded FFTs.
inline std::vector<double> fft_convolve(const std::vector<double>& a, std::array<std::size_t, 2> sa,
                                        const std::vector<double>& b, std::array<std::size_t, 2> sb) {
  const std::array<std::size_t, 2> out{sa[0] + sb[0] - 1, sa[1] + sb[1] - 1};
  const std::size_t nx = fft_size(out[0]);
  const std::size_t ny = out[1] == 1 ? 1 : fft_size(out[1]);
  const std::size_t nyc = ny == 1 ? 1 : ny / 2 + 1;
  const std::size_t nxc = ny == 1 ? nx / 2 + 1 : nx;
  std::vector<double> ra(nx * ny, 0.0), rb(nx * ny, 0.0);
  std::vector<std::complex<double>> ca(nxc * nyc), cb(nxc * nyc);
  for (std::size_t i = 0; i < sa[0]; ++i)
    for (std::size_t j = 0; j < sa[1]; ++j) ra[i * ny + j] = a[i * sa[1] + j];
  for (std::size_t i = 0; i < sb[0]; ++i)
    for (std::size_t j = 0; j < sb[1]; ++j) rb[i * ny + j] = b[i * sb[1] + j];

  auto* fa = reinterpret_cast<fftw_complex*>(ca.data());
  auto* fb = reinterpret_cast<fftw_complex*>(cb.data());
  fftw_plan pa, pb, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    if (ny == 1) {
      pa = fftw_plan_dft_r2c_1d(static_cast<int>(nx), ra.data(), fa, FFTW_ESTIMATE);
      pb = fftw_plan_dft_r2c_1d(static_cast<int>(nx), rb.data(), fb, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_1d(static_cast<int>(nx), fa, ra.data(), FFTW_ESTIMATE);
    } else {
      pa = fftw_plan_dft_r2c_2d(static_cast<int>(nx), static_cast<int>(ny), ra.data(), fa, FFTW_ESTIMATE);
      pb = fftw_plan_dft_r2c_2d(static_cast<int>(nx), static_cast<int>(ny), rb.data(), fb, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_2d(static_cast<int>(nx), static_cast<int>(ny), fa, ra.data(), FFTW_ESTIMATE);
    }
  }
  fftw_execute(pa);
  fftw_execute(pb);
  const double scale = 1.0 / static_cast<double>(nx * ny);
  for (std::size_t k = 0; k < ca.size(); ++k) ca[k] *= cb[k] * scale;
  fftw_execute(inv);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inv);
  }
  std::vector<double> result(out[0] * out[1]);
  for (std::size_t i = 0; i < out[0]; ++i)
    for (std::size_t j = 0; j < out[1]; ++j) result[i * out[1] + j] = std::max(0.0, ra[i * ny + j]);
  return result;
}

inline std::vector<double> direct_convolve(const std::vector<double>& a, std::array<std::size_t, 2> sa,
                                           const std::vector<double>& b, std::array<std::size_t, 2> sb) {
  const std::array<std::size_t, 2> out{sa[0] + sb[0] - 1, sa[1] + sb[1] - 1};
  std::vector<double> result(out[0] * out[1], 0.0);
  for (std::size_t i = 0; i < sa[0]; ++i)
    for (std::size_t j = 0; j < sa[1]; ++j) {
      const double av = a[i * sa[1] + j];
      if (av == 0.0) continue;
      for (std::size_t k = 0; k < sb[0]; ++k)
        for (std::size_t l = 0; l < sb[1]; ++l) result[(i + k) * out[1] + (j + l)] += av * b[k * sb[1] + l];
    }
  return result;
}

}  // namespace detail

/// Output size (in cells) below which grid convolution sums directly.
inline constexpr std::size_t kDirectConvolutionCells = 4096;

enum class ConvolutionMethod { automatic, direct, fft };

inline GridDensity convolve_grids_impl(const GridDensity& f, const GridDensity& g, bool use_fft) {
  const int n = f.dimension();
  std::vector<double> raw = use_fft ? detail::fft_convolve(f.values(), f.shape(), g.values(), g.shape())
                                    : detail::direct_convolve(f.values(), f.shape(), g.values(), g.shape());
  const double h = f.step();
  const double cell = f.cell_volume();
  for (double& v : raw) v *= cell;
  const std::array<std::size_t, 2> shape{f.shape()[0] + g.shape()[0] - 1, f.shape()[1] + g.shape()[1] - 1};
  const std::array<double, 2> origin{f.origin()[0] + g.origin()[0] + 0.5 * h,
                                     n == 2 ? f.origin()[1] + g.origin()[1] + 0.5 * h : 0.0};
  const double mass = pairwise_sum(raw) * cell;
  const double drift = std::abs(mass - 1.0);
  if (drift > GridDensity::kMassTolerance)
    throw PrecisionError("grid convolution lost mass: drift " + std::to_string(drift));
  for (double& v : raw) v /= mass;
  GridDensity out(n, origin, h, shape, std::move(raw));
  out.renormalization_ = drift + f.renormalization() + g.renormalization();
  return out;
}

/// Discrete convolution scaled by h^n: exact samples of the convolution of
/// the two piecewise-constant densities at the output cell centers.
inline GridDensity convolve(const GridDensity& f, const GridDensity& g,
                            ConvolutionMethod method = ConvolutionMethod::automatic) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("convolution of grids of different dimension");
  if (std::abs(f.step() - g.step()) > 1e-12 * f.step()) throw std::invalid_argument("convolution needs equal grid steps");
  const std::size_t out_cells = (f.shape()[0] + g.shape()[0] - 1) * (f.shape()[1] + g.shape()[1] - 1);
  const bool use_fft = method == ConvolutionMethod::fft ||
                       (method == ConvolutionMethod::automatic && out_cells >= kDirectConvolutionCells);
  return convolve_grids_impl(f, g, use_fft);
}

inline GaussianDensity convolve(const GaussianDensity& f, const GaussianDensity& g) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("convolution of Gaussians of different dimension");
  return {f.mean() + g.mean(), f.covariance() + g.covariance()};
}

inline Density convolve(const Density& f, const Density& g) {
  if (f.index() != g.index()) throw std::invalid_argument("cannot convolve a Gaussian with a grid density");
  if (is_gaussian(f)) return convolve(std::get<GaussianDensity>(f), std::get<GaussianDensity>(g));
  return convolve(std::get<GridDensity>(f), std::get<GridDensity>(g));
}

/// Left fold of convolve over a nonempty list.
inline Density convolve_all(std::span<const Density> fs) {
  if (fs.empty()) throw std::invalid_argument("convolution of an empty family");
  Density acc = fs.front();
  for (std::size_t k = 1; k < fs.size(); ++k) acc = convolve(acc, fs[k]);
  return acc;
}

// ---------------------------------------------------------------------------
// Norms and entropies

/// log of (sum v^p) computed with max-scaling.
inline double log_power_sum(std::span<const double> values, double p) {
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax == 0.0) return -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(values.size());
  for (double v : values)
    if (v > 0.0) terms.push_back(std::pow(v / vmax, p));
  return p * std::log(vmax) + std::log(pairwise_sum(terms));
}

inline double log_lp_norm(const GaussianDensity& g, double p) {
  if (!(p > 0.0)) throw std::domain_error("L^p norm needs p > 0");
  const double n = g.dimension();
  return -(n * (p - 1.0) / (2.0 * p)) * std::log(kTwoPi) - ((p - 1.0) / (2.0 * p)) * g.log_det() -
         (n / (2.0 * p)) * std::log(p);
}

inline double log_lp_norm(const GridDensity& f, double p) {
  if (!(p > 0.0)) throw std::domain_error("L^p norm needs p > 0");
  return (std::log(f.cell_volume()) + log_power_sum(f.values(), p)) / p;
}

inline double log_lp_norm(const Density& f, double p) {
  return std::visit([p](const auto& g) { return log_lp_norm(g, p); }, f);
}

inline double lp_norm(const Density& f, double p) { return std::exp(log_lp_norm(f, p)); }

inline double shannon_entropy(const GaussianDensity& g) {
  return 0.5 * (g.dimension() * std::log(kTwoPi * std::numbers::e) + g.log_det());
}

inline double shannon_entropy(const GridDensity& f) {
  const double cell = f.cell_volume();
  std::vector<double> terms;
  terms.reserve(f.size());
  for (double v : f.values())
    if (v > 0.0) terms.push_back(-v * std::log(v));
  return pairwise_sum(terms) * cell;
}

/// Lebesgue measure of the support; infinite for Gaussians.
inline double support_volume(const Density& f) {
  if (is_gaussian(f)) return std::numeric_limits<double>::infinity();
  const auto& g = std::get<GridDensity>(f);
  const auto cells = std::count_if(g.values().begin(), g.values().end(), [](double v) { return v > 0.0; });
  return static_cast<double>(cells) * g.cell_volume();
}

/// Renyi entropy h_p for p >= 0; p = 1 is the Shannon entropy and p = 0 the
/// log-volume of the support. Order infinity is not supported.
inline double renyi_entropy(const Density& f, double p) {
  if (!(p >= 0.0)) throw std::domain_error("Renyi entropy needs p >= 0");
  if (std::isinf(p)) throw std::domain_error("Renyi entropy of order infinity is not supported");
  if (p == 0.0) {
    const double vol = support_volume(f);
    if (!(vol > 0.0)) throw std::invalid_argument("density has empty support");
    return std::log(vol);
  }
  if (p == 1.0) return std::visit([](const auto& g) { return shannon_entropy(g); }, f);
  return -(p / (p - 1.0)) * log_lp_norm(f, p);
}

/// V_p = exp(2 h_p / n); p = 1 gives the Shannon entropy power.
inline double entropy_power(const Density& f, double p) {
  return std::exp(2.0 * renyi_entropy(f, p) / dimension(f));
}

// ---------------------------------------------------------------------------
// Pointwise products (used by the fractional Hoelder check)

/// log || prod_j f_j ||_p. Gaussian factors use the closed form of a product
/// of normal densities; grid factors must share a step and a lattice.
inline double log_lp_norm_of_product(std::span<const Density> fs, double p) {
  if (fs.empty()) throw std::invalid_argument("product of an empty family");
  if (!(p > 0.0)) throw std::domain_error("L^p norm needs p > 0");
  const bool gaussian = is_gaussian(fs.front());
  for (const auto& f : fs) {
    if (is_gaussian(f) != gaussian) throw std::invalid_argument("cannot multiply Gaussian and grid densities");
    if (dimension(f) != dimension(fs.front())) throw std::invalid_argument("product of densities of different dimension");
  }
  if (gaussian) {
    const int n = dimension(fs.front());
    Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
    double log_c = 0.0;
    for (const auto& f : fs) {
      const auto& g = std::get<GaussianDensity>(f);
      const Eigen::MatrixXd pj = g.covariance().inverse();
      prec += pj;
      shift += pj * g.mean();
      log_c += -0.5 * (n * std::log(kTwoPi) + g.log_det()) - 0.5 * g.mean().dot(pj * g.mean());
    }
    const Eigen::MatrixXd cov = prec.inverse();
    const Eigen::VectorXd mean = cov * shift;
    const GaussianDensity combined(mean, 0.5 * (cov + cov.transpose()));
    log_c += 0.5 * mean.dot(prec * mean) + 0.5 * (n * std::log(kTwoPi) + combined.log_det());
    return log_c + log_lp_norm(combined, p);
  }

  const auto& first = std::get<GridDensity>(fs.front());
  const int n = first.dimension();
  const double h = first.step();
  // Intersection of all grids in lattice coordinates relative to `first`.
  std::array<long long, 2> lo{std::numeric_limits<long long>::min(), std::numeric_limits<long long>::min()};
  std::array<long long, 2> hi{std::numeric_limits<long long>::max(), std::numeric_limits<long long>::max()};
  std::vector<std::array<long long, 2>> offsets;
  for (const auto& f : fs) {
    const auto& g = std::get<GridDensity>(f);
    if (std::abs(g.step() - h) > 1e-12 * h) throw std::invalid_argument("grid product needs equal steps");
    std::array<long long, 2> off{0, 0};
    for (int a = 0; a < n; ++a) {
      const double t = (g.origin()[a] - first.origin()[a]) / h;
      if (std::abs(t - std::round(t)) > 1e-6) throw std::invalid_argument("grid product needs aligned lattices");
      off[a] = std::llround(t);
      lo[a] = std::max(lo[a], off[a]);
      hi[a] = std::min(hi[a], off[a] + static_cast<long long>(g.shape()[a]));
    }
    offsets.push_back(off);
  }
  if (n == 1) {
    lo[1] = 0;
    hi[1] = 1;
  }
  std::vector<double> prod;
  for (long long i = lo[0]; i < hi[0]; ++i)
    for (long long j = lo[1]; j < hi[1]; ++j) {
      double v = 1.0;
      for (std::size_t k = 0; k < fs.size(); ++k) {
        const auto& g = std::get<GridDensity>(fs[k]);
        const auto gi = static_cast<std::size_t>(i - offsets[k][0]);
        const auto gj = n == 2 ? static_cast<std::size_t>(j - offsets[k][1]) : 0;
        v *= g.values()[gi * g.shape()[1] + gj];
      }
      prod.push_back(v);
    }
  if (prod.empty()) return -std::numeric_limits<double>::infinity();
  return (std::log(first.cell_volume()) + log_power_sum(prod, p)) / p;
}

}  // namespace fracineq
