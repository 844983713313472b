// Fourier transforms with the convention f^(x) = ∫ e^{2πi<x,y>} f(y) dy.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "fracineq/densities.hpp"

namespace fracineq {

/// Transform of a Gaussian (any n) or of a 1D grid density, interpreted as
/// the piecewise-constant function it represents.
class FourierTransform {
 public:
  explicit FourierTransform(Density f) : f_(std::move(f)) {
    if (!is_gaussian(f_) && dimension(f_) != 1)
      throw std::invalid_argument("Fourier transform of grid densities is 1D only");
  }

  const Density& density() const noexcept { return f_; }

  std::complex<double> operator()(const Eigen::VectorXd& xi) const {
    if (xi.size() != dimension(f_)) throw std::invalid_argument("frequency has the wrong dimension");
    if (const auto* g = std::get_if<GaussianDensity>(&f_)) {
      const double phase = kTwoPi * xi.dot(g->mean());
      const double decay = -2.0 * std::numbers::pi * std::numbers::pi * xi.dot(g->covariance() * xi);
      return std::polar(std::exp(decay), phase);
    }
    const auto& grid = std::get<GridDensity>(f_);
    const double x = xi(0), h = grid.step();
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double v = grid.values()[k];
      if (v != 0.0) acc += v * std::polar(1.0, kTwoPi * x * grid.center(0, k));
    }
    return acc * h * sinc(std::numbers::pi * x * h);
  }

  std::complex<double> operator()(double xi) const { return (*this)(Eigen::VectorXd::Constant(1, xi)); }

  double magnitude(double xi) const { return std::abs((*this)(xi)); }

  /// log ||f^||_q for q > 1.
  double log_lp_norm(double q) const {
    if (!(q > 1.0) || !std::isfinite(q)) throw std::domain_error("Fourier-side norm needs 1 < q < inf");
    if (const auto* g = std::get_if<GaussianDensity>(&f_)) {
      const double n = g->dimension();
      return -(n / (2.0 * q)) * std::log(kTwoPi * q) - g->log_det() / (2.0 * q);
    }
    return log_grid_norm(std::get<GridDensity>(f_), q);
  }

  double lp_norm(double q) const { return std::exp(log_lp_norm(q)); }

 private:
  static double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

  /// Σ_m |sin πs|^q / |π(s+m)|^q for s in [0,1), with an integral tail.
  static double aliasing_weight(double s, double q) {
    constexpr int kTerms = 256;
    if (s == 0.0) return 1.0;
    const double sq = std::pow(std::abs(std::sin(std::numbers::pi * s)), q);
    double sum = 0.0;
    for (int m = -kTerms; m <= kTerms; ++m) sum += std::pow(std::numbers::pi * std::abs(s + m), -q);
    const double tail = (std::pow(s + kTerms + 0.5, 1.0 - q) + std::pow(kTerms + 0.5 - s, 1.0 - q)) /
                        ((q - 1.0) * std::pow(std::numbers::pi, q));
    return sq * (sum + tail);
  }

  // With s = ξh, |f^(ξ)| = h |sinc(πs)| |D(s)| where D is the 1-periodic
  // trigonometric polynomial of the cell values, so
  // ||f^||_q^q = h^{q-1} ∫_0^1 |D(s)|^q W_q(s) ds. The periodic integral is
  // evaluated by the trapezoid rule on a zero-padded FFT of the values.
  static double log_grid_norm(const GridDensity& f, double q) {
    const std::size_t n = f.size();
    std::size_t len = 8192;
    while (len < 32 * n) len <<= 1;
    std::vector<double> in(len, 0.0);
    for (std::size_t k = 0; k < n; ++k) in[k] = f.values()[k];
    std::vector<std::complex<double>> out(len / 2 + 1);
    fftw_plan plan;
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    // |D(j/len)| for j > len/2 mirrors j' = len - j.
    std::vector<double> terms(len);
    double dmax = 0.0;
    for (const auto& c : out) dmax = std::max(dmax, std::abs(c));
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t jj = j <= len / 2 ? j : len - j;
      const double s = static_cast<double>(j) / static_cast<double>(len);
      terms[j] = std::pow(std::abs(out[jj]) / dmax, q) * aliasing_weight(s, q);
    }
    const double integral = pairwise_sum(terms) / static_cast<double>(len);
    return ((q - 1.0) * std::log(f.step()) + q * std::log(dmax) + std::log(integral)) / q;
  }

  Density f_;
};

}  // namespace fracineq
