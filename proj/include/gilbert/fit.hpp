#pragma once

// Ordinary least-squares fits of convergence traces.

#include "gilbert/core.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace gilbert {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Selects the iterations entering a fit. Index k of the series is the
/// iteration number. The window ends at `last` or at the first value that is
/// not above `floor`, whichever comes first.
struct FitWindow {
  long burn_in = 100;
  std::optional<long> last;
  double floor = 0.0;
};

inline SlopeFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw error(errc::insufficient_data, "linear_fit needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw error(errc::insufficient_data, "linear_fit: degenerate abscissa");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ss_res = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  f.points = n;
  return f;
}

namespace detail {

template <class Abscissa>
SlopeFit fit_log_series(std::span<const double> excess, const FitWindow& window, Abscissa&& abscissa) {
  std::vector<double> x, y;
  const long start = std::max<long>(window.burn_in, 1);
  long stop = static_cast<long>(excess.size()) - 1;
  if (window.last) stop = std::min(stop, *window.last);
  for (long k = start; k <= stop; ++k) {
    const double v = excess[static_cast<std::size_t>(k)];
    if (!(v > window.floor)) break;
    x.push_back(abscissa(static_cast<double>(k)));
    y.push_back(std::log(v));
  }
  if (x.size() < 10) throw error(errc::insufficient_data, "fewer than 10 points in fit window");
  return linear_fit(x, y);
}

}  // namespace detail

/// Fits log(excess_k) = slope * log(k) + intercept (natural logarithms).
inline SlopeFit fit_loglog_slope(std::span<const double> excess, const FitWindow& window = {}) {
  return detail::fit_log_series(excess, window, [](double k) { return std::log(k); });
}

/// Fits log(excess_k) = slope * k + intercept.
inline SlopeFit fit_exponential(std::span<const double> excess, const FitWindow& window = {}) {
  return detail::fit_log_series(excess, window, [](double k) { return k; });
}

}  // namespace gilbert
