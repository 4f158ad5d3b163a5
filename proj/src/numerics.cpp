#include "rgreen/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rgreen {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

std::size_t uniform_index(Rng& rng, std::size_t n) noexcept {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

MinimizeResult nelder_mead_2d(const std::function<double(double, double)>& fn,
                              std::array<double, 2> start, double step, double xtol,
                              int max_iter) {
  using Vec = std::array<double, 2>;
  std::array<Vec, 3> s{start, Vec{start[0] + step, start[1]}, Vec{start[0], start[1] + step}};
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) f[i] = fn(s[i][0], s[i][1]);

  auto order = [&] {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2 - i; ++j)
        if (f[j + 1] < f[j]) {
          std::swap(f[j], f[j + 1]);
          std::swap(s[j], s[j + 1]);
        }
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    order();
    double size = 0.0;
    for (int i = 1; i < 3; ++i)
      size = std::max(size, std::hypot(s[i][0] - s[0][0], s[i][1] - s[0][1]));
    if (size < xtol) break;

    const Vec c{(s[0][0] + s[1][0]) / 2, (s[0][1] + s[1][1]) / 2};
    auto along = [&](double t) { return Vec{c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])}; };

    const Vec r = along(-1.0);
    const double fr = fn(r[0], r[1]);
    if (fr < f[0]) {
      const Vec e = along(-2.0);
      const double fe = fn(e[0], e[1]);
      if (fe < fr) {
        s[2] = e;
        f[2] = fe;
      } else {
        s[2] = r;
        f[2] = fr;
      }
    } else if (fr < f[1]) {
      s[2] = r;
      f[2] = fr;
    } else {
      const bool outside = fr < f[2];
      const Vec k = along(outside ? -0.5 : 0.5);
      const double fk = fn(k[0], k[1]);
      if (fk < (outside ? fr : f[2])) {
        s[2] = k;
        f[2] = fk;
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i] = Vec{(s[i][0] + s[0][0]) / 2, (s[i][1] + s[0][1]) / 2};
          f[i] = fn(s[i][0], s[i][1]);
        }
      }
    }
  }
  order();
  return {s[0], f[0], it};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  if (!weights.empty() && weights.size() != x.size())
    throw std::invalid_argument("fit_line: weight count mismatch");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
    syy += w * (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace rgreen
