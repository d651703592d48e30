#include "resp/emd.hpp"

#include <cmath>
#include <cstdlib>

#include "resp/error.hpp"

namespace resp::emd {
namespace {

constexpr int kExtendedSiftFactor = 20;

// Natural cubic spline through (t, y), evaluated at 0..n-1.
std::vector<double> natural_spline(const std::vector<double>& t, const std::vector<double>& y,
                                   std::size_t n) {
  const std::size_t m = t.size();
  std::vector<double> second(m, 0.0);
  if (m > 2) {
    // Thomas algorithm on the interior equations; second[0] = second[m-1] = 0.
    std::vector<double> c(m, 0.0), d(m, 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double h0 = t[i] - t[i - 1];
      const double h1 = t[i + 1] - t[i];
      const double a = h0 / 6.0;
      const double b = (h0 + h1) / 3.0;
      const double cc = h1 / 6.0;
      const double rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = m - 2; i >= 1; --i) {
      second[i] = d[i] - c[i] * second[i + 1];
      if (i == 1) break;
    }
  }
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const double p = static_cast<double>(s);
    while (seg + 2 < m && p > t[seg + 1]) ++seg;
    const double h = t[seg + 1] - t[seg];
    const double a = (t[seg + 1] - p) / h;
    const double b = (p - t[seg]) / h;
    out[s] = a * y[seg] + b * y[seg + 1] +
             ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * h * h / 6.0;
  }
  return out;
}

bool is_imf(std::span<const double> h) {
  const Extrema e = find_extrema(h);
  const auto extrema = static_cast<long long>(e.maxima.size() + e.minima.size());
  const auto crossings = static_cast<long long>(count_zero_crossings(h));
  return std::llabs(extrema - crossings) <= 1;
}

}  // namespace

Extrema find_extrema(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorKind::TooShort, "extrema need at least 3 samples");
  Extrema out;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (i > 0 && j + 1 < n) {
      const double v = x[i];
      if (x[i - 1] < v && x[j + 1] < v) out.maxima.push_back((i + j) / 2);
      if (x[i - 1] > v && x[j + 1] > v) out.minima.push_back((i + j) / 2);
    }
    i = j + 1;
  }
  return out;
}

std::size_t count_zero_crossings(std::span<const double> x) {
  std::size_t count = 0;
  int prev = 0;
  for (double v : x) {
    const int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

std::vector<double> envelope(std::span<const double> x, std::span<const std::size_t> idx) {
  const std::size_t n = x.size();
  if (idx.size() < 2) throw Error(ErrorKind::InsufficientExtrema, "envelope needs 2 extrema");
  if (idx.size() == 2) {
    const double t0 = static_cast<double>(idx[0]);
    const double t1 = static_cast<double>(idx[1]);
    const double slope = (x[idx[1]] - x[idx[0]]) / (t1 - t0);
    std::vector<double> out(n);
    for (std::size_t s = 0; s < n; ++s) out[s] = x[idx[0]] + slope * (static_cast<double>(s) - t0);
    return out;
  }

  const std::size_t m = idx.size();
  const double last = static_cast<double>(n - 1);
  std::vector<double> t, y;
  t.reserve(m + 4);
  y.reserve(m + 4);
  for (std::size_t k : {std::size_t{1}, std::size_t{0}}) {
    const double pos = -static_cast<double>(idx[k]);
    if (pos < static_cast<double>(idx[0]) && (t.empty() || pos > t.back())) {
      t.push_back(pos);
      y.push_back(x[idx[k]]);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    t.push_back(static_cast<double>(idx[k]));
    y.push_back(x[idx[k]]);
  }
  for (std::size_t k : {m - 1, m - 2}) {
    const double pos = 2.0 * last - static_cast<double>(idx[k]);
    if (pos > t.back()) {
      t.push_back(pos);
      y.push_back(x[idx[k]]);
    }
  }
  return natural_spline(t, y, n);
}

ImfSet decompose(std::span<const double> x, const SiftOptions& opts) {
  const std::size_t n = x.size();
  if (n < 16) throw Error(ErrorKind::TooShort, "decomposition needs at least 16 samples");

  ImfSet set;
  set.source_len = n;
  std::vector<double> remainder(x.begin(), x.end());
  while (set.imfs.size() < opts.max_imfs) {
    const Extrema e = find_extrema(remainder);
    if (e.maxima.size() < 2 || e.minima.size() < 2) break;

    std::vector<double> h = remainder;
    // Past max_iterations, sifting continues only while the IMF condition fails.
    const int extended = kExtendedSiftFactor * opts.max_iterations;
    for (int it = 0; it < extended; ++it) {
      if (it >= opts.max_iterations && is_imf(h)) break;
      const Extrema he = find_extrema(h);
      if (he.maxima.size() < 2 || he.minima.size() < 2) break;
      const auto upper = envelope(h, he.maxima);
      const auto lower = envelope(h, he.minima);
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double mean = 0.5 * (upper[s] + lower[s]);
        num += mean * mean;
        den += h[s] * h[s];
        h[s] -= mean;
      }
      const double sd = den > 0.0 ? num / den : 0.0;
      if (sd < opts.sd_threshold && is_imf(h)) break;
    }
    // Later modes that still fail the IMF condition stay in the residue.
    if (!set.imfs.empty() && !is_imf(h)) break;
    for (std::size_t s = 0; s < n; ++s) remainder[s] -= h[s];
    set.imfs.push_back(std::move(h));
  }
  set.residue = std::move(remainder);
  return set;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "pearson on unequal lengths");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Selection select_max_correlated_imf(std::span<const double> x, const ImfSet& set) {
  if (set.imfs.empty()) throw Error(ErrorKind::EmptyImfSet, "no IMFs to select from");
  Selection best{1, pearson(x, set.imfs[0])};
  for (std::size_t i = 1; i < set.imfs.size(); ++i) {
    const double r = pearson(x, set.imfs[i]);
    if (std::abs(r) > std::abs(best.coefficient) + 1e-12) best = {i + 1, r};
  }
  return best;
}

}  // namespace resp::emd
