// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "evalkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "fsutil.hpp"
#include "rng.hpp"

namespace lehopp {

BitMask random_block_mask(int width, int height, int block, double gamma, uint64_t seed) {
  require(block >= 1, Errc::invalid_argument, "block size must be >= 1");
  require(gamma >= 0.0 && gamma <= 1.0, Errc::invalid_argument, "gamma must lie in [0, 1]");

  const size_t pixels = static_cast<size_t>(width) * static_cast<size_t>(height);
  const size_t k = static_cast<size_t>(std::llround(gamma * static_cast<double>(pixels)));
  BitMask mask = BitMask::filled(width, height, 1);
  if (k == 0) {
    return mask;
  }

  const int cells_x = (width + block - 1) / block;
  const int cells_y = (height + block - 1) / block;
  std::vector<int> cells(static_cast<size_t>(cells_x) * cells_y);
  for (size_t i = 0; i < cells.size(); ++i) {
    cells[i] = static_cast<int>(i);
  }
  SplitMix64 rng(seed);
  rng.shuffle(cells);

  size_t pruned = 0;
  for (int cell : cells) {
    if (pruned >= k) {
      break;
    }
    const int cx = (cell % cells_x) * block;
    const int cy = (cell / cells_x) * block;
    const int x_end = std::min(cx + block, width);
    const int y_end = std::min(cy + block, height);
    // Row-major within the cell; stops mid-cell when k is reached.
    for (int y = cy; y < y_end && pruned < k; ++y) {
      for (int x = cx; x < x_end && pruned < k; ++x) {
        mask.at(x, y) = 0;
        ++pruned;
      }
    }
  }
  return mask;
}

double psnr(const Image& a, const Image& b, double peak) {
  require(a.width == b.width && a.height == b.height, Errc::shape_mismatch,
          "psnr operands disagree on dimensions");
  require(peak > 0.0, Errc::invalid_argument, "peak must be positive");
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(static_cast<size_t>(window));
  const double mid = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - mid;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (double& v : k) {
    v /= sum;
  }
  return k;
}

std::vector<double> luma(const Image& img) {
  std::vector<double> out(img.pixel_count());
  for (size_t px = 0; px < out.size(); ++px) {
    out[px] = (static_cast<double>(img.data[px * 3]) + static_cast<double>(img.data[px * 3 + 1]) +
               static_cast<double>(img.data[px * 3 + 2])) /
              3.0;
  }
  return out;
}

// Separable Gaussian filter restricted to positions where the window fits.
// Output is (w - window + 1) x (h - window + 1).
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h,
                                 const std::vector<double>& kernel) {
  const int window = static_cast<int>(kernel.size());
  const int out_w = w - window + 1;
  const int out_h = h - window + 1;
  std::vector<double> tmp(static_cast<size_t>(out_w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double s = 0.0;
      for (int i = 0; i < window; ++i) {
        s += kernel[static_cast<size_t>(i)] * in[static_cast<size_t>(y) * w + x + i];
      }
      tmp[static_cast<size_t>(y) * out_w + x] = s;
    }
  }
  std::vector<double> out(static_cast<size_t>(out_w) * out_h, 0.0);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double s = 0.0;
      for (int i = 0; i < window; ++i) {
        s += kernel[static_cast<size_t>(i)] * tmp[static_cast<size_t>(y + i) * out_w + x];
      }
      out[static_cast<size_t>(y) * out_w + x] = s;
    }
  }
  return out;
}

} // namespace

double ssim(const Image& a, const Image& b, int window, double k1, double k2, double peak) {
  require(a.width == b.width && a.height == b.height, Errc::shape_mismatch,
          "ssim operands disagree on dimensions");
  require(a.width >= window && a.height >= window, Errc::invalid_argument,
          "image smaller than the ssim window");

  const std::vector<double> kernel = gaussian_kernel(window, 1.5);
  const std::vector<double> la = luma(a);
  const std::vector<double> lb = luma(b);
  const int w = a.width;
  const int h = a.height;

  std::vector<double> laa(la.size());
  std::vector<double> lbb(lb.size());
  std::vector<double> lab(la.size());
  for (size_t i = 0; i < la.size(); ++i) {
    laa[i] = la[i] * la[i];
    lbb[i] = lb[i] * lb[i];
    lab[i] = la[i] * lb[i];
  }

  const std::vector<double> mu_a = filter_valid(la, w, h, kernel);
  const std::vector<double> mu_b = filter_valid(lb, w, h, kernel);
  const std::vector<double> m_aa = filter_valid(laa, w, h, kernel);
  const std::vector<double> m_bb = filter_valid(lbb, w, h, kernel);
  const std::vector<double> m_ab = filter_valid(lab, w, h, kernel);

  const double c1 = (k1 * peak) * (k1 * peak);
  const double c2 = (k2 * peak) * (k2 * peak);
  double sum = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = m_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    sum += num / den;
  }
  return sum / static_cast<double>(mu_a.size());
}

PixelRateReport pixel_rate(int views, int width, int height, double fps, double gamma) {
  require(views > 0 && width > 0 && height > 0 && fps > 0.0, Errc::invalid_argument,
          "pixel rate arguments must be positive");
  require(gamma >= 0.0 && gamma <= 1.0, Errc::invalid_argument, "gamma must lie in [0, 1]");
  PixelRateReport r;
  r.views = views;
  r.width = width;
  r.height = height;
  r.fps = fps;
  r.gamma = gamma;
  r.raw_mpx_s = static_cast<double>(views) * width * height * fps / 1e6;
  r.pruned_mpx_s = r.raw_mpx_s * (1.0 - gamma);
  r.limit_mpx_s = 32.0 * (fps / 30.0);
  r.within_limit = r.pruned_mpx_s <= r.limit_mpx_s;
  return r;
}

namespace {

// Least-squares cubic fit of y over x, solved by Gaussian elimination on
// the normal equations. x is centered by the caller for conditioning.
std::array<double, 4> fit_cubic(const std::vector<double>& x, const std::vector<double>& y) {
  double a[4][5] = {};
  for (size_t i = 0; i < x.size(); ++i) {
    double powers[7] = {1, 0, 0, 0, 0, 0, 0};
    for (int p = 1; p < 7; ++p) {
      powers[p] = powers[p - 1] * x[i];
    }
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        a[r][c] += powers[r + c];
      }
      a[r][4] += powers[r] * y[i];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
        pivot = r;
      }
    }
    std::swap(a[col], a[pivot]);
    require(std::abs(a[col][col]) > 1e-12, Errc::invalid_argument,
            "degenerate rate-distortion curve");
    for (int r = 0; r < 4; ++r) {
      if (r == col) {
        continue;
      }
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 5; ++c) {
        a[r][c] -= f * a[col][c];
      }
    }
  }
  return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]};
}

double integrate_cubic(const std::array<double, 4>& c, double lo, double hi) {
  auto antiderivative = [&](double x) {
    return c[0] * x + c[1] * x * x / 2.0 + c[2] * x * x * x / 3.0 + c[3] * x * x * x * x / 4.0;
  };
  return antiderivative(hi) - antiderivative(lo);
}

void validate_curve(std::vector<RDPoint>& curve, const char* name) {
  require(curve.size() >= 4, Errc::invalid_argument,
          std::string(name) + " curve needs at least 4 points");
  std::sort(curve.begin(), curve.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.rate_kbps < b.rate_kbps; });
  for (size_t i = 0; i < curve.size(); ++i) {
    require(curve[i].rate_kbps > 0.0, Errc::invalid_argument,
            std::string(name) + " curve has a non-positive rate");
    require(std::isfinite(curve[i].psnr_db), Errc::invalid_argument,
            std::string(name) + " curve has a non-finite quality");
    if (i > 0) {
      require(curve[i].psnr_db > curve[i - 1].psnr_db, Errc::invalid_argument,
              std::string(name) + " curve is not monotone in quality");
    }
  }
}

} // namespace

double bd_rate(std::vector<RDPoint> anchor, std::vector<RDPoint> test) {
  validate_curve(anchor, "anchor");
  validate_curve(test, "test");

  const double lo = std::max(anchor.front().psnr_db, test.front().psnr_db);
  const double hi = std::min(anchor.back().psnr_db, test.back().psnr_db);
  require(hi > lo, Errc::invalid_argument, "quality ranges do not overlap");

  // Center quality for numerical conditioning of the cubic fit.
  const double shift = 0.5 * (lo + hi);
  auto fit = [&](const std::vector<RDPoint>& curve) {
    std::vector<double> q;
    std::vector<double> lr;
    for (const RDPoint& p : curve) {
      q.push_back(p.psnr_db - shift);
      lr.push_back(std::log10(p.rate_kbps));
    }
    return fit_cubic(q, lr);
  };
  const std::array<double, 4> ca = fit(anchor);
  const std::array<double, 4> ct = fit(test);

  const double span = hi - lo;
  const double avg_diff =
      (integrate_cubic(ct, lo - shift, hi - shift) - integrate_cubic(ca, lo - shift, hi - shift)) /
      span;
  return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

std::map<std::string, std::vector<RDPoint>> read_rd_csv(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::malformed_header,
          "empty RD csv: " + path.string());
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  require(line == "label,rate_kbps,psnr_db", Errc::malformed_header,
          "bad RD csv header in " + path.string() + ": '" + line + "'");

  std::map<std::string, std::vector<RDPoint>> curves;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const size_t c1 = line.find(',');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    require(c2 != std::string::npos, Errc::malformed_header,
            "bad RD csv row at line " + std::to_string(line_no) + " in " + path.string());
    const std::string label = line.substr(0, c1);
    try {
      RDPoint p;
      p.rate_kbps = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      p.psnr_db = std::stod(line.substr(c2 + 1));
      curves[label].push_back(p);
    } catch (const std::exception&) {
      fail(Errc::malformed_header,
           "bad RD csv number at line " + std::to_string(line_no) + " in " + path.string());
    }
  }
  require(!curves.empty(), Errc::malformed_header, "no RD points in " + path.string());
  return curves;
}

double bd_rate_from_files(const std::filesystem::path& anchor_csv,
                          const std::filesystem::path& test_csv) {
  auto pick = [](const std::filesystem::path& p) {
    auto curves = read_rd_csv(p);
    require(curves.size() == 1, Errc::invalid_argument,
            p.string() + " holds " + std::to_string(curves.size()) +
                " labeled curves; expected exactly one");
    return curves.begin()->second;
  };
  return bd_rate(pick(anchor_csv), pick(test_csv));
}

} // namespace lehopp
