// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

namespace lehopp {

namespace {

constexpr float kFar = std::numeric_limits<float>::max();

// (distance, row, col) min-heap entry; the row/col tie-break pins the
// marching order so runs are reproducible.
using HeapEntry = std::tuple<double, int, int>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

} // namespace

ScalarMap fmm_distance(const BitMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  require(mask.kept_count() > 0, Errc::empty_selection,
          "distance field undefined for an all-pruned mask");

  ScalarMap dist = ScalarMap::filled(w, h, kFar);
  std::vector<uint8_t> done(static_cast<size_t>(w) * h, 0);
  MinHeap heap;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) {
        dist.at(x, y) = 0.0f;
        heap.emplace(0.0, y, x);
      }
    }
  }

  const int dx[4] = {0, 0, -1, 1};
  const int dy[4] = {-1, 1, 0, 0};
  while (!heap.empty()) {
    const auto [d, y, x] = heap.top();
    heap.pop();
    const size_t idx = static_cast<size_t>(y) * w + static_cast<size_t>(x);
    if (done[idx]) {
      continue;
    }
    done[idx] = 1;
    for (int n = 0; n < 4; ++n) {
      const int nx = x + dx[n];
      const int ny = y + dy[n];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) {
        continue;
      }
      const double cand = d + 1.0;
      if (cand < dist.at(nx, ny)) {
        dist.at(nx, ny) = static_cast<float>(cand);
        heap.emplace(cand, ny, nx);
      }
    }
  }
  return dist;
}

namespace {

void check_shapes(const Image& image, const BitMask& mask) {
  require(image.width == mask.width && image.height == mask.height, Errc::shape_mismatch,
          "image and mask disagree on dimensions");
}

} // namespace

Image telea_inpaint(const Image& image, const BitMask& mask, const InpaintConfig& cfg) {
  check_shapes(image, mask);
  require(cfg.radius >= 1, Errc::invalid_argument, "inpaint radius must be >= 1");
  if (mask.pruned_count() == 0) {
    return image;
  }
  const ScalarMap dist = fmm_distance(mask); // errors on all-pruned masks

  const int w = image.width;
  const int h = image.height;
  Image out = image;
  std::vector<uint8_t> known(mask.bits.begin(), mask.bits.end());

  // Fill order: increasing distance from the kept set, (row, col) on ties.
  std::vector<std::tuple<float, int, int>> order;
  order.reserve(mask.pruned_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) {
        order.emplace_back(dist.at(x, y), y, x);
      }
    }
  }
  std::sort(order.begin(), order.end());

  auto dist_gradient = [&](int x, int y, double& gx, double& gy) {
    const double here = dist.at(x, y);
    const double left = x > 0 ? dist.at(x - 1, y) : here;
    const double right = x < w - 1 ? dist.at(x + 1, y) : here;
    const double up = y > 0 ? dist.at(x, y - 1) : here;
    const double down = y < h - 1 ? dist.at(x, y + 1) : here;
    gx = (right - left) * 0.5;
    gy = (down - up) * 0.5;
    const double n = std::hypot(gx, gy);
    if (n > 1e-12) {
      gx /= n;
      gy /= n;
    } else {
      gx = 1.0;
      gy = 0.0;
    }
  };

  const double r2 = static_cast<double>(cfg.radius) * cfg.radius;
  for (const auto& [d, y, x] : order) {
    double gx;
    double gy;
    dist_gradient(x, y, gx, gy);

    double wsum = 0.0;
    double csum[3] = {0.0, 0.0, 0.0};
    for (int qy = std::max(0, y - cfg.radius); qy <= std::min(h - 1, y + cfg.radius); ++qy) {
      for (int qx = std::max(0, x - cfg.radius); qx <= std::min(w - 1, x + cfg.radius); ++qx) {
        if (!known[static_cast<size_t>(qy) * w + static_cast<size_t>(qx)]) {
          continue;
        }
        const double vx = static_cast<double>(x - qx);
        const double vy = static_cast<double>(y - qy);
        const double len2 = vx * vx + vy * vy;
        if (len2 == 0.0 || len2 > r2) {
          continue;
        }
        const double len = std::sqrt(len2);
        // Telea weight: direction alignment, inverse squared distance,
        // and level-set proximity; floors keep the sum strictly positive.
        const double dir = std::max(std::abs((vx * gx + vy * gy) / len), 1e-6);
        const double dst = 1.0 / len2;
        const double lev = 1.0 / (1.0 + std::abs(static_cast<double>(dist.at(x, y)) -
                                                 static_cast<double>(dist.at(qx, qy))));
        const double weight = dir * dst * lev;
        wsum += weight;
        for (int c = 0; c < 3; ++c) {
          csum[c] += weight * out.at(qx, qy, c);
        }
      }
    }
    if (wsum > 0.0) {
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = static_cast<float>(csum[c] / wsum);
      }
    }
    known[static_cast<size_t>(y) * w + static_cast<size_t>(x)] = 1;
  }
  return out;
}

Image diffusion_inpaint(const Image& image, const BitMask& mask, const InpaintConfig& cfg) {
  check_shapes(image, mask);
  if (mask.pruned_count() == 0) {
    return image;
  }
  require(mask.kept_count() > 0, Errc::empty_selection,
          "diffusion fill needs at least one kept pixel");

  const int w = image.width;
  const int h = image.height;

  // Start pruned pixels from the kept mean so iterates stay in range.
  double mean[3] = {0.0, 0.0, 0.0};
  size_t kept = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) {
        ++kept;
        for (int c = 0; c < 3; ++c) {
          mean[c] += image.at(x, y, c);
        }
      }
    }
  }
  for (double& m : mean) {
    m /= static_cast<double>(kept);
  }

  Image cur = image;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) {
        for (int c = 0; c < 3; ++c) {
          cur.at(x, y, c) = static_cast<float>(mean[c]);
        }
      }
    }
  }

  Image next = cur;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    double max_delta = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (mask.at(x, y)) {
          continue;
        }
        for (int c = 0; c < 3; ++c) {
          double sum = 0.0;
          int count = 0;
          if (x > 0) {
            sum += cur.at(x - 1, y, c);
            ++count;
          }
          if (x < w - 1) {
            sum += cur.at(x + 1, y, c);
            ++count;
          }
          if (y > 0) {
            sum += cur.at(x, y - 1, c);
            ++count;
          }
          if (y < h - 1) {
            sum += cur.at(x, y + 1, c);
            ++count;
          }
          const double v = sum / count;
          max_delta = std::max(max_delta, std::abs(v - cur.at(x, y, c)));
          next.at(x, y, c) = static_cast<float>(v);
        }
      }
    }
    std::swap(cur, next);
    if (max_delta <= cfg.tol) {
      return cur;
    }
  }
  fail(Errc::non_convergence, "diffusion fill did not converge within " +
                                  std::to_string(cfg.max_iters) + " iterations");
}

} // namespace lehopp
