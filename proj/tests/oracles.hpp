// Copyright 2026 The advdenoise Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference implementations used only by the tests. They are
// written for clarity, not speed, and share no code with the library.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "advdenoise/detection_eval.hpp"
#include "advdenoise/perlin.hpp"
#include "advdenoise/tensor.hpp"

namespace advdenoise::oracle {

// Direct 3x3 same-padding cross-correlation.
template <typename T>
Tensor4<T> naive_conv(const Tensor4<T>& in, const Tensor4<T>& weight,
                      const std::vector<T>& bias) {
  const Shape4 s = in.shape();
  const std::size_t cout = weight.shape().n;
  Tensor4<T> out(Shape4{s.n, cout, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) {
          double acc = bias[o];
          for (std::size_t c = 0; c < s.c; ++c)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const long iy = static_cast<long>(y) + ky - 1;
                const long ix = static_cast<long>(x) + kx - 1;
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(s.h) ||
                    ix >= static_cast<long>(s.w))
                  continue;
                acc += static_cast<double>(in.at(n, c, iy, ix)) *
                       static_cast<double>(weight.at(o, c, ky, kx));
              }
          out.at(n, o, y, x) = static_cast<T>(acc);
        }
  return out;
}

// Relative error with an absolute floor so that pairs of near-zero values
// are compared on an absolute scale.
inline double rel_err(double analytic, double numeric, double floor = 1e-7) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Central difference of f with respect to x[i], restoring x afterwards.
inline double central_diff(std::vector<double>& x, std::size_t i,
                           const std::function<double()>& f, double step = 1e-5) {
  const double saved = x[i];
  x[i] = saved + step;
  const double plus = f();
  x[i] = saved - step;
  const double minus = f();
  x[i] = saved;
  return (plus - minus) / (2.0 * step);
}

template <typename T>
Tensor4<T> random_tensor(Shape4 s, std::mt19937_64& rng, double lo = -1.0,
                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor4<T> t(s);
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

inline double dot(const Tensor4<double>& a, const Tensor4<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gradient noise written from the textbook description: corner gradient
// vectors dotted with offsets, blended by the quintic smoothstep.
inline double reference_perlin(double x, double y, double period,
                               const PermutationTable& table) {
  static constexpr std::array<std::array<double, 2>, 8> kGrad = {{
      {1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  const auto& p = table.values();
  const double px = x / period, py = y / period;
  const long cx = static_cast<long>(std::floor(px));
  const long cy = static_cast<long>(std::floor(py));
  const double dx = px - static_cast<double>(cx), dy = py - static_cast<double>(cy);
  auto smooth = [](double t) {
    return 6 * std::pow(t, 5) - 15 * std::pow(t, 4) + 10 * std::pow(t, 3);
  };
  double total = 0.0;
  for (int j = 0; j <= 1; ++j) {
    for (int i = 0; i <= 1; ++i) {
      const int xi = static_cast<int>(cx & 255), yi = static_cast<int>(cy & 255);
      const int h = p[p[xi + i] + yi + j] & 7;
      const double ox = dx - i, oy = dy - j;
      const double wx = i ? smooth(dx) : 1.0 - smooth(dx);
      const double wy = j ? smooth(dy) : 1.0 - smooth(dy);
      total += wx * wy * (kGrad[h][0] * ox + kGrad[h][1] * oy);
    }
  }
  return std::clamp(total, -1.0, 1.0);
}

// Brute-force COCO-style evaluator: per threshold, per category, score-sorted
// greedy matching against the best unused GT, then 101-point interpolated AP
// computed by scanning every PR point for each recall level.
inline double brute_iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

struct BruteResult {
  double map = 0.0;
  double map50 = 0.0;
  double map75 = 0.0;
};

inline BruteResult brute_force_map(const std::vector<DetectionBox>& dets,
                                   const std::vector<GroundTruthBox>& gts) {
  std::set<std::int64_t> cats;
  for (const auto& g : gts) cats.insert(g.category_id);
  std::array<double, 10> per_thr{};
  for (int t = 0; t < 10; ++t) {
    const double thr = (50.0 + 5.0 * t) / 100.0;
    double sum_ap = 0.0;
    for (std::int64_t cat : cats) {
      std::vector<DetectionBox> cd;
      for (const auto& d : dets)
        if (d.category_id == cat) cd.push_back(d);
      std::stable_sort(cd.begin(), cd.end(),
                       [](const auto& a, const auto& b) { return a.score > b.score; });
      std::vector<GroundTruthBox> cg;
      for (const auto& g : gts)
        if (g.category_id == cat) cg.push_back(g);
      std::vector<bool> used(cg.size(), false);
      std::vector<double> prec, rec;
      std::size_t tp = 0;
      for (std::size_t k = 0; k < cd.size(); ++k) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < cg.size(); ++g) {
          if (used[g] || cg[g].image_id != cd[k].image_id) continue;
          const double v = brute_iou(cd[k].bbox, cg[g].bbox);
          if (v >= thr && v > best_iou) {
            best_iou = v;
            best = static_cast<int>(g);
          }
        }
        if (best >= 0) {
          used[best] = true;
          ++tp;
        }
        prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
        rec.push_back(static_cast<double>(tp) / static_cast<double>(cg.size()));
      }
      double ap = 0.0;
      for (int r = 0; r <= 100; ++r) {
        const double level = r / 100.0;
        double best = 0.0;
        for (std::size_t k = 0; k < prec.size(); ++k)
          if (rec[k] >= level - 1e-12) best = std::max(best, prec[k]);
        ap += best;
      }
      sum_ap += ap / 101.0;
    }
    per_thr[t] = cats.empty() ? 0.0 : sum_ap / static_cast<double>(cats.size());
  }
  BruteResult r;
  for (double v : per_thr) r.map += v / 10.0;
  r.map50 = per_thr[0];
  r.map75 = per_thr[5];
  return r;
}

// Random small evaluation instance: up to 5 images, 3 categories, 8 GT boxes.
struct Instance {
  std::vector<GroundTruthBox> gts;
  std::vector<DetectionBox> dets;
  std::set<std::int64_t> image_ids;
};

inline Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_img(1, 5), n_cat(1, 3), n_gt(1, 8);
  std::uniform_real_distribution<double> pos(0.0, 60.0), size(4.0, 30.0),
      jitter(-6.0, 6.0), score(0.0, 1.0), coin(0.0, 1.0);
  Instance inst;
  const int images = n_img(rng), categories = n_cat(rng), count = n_gt(rng);
  for (int i = 1; i <= images; ++i) inst.image_ids.insert(i);
  auto pick = [&](int hi) { return std::uniform_int_distribution<int>(1, hi)(rng); };
  for (int k = 0; k < count; ++k) {
    inst.gts.push_back({pick(images), pick(categories), {pos(rng), pos(rng), size(rng), size(rng)}});
  }
  for (const auto& g : inst.gts) {
    const int copies = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int c = 0; c < copies; ++c) {
      BBox b{g.bbox.x + jitter(rng), g.bbox.y + jitter(rng),
             std::max(1.0, g.bbox.w + jitter(rng)), std::max(1.0, g.bbox.h + jitter(rng))};
      const std::int64_t cat = coin(rng) < 0.85 ? g.category_id : pick(categories);
      // Coarse scores produce ties, which exercise the ordering rule.
      inst.dets.push_back({g.image_id, cat, b, std::round(score(rng) * 10.0) / 10.0});
    }
  }
  const int spurious = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int k = 0; k < spurious; ++k) {
    inst.dets.push_back({pick(images), pick(categories),
                         {pos(rng), pos(rng), size(rng), size(rng)}, score(rng)});
  }
  std::shuffle(inst.dets.begin(), inst.dets.end(), rng);
  return inst;
}

}  // namespace advdenoise::oracle
