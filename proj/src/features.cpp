// Copyright 2026 awe-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "awe/features.hpp"

#include <cmath>
#include <stdexcept>

namespace awe {

Vec DownsampleEmbed(const Segment& segment, int n_keep) {
  const int T = segment.NumFrames();
  const int D = segment.Dim();
  if (T < 2) throw std::invalid_argument("downsample_embed requires T >= 2");
  if (n_keep < 2) throw std::invalid_argument("n_keep must be >= 2");

  Vec out(static_cast<Eigen::Index>(n_keep) * D);
  for (int i = 0; i < n_keep; ++i) {
    double p = static_cast<double>(i) * (T - 1) / (n_keep - 1);
    int lo = static_cast<int>(std::floor(p));
    int hi = std::min(lo + 1, T - 1);
    double frac = p - lo;
    for (int d = 0; d < D; ++d) {
      out[static_cast<Eigen::Index>(i) * D + d] =
          (1.0 - frac) * segment.frames(lo, d) + frac * segment.frames(hi, d);
    }
  }
  return out;
}

Segment AppendDeltas(const Segment& segment, int window) {
  const int T = segment.NumFrames();
  const int D = segment.Dim();
  if (T < 2) throw std::invalid_argument("append_deltas requires T >= 2");
  if (window < 1) throw std::invalid_argument("window must be >= 1");

  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;

  auto deltas = [&](const Mat& x) {
    Mat d(T, D);
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < D; ++c) {
        double acc = 0.0;
        for (int n = 1; n <= window; ++n) {
          int fwd = std::min(t + n, T - 1);
          int bwd = std::max(t - n, 0);
          acc += n * (x(fwd, c) - x(bwd, c));
        }
        d(t, c) = acc / denom;
      }
    }
    return d;
  };

  Mat d1 = deltas(segment.frames);
  Mat d2 = deltas(d1);

  Segment out;
  out.frames.resize(T, 3 * D);
  out.frames << segment.frames, d1, d2;
  out.meta = segment.meta;
  return out;
}

}  // namespace awe
