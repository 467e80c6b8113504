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

#include "awe/dtw.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace awe {

double FrameCosineDistance(const Vec& u, const Vec& v) {
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 1.0 - u.dot(v) / (nu * nv);
}

double DtwCost(const Segment& a, const Segment& b, bool normalize) {
  if (a.Dim() != b.Dim()) throw std::invalid_argument("dtw_cost: frame dimension mismatch");
  const int Ta = a.NumFrames();
  const int Tb = b.NumFrames();
  if (Ta < 1 || Tb < 1) throw std::invalid_argument("dtw_cost: empty segment");

  struct Cell {
    double cost;
    int len;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Cell> prev(static_cast<std::size_t>(Tb)), cur(static_cast<std::size_t>(Tb));

  auto better = [](const Cell& x, const Cell& y) {
    return x.cost < y.cost || (x.cost == y.cost && x.len < y.len);
  };

  for (int i = 0; i < Ta; ++i) {
    for (int j = 0; j < Tb; ++j) {
      double c = FrameCosineDistance(a.frames.row(i).transpose(), b.frames.row(j).transpose());
      Cell best{inf, 0};
      if (i == 0 && j == 0) {
        best = Cell{0.0, 0};
      } else {
        if (i > 0 && j > 0 && better(prev[static_cast<std::size_t>(j - 1)], best))
          best = prev[static_cast<std::size_t>(j - 1)];
        if (i > 0 && better(prev[static_cast<std::size_t>(j)], best))
          best = prev[static_cast<std::size_t>(j)];
        if (j > 0 && better(cur[static_cast<std::size_t>(j - 1)], best))
          best = cur[static_cast<std::size_t>(j - 1)];
      }
      cur[static_cast<std::size_t>(j)] = Cell{best.cost + c, best.len + 1};
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[static_cast<std::size_t>(Tb - 1)];
  return normalize ? end.cost / end.len : end.cost;
}

}  // namespace awe
