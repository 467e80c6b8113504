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

#ifndef AWE_DTW_HPP_
#define AWE_DTW_HPP_

#include "awe/corpus.hpp"

namespace awe {

// Cosine distance between two frames; similarity of an all-zero frame is 0.
double FrameCosineDistance(const Vec& u, const Vec& v);

// Minimum accumulated cosine frame cost over monotone alignments with steps
// {(1,0),(0,1),(1,1)}. When normalize is set (the default) the minimal total
// is divided by its path length; among equal-cost paths the shortest wins.
double DtwCost(const Segment& a, const Segment& b, bool normalize = true);

}  // namespace awe

#endif  // AWE_DTW_HPP_
