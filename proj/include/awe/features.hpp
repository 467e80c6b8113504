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

#ifndef AWE_FEATURES_HPP_
#define AWE_FEATURES_HPP_

#include "awe/corpus.hpp"

namespace awe {

// Fixed-dimensional embedding of a segment by keeping n_keep equally spaced
// frames with linear interpolation, flattened frame-major (n_keep * D dims).
Vec DownsampleEmbed(const Segment& segment, int n_keep = 10);

// Appends regression deltas and double deltas (edge frames replicated),
// tripling the frame width.
Segment AppendDeltas(const Segment& segment, int window = 2);

}  // namespace awe

#endif  // AWE_FEATURES_HPP_
