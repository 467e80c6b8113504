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

#ifndef AWE_NN_HPP_
#define AWE_NN_HPP_

#include <functional>
#include <string>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/rng.hpp"

namespace awe {

// GRU convention: the reset gate multiplies h_{t-1} before the recurrent
// matmul of the candidate state.
//   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//   hc_t = tanh(Wh x_t + Uh (r_t . h_{t-1}) + bh)
//   h_t = (1 - z_t) . h_{t-1} + z_t . hc_t
struct GruLayerParams {
  Mat Wz, Wr, Wh;  // H x I
  Mat Uz, Ur, Uh;  // H x H
  Vec bz, br, bh;  // H

  int input_size() const { return static_cast<int>(Wz.cols()); }
  int hidden_size() const { return static_cast<int>(Wz.rows()); }

  // Glorot-uniform weights, zero biases.
  static GruLayerParams Init(int input, int hidden, Rng& rng);
  static GruLayerParams Zeros(int input, int hidden);
};

struct LinearParams {
  Mat W;  // out x in
  Vec b;  // out

  int input_size() const { return static_cast<int>(W.cols()); }
  int output_size() const { return static_cast<int>(W.rows()); }

  static LinearParams Init(int input, int output, Rng& rng);
  static LinearParams Zeros(int input, int output);
};

// Flat view of one parameter tensor; the uniform contract shared by the
// optimizer and the gradient checker.
struct ParamRef {
  std::string name;
  double* data = nullptr;
  Eigen::Index size = 0;
};

class ParamList {
 public:
  void Add(const std::string& name, Mat& m) { refs_.push_back({name, m.data(), m.size()}); }
  void Add(const std::string& name, Vec& v) { refs_.push_back({name, v.data(), v.size()}); }
  void Add(const ParamList& other) {
    refs_.insert(refs_.end(), other.refs_.begin(), other.refs_.end());
  }
  const std::vector<ParamRef>& refs() const { return refs_; }
  Eigen::Index TotalSize() const;

 private:
  std::vector<ParamRef> refs_;
};

ParamList CollectParams(const std::string& prefix, GruLayerParams& p);
ParamList CollectParams(const std::string& prefix, LinearParams& p);

struct GruCache {
  Mat x;             // T x I
  Mat h;             // T x H
  Mat z, r, hc;      // T x H
  Vec h0;
};

// Returns the T x H matrix of hidden states.
Mat GruForward(const GruLayerParams& p, const Mat& inputs, const Vec& h0,
               GruCache* cache = nullptr);

// dh holds the external gradient w.r.t. every hidden state row. Parameter
// gradients are accumulated into g; returns gradient w.r.t. the inputs.
Mat GruBackward(const GruLayerParams& p, const GruCache& cache, const Mat& dh,
                GruLayerParams& g, Vec* dh0 = nullptr);

struct EncoderCache {
  std::vector<GruCache> layers;
  Vec top_last;  // final hidden state of the top layer
};

// Stacked GRU encoder followed by a linear transform of the final hidden
// state. Initial hidden states are zero.
Vec EncoderEmbed(const std::vector<GruLayerParams>& stack, const LinearParams& proj,
                 const Mat& frames, EncoderCache* cache = nullptr);

void EncoderBackward(const std::vector<GruLayerParams>& stack, const LinearParams& proj,
                     const EncoderCache& cache, const Vec& dz,
                     std::vector<GruLayerParams>& gstack, LinearParams& gproj);

struct DecoderCache {
  std::vector<GruCache> layers;
  Mat top_h;  // T' x H
};

// Conditioned decoder: every step consumes the same conditioning vector
// (embedding, optionally with a language embedding appended); per-step
// output is a linear map of the top hidden state.
Mat DecoderForward(const std::vector<GruLayerParams>& stack, const LinearParams& out,
                   const Vec& cond, int steps, DecoderCache* cache = nullptr);

// dF is the gradient w.r.t. the T' x D output matrix. dcond receives the
// gradient w.r.t. the conditioning vector.
void DecoderBackward(const std::vector<GruLayerParams>& stack, const LinearParams& out,
                     const DecoderCache& cache, const Mat& dF,
                     std::vector<GruLayerParams>& gstack, LinearParams& gout, Vec* dcond);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Bias-corrected update in place. Throws on non-finite gradients.
  void Step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads);

  long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

// Central-difference check of an analytic gradient. `loss` re-evaluates the
// loss at the current parameter values; `analytic` holds the gradient under
// test. Returns the max relative error |a-n| / max(1e-8, |a|+|n|).
double GradCheck(const std::function<double()>& loss, const std::vector<ParamRef>& params,
                 const std::vector<ParamRef>& analytic, double h = 1e-5);

}  // namespace awe

#endif  // AWE_NN_HPP_
