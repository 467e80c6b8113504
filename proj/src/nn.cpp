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

#include "awe/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace awe {

namespace {

inline Vec Sigmoid(const Vec& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

Mat GlorotUniform(int rows, int cols, Rng& rng) {
  double limit = std::sqrt(6.0 / (rows + cols));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.Uniform(-limit, limit);
  return m;
}

}  // namespace

GruLayerParams GruLayerParams::Init(int input, int hidden, Rng& rng) {
  GruLayerParams p;
  p.Wz = GlorotUniform(hidden, input, rng);
  p.Wr = GlorotUniform(hidden, input, rng);
  p.Wh = GlorotUniform(hidden, input, rng);
  p.Uz = GlorotUniform(hidden, hidden, rng);
  p.Ur = GlorotUniform(hidden, hidden, rng);
  p.Uh = GlorotUniform(hidden, hidden, rng);
  p.bz = Vec::Zero(hidden);
  p.br = Vec::Zero(hidden);
  p.bh = Vec::Zero(hidden);
  return p;
}

GruLayerParams GruLayerParams::Zeros(int input, int hidden) {
  GruLayerParams p;
  p.Wz = Mat::Zero(hidden, input);
  p.Wr = Mat::Zero(hidden, input);
  p.Wh = Mat::Zero(hidden, input);
  p.Uz = Mat::Zero(hidden, hidden);
  p.Ur = Mat::Zero(hidden, hidden);
  p.Uh = Mat::Zero(hidden, hidden);
  p.bz = Vec::Zero(hidden);
  p.br = Vec::Zero(hidden);
  p.bh = Vec::Zero(hidden);
  return p;
}

LinearParams LinearParams::Init(int input, int output, Rng& rng) {
  LinearParams p;
  p.W = GlorotUniform(output, input, rng);
  p.b = Vec::Zero(output);
  return p;
}

LinearParams LinearParams::Zeros(int input, int output) {
  LinearParams p;
  p.W = Mat::Zero(output, input);
  p.b = Vec::Zero(output);
  return p;
}

Eigen::Index ParamList::TotalSize() const {
  Eigen::Index total = 0;
  for (const ParamRef& r : refs_) total += r.size;
  return total;
}

ParamList CollectParams(const std::string& prefix, GruLayerParams& p) {
  ParamList list;
  list.Add(prefix + ".Wz", p.Wz);
  list.Add(prefix + ".Wr", p.Wr);
  list.Add(prefix + ".Wh", p.Wh);
  list.Add(prefix + ".Uz", p.Uz);
  list.Add(prefix + ".Ur", p.Ur);
  list.Add(prefix + ".Uh", p.Uh);
  list.Add(prefix + ".bz", p.bz);
  list.Add(prefix + ".br", p.br);
  list.Add(prefix + ".bh", p.bh);
  return list;
}

ParamList CollectParams(const std::string& prefix, LinearParams& p) {
  ParamList list;
  list.Add(prefix + ".W", p.W);
  list.Add(prefix + ".b", p.b);
  return list;
}

Mat GruForward(const GruLayerParams& p, const Mat& inputs, const Vec& h0, GruCache* cache) {
  const int T = static_cast<int>(inputs.rows());
  const int H = p.hidden_size();
  if (static_cast<int>(inputs.cols()) != p.input_size())
    throw std::invalid_argument("gru_forward: input width mismatch");
  if (static_cast<int>(h0.size()) != H)
    throw std::invalid_argument("gru_forward: h0 size mismatch");

  Mat h(T, H), zs(T, H), rs(T, H), hcs(T, H);
  Vec hprev = h0;
  for (int t = 0; t < T; ++t) {
    Vec x = inputs.row(t).transpose();
    Vec z = Sigmoid(p.Wz * x + p.Uz * hprev + p.bz);
    Vec r = Sigmoid(p.Wr * x + p.Ur * hprev + p.br);
    Vec hc = (p.Wh * x + p.Uh * (r.cwiseProduct(hprev)) + p.bh).array().tanh();
    Vec ht = (Vec::Ones(H) - z).cwiseProduct(hprev) + z.cwiseProduct(hc);
    h.row(t) = ht.transpose();
    zs.row(t) = z.transpose();
    rs.row(t) = r.transpose();
    hcs.row(t) = hc.transpose();
    hprev = ht;
  }
  if (cache) {
    cache->x = inputs;
    cache->h = h;
    cache->z = zs;
    cache->r = rs;
    cache->hc = hcs;
    cache->h0 = h0;
  }
  return h;
}

Mat GruBackward(const GruLayerParams& p, const GruCache& cache, const Mat& dh,
                GruLayerParams& g, Vec* dh0) {
  const int T = static_cast<int>(cache.x.rows());
  const int H = p.hidden_size();
  Mat dx(T, p.input_size());
  Vec carry = Vec::Zero(H);

  for (int t = T - 1; t >= 0; --t) {
    Vec hprev = (t == 0) ? cache.h0 : Vec(cache.h.row(t - 1).transpose());
    Vec z = cache.z.row(t).transpose();
    Vec r = cache.r.row(t).transpose();
    Vec hc = cache.hc.row(t).transpose();
    Vec x = cache.x.row(t).transpose();

    Vec dht = dh.row(t).transpose() + carry;

    Vec da_h = dht.cwiseProduct(z).cwiseProduct((1.0 - hc.array().square()).matrix());
    Vec da_z = dht.cwiseProduct(hc - hprev).cwiseProduct(z.cwiseProduct((Vec::Ones(H) - z)));

    Vec drh = p.Uh.transpose() * da_h;  // gradient w.r.t. r . hprev
    Vec dr = drh.cwiseProduct(hprev);
    Vec da_r = dr.cwiseProduct(r.cwiseProduct(Vec::Ones(H) - r));

    g.Wh += da_h * x.transpose();
    g.Uh += da_h * (r.cwiseProduct(hprev)).transpose();
    g.bh += da_h;
    g.Wz += da_z * x.transpose();
    g.Uz += da_z * hprev.transpose();
    g.bz += da_z;
    g.Wr += da_r * x.transpose();
    g.Ur += da_r * hprev.transpose();
    g.br += da_r;

    carry = dht.cwiseProduct(Vec::Ones(H) - z) + drh.cwiseProduct(r) +
            p.Uz.transpose() * da_z + p.Ur.transpose() * da_r;
    dx.row(t) = (p.Wz.transpose() * da_z + p.Wr.transpose() * da_r +
                 p.Wh.transpose() * da_h).transpose();
  }
  if (dh0) *dh0 = carry;
  return dx;
}

Vec EncoderEmbed(const std::vector<GruLayerParams>& stack, const LinearParams& proj,
                 const Mat& frames, EncoderCache* cache) {
  if (stack.empty()) throw std::invalid_argument("encoder stack must be non-empty");
  if (cache) cache->layers.resize(stack.size());
  Mat h = frames;
  for (std::size_t k = 0; k < stack.size(); ++k) {
    Vec h0 = Vec::Zero(stack[k].hidden_size());
    h = GruForward(stack[k], h, h0, cache ? &cache->layers[k] : nullptr);
  }
  Vec top_last = h.row(h.rows() - 1).transpose();
  if (cache) cache->top_last = top_last;
  return proj.W * top_last + proj.b;
}

void EncoderBackward(const std::vector<GruLayerParams>& stack, const LinearParams& proj,
                     const EncoderCache& cache, const Vec& dz,
                     std::vector<GruLayerParams>& gstack, LinearParams& gproj) {
  gproj.W += dz * cache.top_last.transpose();
  gproj.b += dz;
  Vec dtop = proj.W.transpose() * dz;

  // Only the final hidden state of the top layer receives an external
  // gradient; lower layers receive the full dx of the layer above.
  Mat dh = Mat::Zero(cache.layers.back().h.rows(), cache.layers.back().h.cols());
  dh.row(dh.rows() - 1) = dtop.transpose();
  for (std::size_t k = stack.size(); k-- > 0;) {
    Mat dx = GruBackward(stack[k], cache.layers[k], dh, gstack[k]);
    if (k > 0) dh = dx;
  }
}

Mat DecoderForward(const std::vector<GruLayerParams>& stack, const LinearParams& out,
                   const Vec& cond, int steps, DecoderCache* cache) {
  if (stack.empty()) throw std::invalid_argument("decoder stack must be non-empty");
  if (steps < 1) throw std::invalid_argument("decoder steps must be >= 1");
  Mat inputs(steps, cond.size());
  for (int t = 0; t < steps; ++t) inputs.row(t) = cond.transpose();

  if (cache) cache->layers.resize(stack.size());
  Mat h = inputs;
  for (std::size_t k = 0; k < stack.size(); ++k) {
    Vec h0 = Vec::Zero(stack[k].hidden_size());
    h = GruForward(stack[k], h, h0, cache ? &cache->layers[k] : nullptr);
  }
  if (cache) cache->top_h = h;

  Mat f(steps, out.output_size());
  for (int t = 0; t < steps; ++t)
    f.row(t) = (out.W * h.row(t).transpose() + out.b).transpose();
  return f;
}

void DecoderBackward(const std::vector<GruLayerParams>& stack, const LinearParams& out,
                     const DecoderCache& cache, const Mat& dF,
                     std::vector<GruLayerParams>& gstack, LinearParams& gout, Vec* dcond) {
  const int steps = static_cast<int>(dF.rows());
  Mat dh(steps, cache.top_h.cols());
  for (int t = 0; t < steps; ++t) {
    Vec df = dF.row(t).transpose();
    gout.W += df * cache.top_h.row(t);
    gout.b += df;
    dh.row(t) = (out.W.transpose() * df).transpose();
  }
  for (std::size_t k = stack.size(); k-- > 0;) {
    Mat dx = GruBackward(stack[k], cache.layers[k], dh, gstack[k]);
    dh = dx;
  }
  if (dcond) *dcond = dh.colwise().sum().transpose();
}

void Adam::Step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(static_cast<std::size_t>(params[i].size), 0.0);
      v_[i].assign(static_cast<std::size_t>(params[i].size), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size)
      throw std::invalid_argument("adam_step: shape mismatch for " + params[i].name);
    double* w = params[i].data;
    const double* gr = grads[i].data;
    for (Eigen::Index j = 0; j < params[i].size; ++j) {
      double gj = gr[j];
      if (!std::isfinite(gj))
        throw std::runtime_error("adam_step: non-finite gradient in " + params[i].name);
      auto ju = static_cast<std::size_t>(j);
      m_[i][ju] = cfg_.beta1 * m_[i][ju] + (1.0 - cfg_.beta1) * gj;
      v_[i][ju] = cfg_.beta2 * v_[i][ju] + (1.0 - cfg_.beta2) * gj * gj;
      double mhat = m_[i][ju] / bc1;
      double vhat = v_[i][ju] / bc2;
      w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double GradCheck(const std::function<double()>& loss, const std::vector<ParamRef>& params,
                 const std::vector<ParamRef>& analytic, double h) {
  double max_err = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* w = params[i].data;
    const double* a = analytic[i].data;
    for (Eigen::Index j = 0; j < params[i].size; ++j) {
      double saved = w[j];
      w[j] = saved + h;
      double plus = loss();
      w[j] = saved - h;
      double minus = loss();
      w[j] = saved;
      double numeric = (plus - minus) / (2.0 * h);
      double err = std::abs(a[j] - numeric) / std::max(1e-8, std::abs(a[j]) + std::abs(numeric));
      if (err > max_err) max_err = err;
    }
  }
  return max_err;
}

}  // namespace awe
