/* Copyright 2026 The tacrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tacrec/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "tacrec/error.hpp"

namespace tacrec {
namespace {

constexpr double kLayerNormEps = 1e-5;

// Offsets of the per-layer tensors relative to the layer's first tensor.
enum LayerSlot : std::size_t {
  kLn1Gain, kLn1Bias, kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
  kLn2Gain, kLn2Bias, kW1, kB1, kW2, kB2,
};
constexpr std::size_t kTokenEmbedding = 0;
constexpr std::size_t kPositionEmbedding = 1;
constexpr std::size_t kFirstLayer = 2;

std::size_t layer_base(std::size_t layer) {
  return kFirstLayer + layer * Parameters<float>::kPerLayer;
}

struct FinalSlots {
  std::size_t gain, bias, weight, bias_out;
};

FinalSlots final_slots(std::size_t layers) {
  const std::size_t base = layer_base(layers);
  return {base, base + 1, base + 2, base + 3};
}

// ---------------------------------------------------------------------------
// Dense kernels. Loops are written in axpy form so they vectorize without
// reassociating floating-point sums.

template <typename T>
void axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  T tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// y[r] = b + x[r] W for `rows` rows.
template <typename T>
void affine(const T* x, std::size_t rows, std::size_t in, const Tensor<T>& w,
            const Tensor<T>& b, T* y) {
  const std::size_t out = w.cols;
  for (std::size_t r = 0; r < rows; ++r) {
    T* yr = y + r * out;
    std::copy(b.data.begin(), b.data.end(), yr);
    const T* xr = x + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      if (xi != T(0)) axpy(xi, w.row(i), yr, out);
    }
  }
}

// Accumulates dW, db and (optionally) dx for y = b + x W.
template <typename T>
void affine_backward(const T* x, const T* dy, std::size_t rows,
                     std::size_t in, const Tensor<T>& w, T* dw, T* db, T* dx) {
  const std::size_t out = w.cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* dyr = dy + r * out;
    const T* xr = x + r * in;
    axpy(T(1), dyr, db, out);
    for (std::size_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      if (xi != T(0)) axpy(xi, dyr, dw + i * out, out);
    }
    if (dx) {
      T* dxr = dx + r * in;
      for (std::size_t i = 0; i < in; ++i) dxr[i] += dot(dyr, w.row(i), out);
    }
  }
}

template <typename T>
void layer_norm(const T* x, std::size_t rows, std::size_t d,
                const Tensor<T>& gain, const Tensor<T>& bias, T* y, T* xhat,
                double* rstd) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xr[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = xr[i] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + kLayerNormEps);
    rstd[r] = rs;
    for (std::size_t i = 0; i < d; ++i) {
      const T h = static_cast<T>((xr[i] - mean) * rs);
      xhat[r * d + i] = h;
      y[r * d + i] = gain.data[i] * h + bias.data[i];
    }
  }
}

// Accumulates dgain, dbias and adds the input gradient into dx.
template <typename T>
void layer_norm_backward(const T* dy, const T* xhat, const double* rstd,
                         std::size_t rows, std::size_t d, const Tensor<T>& gain,
                         T* dgain, T* dbias, T* dx) {
  std::vector<T> dxhat(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* dyr = dy + r * d;
    const T* hr = xhat + r * d;
    double mean_g = 0.0;
    double mean_gh = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dgain[i] += dyr[i] * hr[i];
      dbias[i] += dyr[i];
      dxhat[i] = dyr[i] * gain.data[i];
      mean_g += dxhat[i];
      mean_gh += static_cast<double>(dxhat[i]) * hr[i];
    }
    mean_g /= static_cast<double>(d);
    mean_gh /= static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) {
      dx[r * d + i] += static_cast<T>(
          rstd[r] * (dxhat[i] - mean_g - static_cast<double>(hr[i]) * mean_gh));
    }
  }
}

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

template <typename T>
T gelu(T h) {
  return static_cast<T>(0.5 * h * (1.0 + std::erf(h * kInvSqrt2)));
}

template <typename T>
T gelu_grad(T h) {
  const double cdf = 0.5 * (1.0 + std::erf(h * kInvSqrt2));
  const double pdf = std::exp(-0.5 * double(h) * h) *
                     (std::numbers::inv_sqrtpi * kInvSqrt2);
  return static_cast<T>(cdf + h * pdf);
}

// Fills `mask` with 0 or 1/(1-p) when training, leaves it empty otherwise,
// and applies it in place.
template <typename T>
void dropout(T* x, std::size_t n, double p, SplitMix64* rng,
             std::vector<T>& mask) {
  mask.clear();
  if (!rng || p <= 0.0) return;
  mask.resize(n);
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rng->uniform() < p ? T(0) : keep;
    x[i] *= mask[i];
  }
}

template <typename T>
void apply_mask(T* x, std::size_t n, const std::vector<T>& mask) {
  if (mask.empty()) return;
  for (std::size_t i = 0; i < n; ++i) x[i] *= mask[i];
}

// ---------------------------------------------------------------------------

template <typename T>
struct LayerCache {
  std::size_t rows_out = 0;
  std::vector<T> x_in;       // n x d
  std::vector<T> ln1, ln1_hat;
  std::vector<double> ln1_rstd;
  std::vector<T> q;          // rows_out x d
  std::vector<T> k, v;       // n x d
  std::vector<T> probs;      // rows_out x heads x n
  std::vector<T> attn;       // rows_out x d (concatenated heads)
  std::vector<T> mask1;
  std::vector<T> x_mid;      // rows_out x d
  std::vector<T> ln2, ln2_hat;
  std::vector<double> ln2_rstd;
  std::vector<T> hidden;     // rows_out x ffn (pre-activation)
  std::vector<T> act;        // rows_out x ffn
  std::vector<T> mask2;
  std::vector<T> x_out;      // rows_out x d
};

template <typename T>
struct Cache {
  std::size_t n = 0;       // active rows, CLS first
  std::size_t first = 0;   // position of CLS
  std::vector<T> x0;
  std::vector<T> mask0;
  std::vector<LayerCache<T>> layers;
  std::vector<T> x_final;  // 1 x d (CLS row)
  std::vector<T> lnf, lnf_hat;
  std::vector<double> lnf_rstd;
  std::vector<T> logits;
};

template <typename T>
class Encoder {
 public:
  explicit Encoder(const Parameters<T>& p) : p_(p), c_(p.config) {
    if (c_.embed_dim % c_.heads != 0) {
      throw Error("invalid-config", "embed_dim must be divisible by heads");
    }
  }

  const Tensor<T>& t(std::size_t i) const { return p_.tensors[i]; }
  const Tensor<T>& lt(std::size_t layer, std::size_t slot) const {
    return p_.tensors[layer_base(layer) + slot];
  }

  void check_ids(std::span<const TokenId> ids) const {
    if (ids.size() != c_.window) {
      throw Error("invalid-id", "id sequence length must equal the window");
    }
    for (TokenId id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= p_.vocab_size) {
        throw Error("invalid-id", std::to_string(id));
      }
    }
  }

  void forward(std::span<const TokenId> ids, SplitMix64* rng,
               Cache<T>& cache) const {
    check_ids(ids);
    const std::size_t W = c_.window;
    const std::size_t d = c_.embed_dim;
    std::size_t first = 0;
    while (first < W && ids[first] == Vocabulary::kPad) ++first;
    if (first == W) throw Error("invalid-id", "sequence is all padding");
    const std::size_t n = W - first;
    cache.n = n;
    cache.first = first;

    cache.x0.assign(n * d, T(0));
    for (std::size_t r = 0; r < n; ++r) {
      const T* e = t(kTokenEmbedding).row(static_cast<std::size_t>(ids[first + r]));
      const T* pe = t(kPositionEmbedding).row(first + r);
      T* xr = cache.x0.data() + r * d;
      for (std::size_t i = 0; i < d; ++i) xr[i] = e[i] + pe[i];
    }
    dropout(cache.x0.data(), n * d, c_.dropout, rng, cache.mask0);

    cache.layers.resize(c_.layers);
    const std::vector<T>* x = &cache.x0;
    for (std::size_t l = 0; l < c_.layers; ++l) {
      LayerCache<T>& lc = cache.layers[l];
      lc.rows_out = (l + 1 == c_.layers) ? 1 : n;
      layer_forward(l, *x, n, rng, lc);
      x = &lc.x_out;
    }

    cache.x_final.assign(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(d));
    const FinalSlots f = final_slots(c_.layers);
    cache.lnf.resize(d);
    cache.lnf_hat.resize(d);
    cache.lnf_rstd.resize(1);
    layer_norm(cache.x_final.data(), 1, d, t(f.gain), t(f.bias),
               cache.lnf.data(), cache.lnf_hat.data(), cache.lnf_rstd.data());
    cache.logits.resize(p_.vocab_size);
    affine(cache.lnf.data(), 1, d, t(f.weight), t(f.bias_out),
           cache.logits.data());
  }

  void layer_forward(std::size_t l, const std::vector<T>& x, std::size_t n,
                     SplitMix64* rng, LayerCache<T>& lc) const;

  // Backpropagates d(loss)/d(logits) through the cached pass.
  void backward(const Cache<T>& cache, std::span<const TokenId> ids,
                const std::vector<T>& dlogits,
                std::vector<std::vector<T>>& grads) const;

  const Parameters<T>& p_;
  const ModelConfig& c_;
};

template <typename T>
void Encoder<T>::layer_forward(std::size_t l, const std::vector<T>& x,
                               std::size_t n, SplitMix64* rng,
                               LayerCache<T>& lc) const {
  const std::size_t d = c_.embed_dim;
  const std::size_t h = c_.heads;
  const std::size_t dh = d / h;
  const std::size_t ro = lc.rows_out;
  const std::size_t f = c_.ffn_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  lc.x_in = x;
  lc.ln1.resize(n * d);
  lc.ln1_hat.resize(n * d);
  lc.ln1_rstd.resize(n);
  layer_norm(lc.x_in.data(), n, d, lt(l, kLn1Gain), lt(l, kLn1Bias),
             lc.ln1.data(), lc.ln1_hat.data(), lc.ln1_rstd.data());

  lc.q.resize(ro * d);
  lc.k.resize(n * d);
  lc.v.resize(n * d);
  affine(lc.ln1.data(), ro, d, lt(l, kWq), lt(l, kBq), lc.q.data());
  affine(lc.ln1.data(), n, d, lt(l, kWk), lt(l, kBk), lc.k.data());
  affine(lc.ln1.data(), n, d, lt(l, kWv), lt(l, kBv), lc.v.data());

  lc.probs.resize(ro * h * n);
  lc.attn.assign(ro * d, T(0));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < ro; ++i) {
    for (std::size_t hd = 0; hd < h; ++hd) {
      const T* qi = lc.q.data() + i * d + hd * dh;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        s[j] = static_cast<double>(dot(qi, lc.k.data() + j * d + hd * dh, dh)) *
               scale;
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s[j] = std::exp(s[j] - mx);
        z += s[j];
      }
      T* pr = lc.probs.data() + (i * h + hd) * n;
      T* oi = lc.attn.data() + i * d + hd * dh;
      for (std::size_t j = 0; j < n; ++j) {
        pr[j] = static_cast<T>(s[j] / z);
        axpy(pr[j], lc.v.data() + j * d + hd * dh, oi, dh);
      }
    }
  }

  // x_mid = x[0:ro] + dropout(attn Wo + bo)
  std::vector<T> z(ro * d);
  affine(lc.attn.data(), ro, d, lt(l, kWo), lt(l, kBo), z.data());
  dropout(z.data(), ro * d, c_.dropout, rng, lc.mask1);
  lc.x_mid.resize(ro * d);
  for (std::size_t i = 0; i < ro * d; ++i) lc.x_mid[i] = x[i] + z[i];

  lc.ln2.resize(ro * d);
  lc.ln2_hat.resize(ro * d);
  lc.ln2_rstd.resize(ro);
  layer_norm(lc.x_mid.data(), ro, d, lt(l, kLn2Gain), lt(l, kLn2Bias),
             lc.ln2.data(), lc.ln2_hat.data(), lc.ln2_rstd.data());
  lc.hidden.resize(ro * f);
  affine(lc.ln2.data(), ro, d, lt(l, kW1), lt(l, kB1), lc.hidden.data());
  lc.act.resize(ro * f);
  for (std::size_t i = 0; i < ro * f; ++i) lc.act[i] = gelu(lc.hidden[i]);
  std::vector<T> ffn(ro * d);
  affine(lc.act.data(), ro, f, lt(l, kW2), lt(l, kB2), ffn.data());
  dropout(ffn.data(), ro * d, c_.dropout, rng, lc.mask2);

  std::vector<T>& out = lc.x_out;
  out.resize(ro * d);
  for (std::size_t i = 0; i < ro * d; ++i) out[i] = lc.x_mid[i] + ffn[i];
}

template <typename T>
void Encoder<T>::backward(const Cache<T>& cache, std::span<const TokenId> ids,
                          const std::vector<T>& dlogits,
                          std::vector<std::vector<T>>& grads) const {
  const std::size_t d = c_.embed_dim;
  const std::size_t h = c_.heads;
  const std::size_t dh = d / h;
  const std::size_t f = c_.ffn_dim;
  const std::size_t n = cache.n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const FinalSlots fs = final_slots(c_.layers);

  std::vector<T> dz(d, T(0));
  affine_backward(cache.lnf.data(), dlogits.data(), 1, d, t(fs.weight),
                  grads[fs.weight].data(), grads[fs.bias_out].data(), dz.data());
  std::vector<T> dx(d, T(0));
  layer_norm_backward(dz.data(), cache.lnf_hat.data(), cache.lnf_rstd.data(), 1,
                      d, t(fs.gain), grads[fs.gain].data(),
                      grads[fs.bias].data(), dx.data());

  for (std::size_t l = c_.layers; l-- > 0;) {
    const LayerCache<T>& lc = cache.layers[l];
    const std::size_t ro = lc.rows_out;
    const std::size_t base = layer_base(l);
    auto g = [&](std::size_t slot) { return grads[base + slot].data(); };

    // FFN sublayer.
    std::vector<T> dffn(dx);  // ro x d
    apply_mask(dffn.data(), ro * d, lc.mask2);
    std::vector<T> dact(ro * f, T(0));
    affine_backward(lc.act.data(), dffn.data(), ro, f, lt(l, kW2), g(kW2),
                    g(kB2), dact.data());
    for (std::size_t i = 0; i < ro * f; ++i) dact[i] *= gelu_grad(lc.hidden[i]);
    std::vector<T> dln2(ro * d, T(0));
    affine_backward(lc.ln2.data(), dact.data(), ro, d, lt(l, kW1), g(kW1),
                    g(kB1), dln2.data());
    std::vector<T> dmid(dx);  // residual
    layer_norm_backward(dln2.data(), lc.ln2_hat.data(), lc.ln2_rstd.data(), ro,
                        d, lt(l, kLn2Gain), g(kLn2Gain), g(kLn2Bias),
                        dmid.data());

    // Attention sublayer.
    std::vector<T> dxin(n * d, T(0));
    for (std::size_t i = 0; i < ro * d; ++i) dxin[i] = dmid[i];
    std::vector<T> dzo(dmid);
    apply_mask(dzo.data(), ro * d, lc.mask1);
    std::vector<T> dattn(ro * d, T(0));
    affine_backward(lc.attn.data(), dzo.data(), ro, d, lt(l, kWo), g(kWo),
                    g(kBo), dattn.data());

    std::vector<T> dq(ro * d, T(0));
    std::vector<T> dk(n * d, T(0));
    std::vector<T> dv(n * d, T(0));
    std::vector<double> dp(n);
    for (std::size_t i = 0; i < ro; ++i) {
      for (std::size_t hd = 0; hd < h; ++hd) {
        const T* pr = lc.probs.data() + (i * h + hd) * n;
        const T* doi = dattn.data() + i * d + hd * dh;
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dp[j] = dot(doi, lc.v.data() + j * d + hd * dh, dh);
          axpy(pr[j], doi, dv.data() + j * d + hd * dh, dh);
          weighted += dp[j] * pr[j];
        }
        const T* qi = lc.q.data() + i * d + hd * dh;
        T* dqi = dq.data() + i * d + hd * dh;
        for (std::size_t j = 0; j < n; ++j) {
          const T ds = static_cast<T>(pr[j] * (dp[j] - weighted) * scale);
          axpy(ds, lc.k.data() + j * d + hd * dh, dqi, dh);
          axpy(ds, qi, dk.data() + j * d + hd * dh, dh);
        }
      }
    }
    std::vector<T> dln1(n * d, T(0));
    affine_backward(lc.ln1.data(), dq.data(), ro, d, lt(l, kWq), g(kWq), g(kBq),
                    dln1.data());
    affine_backward(lc.ln1.data(), dk.data(), n, d, lt(l, kWk), g(kWk), g(kBk),
                    dln1.data());
    affine_backward(lc.ln1.data(), dv.data(), n, d, lt(l, kWv), g(kWv), g(kBv),
                    dln1.data());
    layer_norm_backward(dln1.data(), lc.ln1_hat.data(), lc.ln1_rstd.data(), n,
                        d, lt(l, kLn1Gain), g(kLn1Gain), g(kLn1Bias),
                        dxin.data());
    dx = std::move(dxin);
  }

  apply_mask(dx.data(), n * d, cache.mask0);
  T* demb = grads[kTokenEmbedding].data();
  T* dpos = grads[kPositionEmbedding].data();
  for (std::size_t r = 0; r < n; ++r) {
    const auto id = static_cast<std::size_t>(ids[cache.first + r]);
    axpy(T(1), dx.data() + r * d, demb + id * d, d);
    axpy(T(1), dx.data() + r * d, dpos + (cache.first + r) * d, d);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void ModelConfig::validate(std::size_t context_min) const {
  auto fail = [](const std::string& m) { throw Error("invalid-config", m); };
  if (window == 0 || embed_dim == 0 || heads == 0 || layers == 0 ||
      ffn_dim == 0 || batch == 0 || epochs == 0) {
    fail("all counts must be at least 1");
  }
  if (embed_dim % heads != 0) fail("embed_dim must be divisible by heads");
  if (window < context_min) fail("window must be at least context_min");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
}

std::string config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["window"] = c.window;
  j["embed_dim"] = c.embed_dim;
  j["heads"] = c.heads;
  j["layers"] = c.layers;
  j["ffn_dim"] = c.ffn_dim;
  j["dropout"] = c.dropout;
  j["lr"] = c.lr;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  return j.dump();
}

ModelConfig config_from_json(std::string_view text) {
  ModelConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid-config", e.what());
  }
  if (!j.is_object()) throw Error("invalid-config", "config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "heads") c.heads = value.get<std::size_t>();
      else if (key == "layers") c.layers = value.get<std::size_t>();
      else if (key == "ffn_dim") c.ffn_dim = value.get<std::size_t>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "batch") c.batch = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw Error("invalid-config", "unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid-config", e.what());
  }
  return c;
}

std::size_t parameter_count(const ModelConfig& c, std::size_t vocab_size) {
  const std::size_t d = c.embed_dim;
  const std::size_t f = c.ffn_dim;
  const std::size_t per_layer =
      4 * d + 4 * (d * d + d) + (d * f + f) + (f * d + d);
  return vocab_size * d + c.window * d + c.layers * per_layer + 2 * d +
         d * vocab_size + vocab_size;
}

std::vector<TokenId> encode_ids(std::span<const TokenId> context,
                                std::size_t window) {
  if (context.empty()) throw Error("empty-context");
  if (window < 2) throw Error("invalid-config", "window must be at least 2");
  const std::size_t keep = std::min(context.size(), window - 1);
  std::vector<TokenId> out(window, Vocabulary::kPad);
  const std::size_t cls = window - keep - 1;
  out[cls] = Vocabulary::kCls;
  std::copy(context.end() - static_cast<std::ptrdiff_t>(keep), context.end(),
            out.begin() + static_cast<std::ptrdiff_t>(cls + 1));
  return out;
}

std::vector<TokenId> encode_context(std::span<const std::string> context,
                                    const Vocabulary& vocab,
                                    std::size_t window) {
  std::vector<TokenId> ids;
  ids.reserve(context.size());
  for (const std::string& t : context) ids.push_back(vocab.id_of(t));
  return encode_ids(ids, window);
}

template <typename T>
Parameters<T> tf_init(const ModelConfig& config, std::size_t vocab_size) {
  config.validate(1);
  if (vocab_size <= static_cast<std::size_t>(Vocabulary::kFirstRegular)) {
    throw Error("invalid-config", "vocabulary has no regular tokens");
  }
  const std::size_t d = config.embed_dim;
  const std::size_t f = config.ffn_dim;
  const std::size_t V = vocab_size;
  Parameters<T> p;
  p.config = config;
  p.vocab_size = V;
  SplitMix64 rng(config.seed);

  enum class Fill { kUniform, kOnes, kZeros };
  auto add = [&](std::string name, std::size_t rows, std::size_t cols,
                 Fill fill, std::size_t fan_in) {
    Tensor<T> t{std::move(name), rows, cols, std::vector<T>(rows * cols, T(0))};
    if (fill == Fill::kOnes) std::fill(t.data.begin(), t.data.end(), T(1));
    if (fill == Fill::kUniform) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (T& x : t.data) x = static_cast<T>(rng.uniform(-bound, bound));
    }
    p.tensors.push_back(std::move(t));
  };

  add("token_embedding", V, d, Fill::kUniform, d);
  add("position_embedding", config.window, d, Fill::kUniform, d);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    add(pre + "ln1.gain", 1, d, Fill::kOnes, 0);
    add(pre + "ln1.bias", 1, d, Fill::kZeros, 0);
    for (const char* m : {"q", "k", "v", "o"}) {
      add(pre + "attn.w" + m, d, d, Fill::kUniform, d);
      add(pre + "attn.b" + m, 1, d, Fill::kZeros, 0);
    }
    add(pre + "ln2.gain", 1, d, Fill::kOnes, 0);
    add(pre + "ln2.bias", 1, d, Fill::kZeros, 0);
    add(pre + "ffn.w1", d, f, Fill::kUniform, d);
    add(pre + "ffn.b1", 1, f, Fill::kZeros, 0);
    add(pre + "ffn.w2", f, d, Fill::kUniform, f);
    add(pre + "ffn.b2", 1, d, Fill::kZeros, 0);
  }
  add("final_ln.gain", 1, d, Fill::kOnes, 0);
  add("final_ln.bias", 1, d, Fill::kZeros, 0);
  add("classifier.w", d, V, Fill::kUniform, d);
  add("classifier.b", 1, V, Fill::kZeros, 0);

  T* pad = p.tensors[kTokenEmbedding].row(Vocabulary::kPad);
  std::fill(pad, pad + d, T(0));
  return p;
}

template <typename T>
std::vector<T> tf_forward(const Parameters<T>& params,
                          std::span<const TokenId> ids) {
  Encoder<T> enc(params);
  Cache<T> cache;
  enc.forward(ids, nullptr, cache);
  return cache.logits;
}

template <typename T>
std::vector<double> softmax(std::span<const T> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double mx = -INFINITY;
  for (T x : logits) mx = std::max(mx, static_cast<double>(x));
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(static_cast<double>(logits[i]) - mx);
    z += out[i];
  }
  for (double& x : out) x /= z;
  return out;
}

template <typename T>
LossGrad<T> tf_loss_grad(const Parameters<T>& params,
                         std::span<const Example> batch, SplitMix64* rng) {
  if (batch.empty()) throw Error("empty-dataset", "empty batch");
  Encoder<T> enc(params);
  LossGrad<T> out;
  out.grads.reserve(params.tensors.size());
  for (const auto& t : params.tensors) out.grads.emplace_back(t.data.size(), T(0));

  Cache<T> cache;
  std::vector<T> dlogits(params.vocab_size);
  double total = 0.0;
  for (const Example& ex : batch) {
    if (ex.gold < Vocabulary::kFirstRegular ||
        static_cast<std::size_t>(ex.gold) >= params.vocab_size) {
      throw Error("invalid-label", std::to_string(ex.gold));
    }
    enc.forward(ex.ids, rng, cache);
    const std::vector<double> probs = softmax<T>(cache.logits);
    total += -std::log(std::max(probs[static_cast<std::size_t>(ex.gold)],
                                1e-300));
    for (std::size_t i = 0; i < dlogits.size(); ++i) {
      dlogits[i] = static_cast<T>(probs[i]);
    }
    dlogits[static_cast<std::size_t>(ex.gold)] -= T(1);
    enc.backward(cache, ex.ids, dlogits, out.grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss = total * inv;
  for (auto& g : out.grads) {
    for (T& x : g) x = static_cast<T>(x * inv);
  }
  return out;
}

template <typename T>
std::vector<std::vector<std::vector<std::vector<double>>>> tf_attention(
    const Parameters<T>& params, std::span<const TokenId> ids) {
  Encoder<T> enc(params);
  Cache<T> cache;
  enc.forward(ids, nullptr, cache);
  const ModelConfig& c = params.config;
  std::vector<std::vector<std::vector<std::vector<double>>>> out(c.layers);
  for (std::size_t l = 0; l < c.layers; ++l) {
    const LayerCache<T>& lc = cache.layers[l];
    out[l].assign(c.heads, std::vector<std::vector<double>>(
                               lc.rows_out, std::vector<double>(c.window, 0.0)));
    for (std::size_t i = 0; i < lc.rows_out; ++i) {
      for (std::size_t hd = 0; hd < c.heads; ++hd) {
        for (std::size_t j = 0; j < cache.n; ++j) {
          out[l][hd][i][cache.first + j] =
              lc.probs[(i * c.heads + hd) * cache.n + j];
        }
      }
    }
  }
  return out;
}

#define TACREC_INSTANTIATE(T)                                                 \
  template Parameters<T> tf_init<T>(const ModelConfig&, std::size_t);         \
  template std::vector<T> tf_forward<T>(const Parameters<T>&,                 \
                                        std::span<const TokenId>);            \
  template LossGrad<T> tf_loss_grad<T>(const Parameters<T>&,                  \
                                       std::span<const Example>,              \
                                       SplitMix64*);                          \
  template std::vector<std::vector<std::vector<std::vector<double>>>>        \
  tf_attention<T>(const Parameters<T>&, std::span<const TokenId>);           \
  template std::vector<double> softmax<T>(std::span<const T>);

TACREC_INSTANTIATE(float)
TACREC_INSTANTIATE(double)

#undef TACREC_INSTANTIATE

}  // namespace tacrec
