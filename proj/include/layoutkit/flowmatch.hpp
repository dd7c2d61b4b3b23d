// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toy conditional flow matching on rectangle scenes. A small feed-forward
// network regresses the velocity of the linear path x_t = (1-t)x0 + t*x1
// (x0 = data, x1 = noise, target x0 - x1). Conditioning is a per-class
// layout embedding with independently droppable class and coordinate
// blocks, which yields the branch set classifier-free guidance needs. The
// Euler sampler integrates from noise (t=1) to data (t=0) over a shifted
// timestep grid and fuses guidance branches at every step.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutkit/errors.hpp"
#include "layoutkit/guidance.hpp"
#include "layoutkit/icbp.hpp"
#include "layoutkit/rng.hpp"
#include "layoutkit/scenes.hpp"

namespace layoutkit::flowmatch {

using scenes::ToyScene;

// -- path ---------------------------------------------------------------------

/// Elementwise (1-t)*x0 + t*x1 with exact endpoints.
inline std::vector<double> interpolate(const std::vector<double>& x0,
                                       const std::vector<double>& x1,
                                       double t) {
  if (x0.size() != x1.size())
    throw ShapeMismatch("interpolate: endpoint sizes differ");
  if (!(t >= 0.0 && t <= 1.0))
    throw NumericalError("interpolate: t must lie in [0,1]");
  if (t == 0.0) return x0;
  if (t == 1.0) return x1;
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - t) * x0[i] + t * x1[i];
  return out;
}

/// Monotone bijection on [0,1] concentrating integration steps near the
/// noise end: t = shift*u / (1 + (shift-1)*u).
inline double shift_timestep(double u, double shift) {
  if (!(u >= 0.0 && u <= 1.0))
    throw NumericalError("shift_timestep: u must lie in [0,1]");
  if (!(shift >= 1.0))
    throw ConfigError("shift_timestep: shift must be >= 1");
  return shift * u / (1.0 + (shift - 1.0) * u);
}

// -- conditioning ---------------------------------------------------------------

struct DropFlags {
  bool text = false;   // zero the class-presence block
  bool coord = false;  // zero the coordinate block
};

/// Layout conditioning. Per instance: class one-hot followed by the four
/// box coordinates. The pooled scene vector scatters each instance into
/// class-indexed slots: a presence block of size V, then a per-class
/// coordinate block of size 4V, so the class-box binding survives pooling.
struct ConditionEmbedding {
  std::vector<std::vector<double>> instance_vecs;  // each: V + 4
  std::vector<double> pooled;                      // V + 4V
  bool text_dropped = false;
  bool coord_dropped = false;
};

inline int condition_dim(int vocab_size) { return 5 * vocab_size; }

inline ConditionEmbedding encode_condition(
    const icbp::LayoutPrompt& prompt, const std::vector<std::string>& vocab,
    DropFlags drop = {}) {
  const int v = static_cast<int>(vocab.size());
  ConditionEmbedding emb;
  emb.text_dropped = drop.text;
  emb.coord_dropped = drop.coord;
  emb.pooled.assign(condition_dim(v), 0.0);

  for (const icbp::InstanceTag* tag : prompt.tags()) {
    int class_id = -1;
    for (int k = 0; k < v; ++k) {
      if (vocab[k] == tag->subject) {
        class_id = k;
        break;
      }
    }
    if (class_id < 0)
      throw UnknownClass("encode_condition: unknown subject '" +
                         tag->subject + "'");
    for (const BBox& box : tag->boxes) {
      std::vector<double> vec(v + 4, 0.0);
      if (!drop.text) vec[class_id] = 1.0;
      if (!drop.coord) {
        vec[v + 0] = box.x1;
        vec[v + 1] = box.y1;
        vec[v + 2] = box.x2;
        vec[v + 3] = box.y2;
      }
      if (!drop.text) emb.pooled[class_id] += 1.0;
      if (!drop.coord) {
        const int base = v + 4 * class_id;
        emb.pooled[base + 0] += box.x1;
        emb.pooled[base + 1] += box.y1;
        emb.pooled[base + 2] += box.x2;
        emb.pooled[base + 3] += box.y2;
      }
      emb.instance_vecs.push_back(std::move(vec));
    }
  }
  return emb;
}

// -- model ---------------------------------------------------------------------

struct ModelConfig {
  int scene_h = 32;
  int scene_w = 32;
  int scene_c = 3;
  std::vector<std::string> vocab;
  std::vector<int> hidden = {256, 256};

  int scene_dim() const { return scene_h * scene_w * scene_c; }
  int cond_dim() const {
    return condition_dim(static_cast<int>(vocab.size()));
  }
  int input_dim() const { return scene_dim() + 1 + cond_dim(); }
};

struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, in x out
  std::vector<double> b;  // out
};

/// Feed-forward velocity network: tanh hidden layers, linear output of
/// scene shape. Immutable after training; deterministic given a seed.
struct ModelParams {
  ModelConfig config;
  std::vector<Linear> layers;
};

inline ModelParams init_params(const ModelConfig& config,
                               std::uint64_t seed) {
  ModelParams params;
  params.config = config;
  Rng rng(seed, "init");
  int in = config.input_dim();
  std::vector<int> dims = config.hidden;
  dims.push_back(config.scene_dim());
  for (int out : dims) {
    Linear layer;
    layer.in = in;
    layer.out = out;
    const double limit = std::sqrt(6.0 / (in + out));
    layer.w.resize(static_cast<std::size_t>(in) * out);
    for (double& x : layer.w) x = rng.uniform(-limit, limit);
    layer.b.assign(out, 0.0);
    params.layers.push_back(std::move(layer));
    in = out;
  }
  return params;
}

namespace detail {

inline void matmul_forward(const Linear& layer, const double* in, int batch,
                           double* out) {
  for (int b = 0; b < batch; ++b) {
    double* row = out + static_cast<std::size_t>(b) * layer.out;
    for (int j = 0; j < layer.out; ++j) row[j] = layer.b[j];
    const double* x = in + static_cast<std::size_t>(b) * layer.in;
    for (int i = 0; i < layer.in; ++i) {
      const double v = x[i];
      if (v == 0.0) continue;
      const double* wrow = layer.w.data() + static_cast<std::size_t>(i) * layer.out;
      for (int j = 0; j < layer.out; ++j) row[j] += v * wrow[j];
    }
  }
}

struct Activations {
  // pre[l] omitted: tanh'(z) recovered from the activation value.
  std::vector<std::vector<double>> post;  // per layer, batch x out
};

/// Forward pass over an assembled input batch; hidden layers tanh, last
/// layer linear.
inline void forward(const ModelParams& params, const std::vector<double>& in,
                    int batch, Activations& acts) {
  acts.post.resize(params.layers.size());
  const double* src = in.data();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Linear& layer = params.layers[l];
    acts.post[l].assign(static_cast<std::size_t>(batch) * layer.out, 0.0);
    matmul_forward(layer, src, batch, acts.post[l].data());
    if (l + 1 < params.layers.size())
      for (double& x : acts.post[l]) x = std::tanh(x);
    src = acts.post[l].data();
  }
}

}  // namespace detail

/// Assembles the network input: flattened noisy scene, then t, then the
/// pooled condition vector.
inline std::vector<double> assemble_input(const ModelConfig& config,
                                          const std::vector<double>& x_t,
                                          double t,
                                          const std::vector<double>& cond) {
  if (static_cast<int>(x_t.size()) != config.scene_dim())
    throw ShapeMismatch("assemble_input: scene size mismatch");
  if (static_cast<int>(cond.size()) != config.cond_dim())
    throw ShapeMismatch("assemble_input: condition size mismatch");
  std::vector<double> in;
  in.reserve(config.input_dim());
  in.insert(in.end(), x_t.begin(), x_t.end());
  in.push_back(t);
  in.insert(in.end(), cond.begin(), cond.end());
  return in;
}

/// Predicted velocity for one latent state.
inline std::vector<double> predict_velocity(const ModelParams& params,
                                            const std::vector<double>& x_t,
                                            double t,
                                            const std::vector<double>& cond) {
  detail::Activations acts;
  detail::forward(params, assemble_input(params.config, x_t, t, cond), 1,
                  acts);
  std::vector<double> v = acts.post.back();
  for (double x : v)
    if (!std::isfinite(x))
      throw NonFinite("predict_velocity: non-finite output");
  return v;
}

/// Squared L2 distance between the predicted velocity at x_t and the path
/// target (x0 - x1), for one sample.
inline double fm_loss(const ModelParams& params, const std::vector<double>& x0,
                      const std::vector<double>& x1, double t,
                      const ConditionEmbedding& cond) {
  const std::vector<double> x_t = interpolate(x0, x1, t);
  const std::vector<double> v = predict_velocity(params, x_t, t, cond.pooled);
  double loss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = v[i] - (x0[i] - x1[i]);
    loss += e * e;
  }
  if (!std::isfinite(loss)) throw NonFinite("fm_loss: non-finite loss");
  return loss;
}

struct Gradients {
  std::vector<Linear> layers;  // same shapes as the model

  static Gradients zeros_like(const ModelParams& params) {
    Gradients g;
    for (const Linear& layer : params.layers) {
      Linear zero;
      zero.in = layer.in;
      zero.out = layer.out;
      zero.w.assign(layer.w.size(), 0.0);
      zero.b.assign(layer.b.size(), 0.0);
      g.layers.push_back(std::move(zero));
    }
    return g;
  }
};

/// Batched loss plus parameter gradients. Per-sample loss is the summed
/// squared error; the batch reduces by mean.
inline double fm_loss_and_grad(const ModelParams& params,
                               const std::vector<double>& inputs,  // B x in
                               const std::vector<double>& targets, // B x out
                               int batch, Gradients& grads) {
  detail::Activations acts;
  detail::forward(params, inputs, batch, acts);

  const int out_dim = params.layers.back().out;
  double loss = 0.0;
  std::vector<double> delta(static_cast<std::size_t>(batch) * out_dim);
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double e = acts.post.back()[i] - targets[i];
    loss += e * e;
    delta[i] = 2.0 * e / batch;
  }
  loss /= batch;
  if (!std::isfinite(loss))
    throw NonFinite("fm_loss_and_grad: non-finite loss");

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const Linear& layer = params.layers[l];
    Linear& grad = grads.layers[l];
    const double* below =
        l > 0 ? acts.post[l - 1].data() : inputs.data();

    for (int b = 0; b < batch; ++b) {
      const double* d = delta.data() + static_cast<std::size_t>(b) * layer.out;
      const double* x = below + static_cast<std::size_t>(b) * layer.in;
      for (int j = 0; j < layer.out; ++j) grad.b[j] += d[j];
      for (int i = 0; i < layer.in; ++i) {
        const double v = x[i];
        if (v == 0.0) continue;
        double* grow = grad.w.data() + static_cast<std::size_t>(i) * layer.out;
        for (int j = 0; j < layer.out; ++j) grow[j] += v * d[j];
      }
    }
    if (l == 0) break;

    std::vector<double> delta_below(
        static_cast<std::size_t>(batch) * layer.in, 0.0);
    for (int b = 0; b < batch; ++b) {
      const double* d = delta.data() + static_cast<std::size_t>(b) * layer.out;
      double* db = delta_below.data() + static_cast<std::size_t>(b) * layer.in;
      for (int i = 0; i < layer.in; ++i) {
        const double* wrow =
            layer.w.data() + static_cast<std::size_t>(i) * layer.out;
        double sum = 0.0;
        for (int j = 0; j < layer.out; ++j) sum += wrow[j] * d[j];
        db[i] = sum;
      }
      // tanh'(z) = 1 - tanh(z)^2, read off the stored activation.
      const double* act = acts.post[l - 1].data() +
                          static_cast<std::size_t>(b) * layer.in;
      for (int i = 0; i < layer.in; ++i) db[i] *= 1.0 - act[i] * act[i];
    }
    delta = std::move(delta_below);
  }
  return loss;
}

// -- training --------------------------------------------------------------------

struct TrainConfig {
  std::uint64_t seed = 0;
  int steps = 2000;
  double lr = 1e-3;
  int batch = 64;
  double p_drop_coord = 0.1;
  double p_drop_text = 0.1;
  double p_drop_all = 0.1;
  double divergence_threshold = 1e6;
  double loss_weight = 1.0;  // weight of the velocity-regression objective
};

struct Sample {
  icbp::LayoutPrompt prompt;
  ToyScene scene;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;
};

/// Plain SGD on the velocity-regression loss with condition dropout.
/// Per batch slot the draw order is fixed: sample index, t, noise (one
/// normal per scene element), then the three dropout uniforms
/// (all, coord, text). Single-threaded and bit-deterministic per seed.
inline TrainResult train(const ModelParams& initial, const TrainConfig& cfg,
                         const std::vector<Sample>& dataset) {
  if (dataset.empty()) throw DataError("train: dataset is empty");
  const ModelConfig& mc = initial.config;
  const int scene_dim = mc.scene_dim();
  for (const Sample& s : dataset)
    if (s.scene.height != mc.scene_h || s.scene.width != mc.scene_w ||
        s.scene.channels != mc.scene_c)
      throw ShapeMismatch("train: scene shape does not match the model");

  // Conditions are prompt-derived and reused across steps.
  std::vector<ConditionEmbedding> conds;
  conds.reserve(dataset.size());
  for (const Sample& s : dataset)
    conds.push_back(encode_condition(s.prompt, mc.vocab));

  TrainResult result;
  result.params = initial;
  Rng rng(cfg.seed, "train");

  const int in_dim = mc.input_dim();
  const int cond_dim = mc.cond_dim();
  const int v = static_cast<int>(mc.vocab.size());
  std::vector<double> inputs(static_cast<std::size_t>(cfg.batch) * in_dim);
  std::vector<double> targets(static_cast<std::size_t>(cfg.batch) * scene_dim);

  for (int step = 0; step < cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(dataset.size()) - 1));
      const double t = rng.uniform();
      double* in_row = inputs.data() + static_cast<std::size_t>(b) * in_dim;
      double* tgt_row =
          targets.data() + static_cast<std::size_t>(b) * scene_dim;
      const std::vector<double>& x0 = dataset[idx].scene.pixels;
      for (int i = 0; i < scene_dim; ++i) {
        const double x1 = rng.normal();
        in_row[i] = (1.0 - t) * x0[i] + t * x1;
        tgt_row[i] = x0[i] - x1;
      }
      in_row[scene_dim] = t;

      const double u_all = rng.uniform();
      const double u_coord = rng.uniform();
      const double u_text = rng.uniform();
      const bool drop_all = u_all < cfg.p_drop_all;
      const bool drop_coord = drop_all || u_coord < cfg.p_drop_coord;
      const bool drop_text = drop_all || u_text < cfg.p_drop_text;

      const std::vector<double>& pooled = conds[idx].pooled;
      double* cond_row = in_row + scene_dim + 1;
      for (int i = 0; i < cond_dim; ++i) {
        const bool is_class_block = i < v;
        const bool dropped = is_class_block ? drop_text : drop_coord;
        cond_row[i] = dropped ? 0.0 : pooled[i];
      }
    }

    Gradients grads = Gradients::zeros_like(result.params);
    const double loss =
        fm_loss_and_grad(result.params, inputs, targets, cfg.batch, grads);
    if (loss > cfg.divergence_threshold)
      throw TrainingDiverged("train: loss " + std::to_string(loss) +
                             " exceeded the divergence threshold");
    result.loss_history.push_back(loss);

    const double step_size = cfg.lr * cfg.loss_weight;
    for (std::size_t l = 0; l < result.params.layers.size(); ++l) {
      Linear& layer = result.params.layers[l];
      const Linear& g = grads.layers[l];
      for (std::size_t i = 0; i < layer.w.size(); ++i)
        layer.w[i] -= step_size * g.w[i];
      for (std::size_t i = 0; i < layer.b.size(); ++i)
        layer.b[i] -= step_size * g.b[i];
    }
  }
  return result;
}

// -- sampling --------------------------------------------------------------------

struct SamplerConfig {
  int num_steps = 20;
  double timestep_shift = 4.0;
  guidance::GuidanceConfig guidance;
  std::uint64_t seed = 0;
};

/// Euler sampler. Starts from seeded unit Gaussian noise at t = 1 and steps
/// toward the data end t = 0 along the shifted grid; following the learned
/// velocity (target x0 - x1) means x <- x + dt * v per step. Guidance
/// branches are evaluated via condition dropping: the text-drop branch
/// drops class and coordinate blocks together, the coord-drop branch only
/// coordinates, and the image branch coincides with full conditioning
/// because the toy model carries no reference-image modality.
inline ToyScene sample(const ModelParams& params,
                       const icbp::LayoutPrompt& prompt,
                       const SamplerConfig& cfg) {
  if (cfg.num_steps < 1) throw ConfigError("sample: num_steps must be >= 1");
  const ModelConfig& mc = params.config;
  const int scene_dim = mc.scene_dim();

  const ConditionEmbedding full = encode_condition(prompt, mc.vocab, {});
  const ConditionEmbedding text_drop =
      encode_condition(prompt, mc.vocab, {true, true});
  const ConditionEmbedding coord_drop =
      encode_condition(prompt, mc.vocab, {false, true});

  struct Branch {
    const std::vector<double>* cond;
  };
  std::vector<Branch> branches{{&full.pooled}, {&text_drop.pooled}};
  const bool coord_on = cfg.guidance.coord_enabled;
  const bool img_on = cfg.guidance.img_enabled;
  if (coord_on) branches.push_back({&coord_drop.pooled});
  if (img_on) branches.push_back({&full.pooled});  // no image modality

  Rng rng(cfg.seed, "sample");
  std::vector<double> x(scene_dim);
  for (double& v : x) v = rng.normal();

  const int nb = static_cast<int>(branches.size());
  std::vector<double> inputs(static_cast<std::size_t>(nb) * mc.input_dim());
  detail::Activations acts;

  for (int k = 0; k < cfg.num_steps; ++k) {
    const double u_hi = 1.0 - static_cast<double>(k) / cfg.num_steps;
    const double u_lo = 1.0 - static_cast<double>(k + 1) / cfg.num_steps;
    const double t_hi = shift_timestep(u_hi, cfg.timestep_shift);
    const double t_lo = shift_timestep(u_lo, cfg.timestep_shift);

    for (int b = 0; b < nb; ++b) {
      double* row = inputs.data() + static_cast<std::size_t>(b) * mc.input_dim();
      std::copy(x.begin(), x.end(), row);
      row[scene_dim] = t_hi;
      std::copy(branches[b].cond->begin(), branches[b].cond->end(),
                row + scene_dim + 1);
    }
    detail::forward(params, inputs, nb, acts);
    const std::vector<double>& out = acts.post.back();
    const auto branch_velocity = [&](int b) {
      return guidance::Velocity::flat(std::vector<double>(
          out.begin() + static_cast<std::size_t>(b) * scene_dim,
          out.begin() + static_cast<std::size_t>(b + 1) * scene_dim));
    };

    guidance::BranchSet set;
    set.v_full = branch_velocity(0);
    set.v_text_drop = branch_velocity(1);
    int next = 2;
    set.coord_enabled = coord_on;
    if (coord_on) set.v_coord_drop = branch_velocity(next++);
    set.img_enabled = img_on;
    if (img_on) set.v_img_drop = branch_velocity(next++);

    guidance::FuseConfig fuse;
    fuse.scales = cfg.guidance.scales;
    fuse.norm = cfg.guidance.norm;
    fuse.norm_base = cfg.guidance.norm_base;
    const guidance::Velocity fused = guidance::hierarchical_fuse(set, fuse);

    const double dt = t_hi - t_lo;
    for (int i = 0; i < scene_dim; ++i) {
      x[i] += dt * fused.data[i];
      if (!std::isfinite(x[i]))
        throw NonFinite("sample: non-finite state at step " +
                        std::to_string(k));
    }
  }

  ToyScene scene = ToyScene::filled(mc.scene_h, mc.scene_w, mc.scene_c, 0.0);
  for (int i = 0; i < scene_dim; ++i)
    scene.pixels[i] = std::clamp(x[i], 0.0, 1.0);
  return scene;
}

// -- checkpoint ------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointMagic = 0x4c4b464d;  // "LKFM"
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const ModelParams& params,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  const auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  const auto put_str = [&](const std::string& s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  };
  put_u32(kCheckpointMagic);
  put_u32(kCheckpointVersion);
  put_u32(static_cast<std::uint32_t>(params.config.scene_h));
  put_u32(static_cast<std::uint32_t>(params.config.scene_w));
  put_u32(static_cast<std::uint32_t>(params.config.scene_c));
  put_u32(static_cast<std::uint32_t>(params.config.vocab.size()));
  for (const std::string& s : params.config.vocab) put_str(s);
  put_u32(static_cast<std::uint32_t>(params.config.hidden.size()));
  for (int h : params.config.hidden) put_u32(static_cast<std::uint32_t>(h));
  put_u32(static_cast<std::uint32_t>(params.layers.size()));
  for (const Linear& layer : params.layers) {
    put_u32(static_cast<std::uint32_t>(layer.in));
    put_u32(static_cast<std::uint32_t>(layer.out));
    out.write(reinterpret_cast<const char*>(layer.w.data()),
              static_cast<std::streamsize>(layer.w.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.b.data()),
              static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write on checkpoint: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  const auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("truncated checkpoint: " + path);
    return v;
  };
  const auto get_str = [&]() {
    const std::uint32_t n = get_u32();
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("truncated checkpoint: " + path);
    return s;
  };
  if (get_u32() != kCheckpointMagic)
    throw DataError("not a model checkpoint: " + path);
  if (get_u32() != kCheckpointVersion)
    throw DataError("unsupported checkpoint version in " + path);
  ModelParams params;
  params.config.scene_h = static_cast<int>(get_u32());
  params.config.scene_w = static_cast<int>(get_u32());
  params.config.scene_c = static_cast<int>(get_u32());
  const std::uint32_t vocab_n = get_u32();
  for (std::uint32_t i = 0; i < vocab_n; ++i)
    params.config.vocab.push_back(get_str());
  params.config.hidden.clear();
  const std::uint32_t hidden_n = get_u32();
  for (std::uint32_t i = 0; i < hidden_n; ++i)
    params.config.hidden.push_back(static_cast<int>(get_u32()));
  const std::uint32_t layer_n = get_u32();
  for (std::uint32_t l = 0; l < layer_n; ++l) {
    Linear layer;
    layer.in = static_cast<int>(get_u32());
    layer.out = static_cast<int>(get_u32());
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.resize(layer.out);
    in.read(reinterpret_cast<char*>(layer.w.data()),
            static_cast<std::streamsize>(layer.w.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(layer.b.data()),
            static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint: " + path);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

}  // namespace layoutkit::flowmatch
