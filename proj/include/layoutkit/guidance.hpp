// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classifier-free guidance with a coordinate branch. Branch velocities are
// fused hierarchically (text stage, then coordinate stage, then image stage);
// each stage extrapolates v_drop + s * (v_keep - v_drop). Disabling the
// coordinate stage reduces bitwise to plain two-branch text-image CFG, and
// disabling the image stage as well recovers text-only CFG. The coordinate
// stage output can be renormalized against a base velocity so guidance does
// not inflate the step magnitude.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutkit/errors.hpp"

namespace layoutkit::guidance {

/// Flat numeric tensor with a (channels, height, width) or (dim,) shape.
struct Velocity {
  std::vector<double> data;
  std::vector<int> shape;  // product must equal data.size()

  static Velocity flat(std::vector<double> values) {
    Velocity v;
    v.shape = {static_cast<int>(values.size())};
    v.data = std::move(values);
    return v;
  }

  static Velocity chw(int c, int h, int w, std::vector<double> values) {
    Velocity v;
    v.shape = {c, h, w};
    v.data = std::move(values);
    return v;
  }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Velocity& other) const {
    return shape == other.shape;
  }

  int channels() const { return shape.size() == 3 ? shape[0] : 1; }
  std::size_t channel_stride() const {
    return shape.size() == 3
               ? static_cast<std::size_t>(shape[1]) * shape[2]
               : data.size();
  }
};

namespace detail {

inline void require_same_shape(const Velocity& a, const Velocity& b,
                               const char* where) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(where) + ": velocity shapes differ");
  if (a.data.size() != b.data.size())
    throw ShapeMismatch(std::string(where) + ": velocity sizes differ");
}

inline double l2_norm(const double* p, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += p[i] * p[i];
  return std::sqrt(sum);
}

}  // namespace detail

struct GuidanceScales {
  double s_text = 1.0;
  double s_img = 1.0;
  double s_coord = 1.0;
};

enum class NormDomain { Global, PerChannel };

struct NormConfig {
  NormDomain domain = NormDomain::Global;
  double epsilon = 1e-8;
};

/// Which velocity the renormalization treats as the magnitude reference:
/// the text-stage output (the velocity the plain text-guided model would
/// predict) or the coordinate-drop branch itself.
enum class NormBase { TextCfg, CoordDrop };

/// v_uncond + s * (v_cond - v_uncond). s == 1 and s == 0 return the exact
/// branch, so the guidance-off identities hold bitwise.
inline Velocity cfg_combine(const Velocity& v_uncond, const Velocity& v_cond,
                            double s) {
  detail::require_same_shape(v_uncond, v_cond, "cfg_combine");
  if (!std::isfinite(s)) throw NonFinite("cfg_combine: scale is not finite");
  if (s == 1.0) return v_cond;
  if (s == 0.0) return v_uncond;
  Velocity out = v_uncond;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = v_uncond.data[i] + s * (v_cond.data[i] - v_uncond.data[i]);
  return out;
}

/// Rescales v_guided so its norm matches v_base:
/// out = alpha * v_guided, alpha = |v_base| / (|v_guided| + epsilon),
/// computed globally or per channel over each HxW slice.
inline Velocity renormalize(const Velocity& v_guided, const Velocity& v_base,
                            const NormConfig& cfg) {
  detail::require_same_shape(v_guided, v_base, "renormalize");
  Velocity out = v_guided;
  if (cfg.domain == NormDomain::Global) {
    const double alpha =
        detail::l2_norm(v_base.data.data(), v_base.size()) /
        (detail::l2_norm(v_guided.data.data(), v_guided.size()) + cfg.epsilon);
    for (double& x : out.data) x *= alpha;
    return out;
  }
  const int channels = v_guided.channels();
  const std::size_t stride = v_guided.channel_stride();
  for (int c = 0; c < channels; ++c) {
    const std::size_t off = static_cast<std::size_t>(c) * stride;
    const double alpha =
        detail::l2_norm(v_base.data.data() + off, stride) /
        (detail::l2_norm(v_guided.data.data() + off, stride) + cfg.epsilon);
    for (std::size_t i = 0; i < stride; ++i) out.data[off + i] *= alpha;
  }
  return out;
}

/// Branch predictions for one latent state. Superscripts name the dropped
/// condition: the text-drop branch drops text and coordinates together,
/// the coord-drop branch keeps text and image, the img-drop branch keeps
/// text and coordinates.
struct BranchSet {
  Velocity v_full;
  Velocity v_text_drop;
  std::optional<Velocity> v_coord_drop;
  std::optional<Velocity> v_img_drop;
  bool coord_enabled = true;
  bool img_enabled = true;
};

struct FuseConfig {
  GuidanceScales scales;
  std::optional<NormConfig> norm;
  NormBase norm_base = NormBase::TextCfg;
};

/// Three-stage hierarchical fusion:
///   v_text_cfg  = combine(v_text_drop, v_full, s_text)
///   v_coord_cfg = combine(v_coord_drop, v_text_cfg, s_coord)   [if enabled]
///   v_final     = combine(v_img_drop, v_coord_cfg, s_img)      [if enabled]
/// with optional renormalization of the coordinate-stage output.
inline Velocity hierarchical_fuse(const BranchSet& branches,
                                  const FuseConfig& cfg) {
  Velocity v = cfg_combine(branches.v_text_drop, branches.v_full,
                           cfg.scales.s_text);
  if (branches.coord_enabled) {
    if (!branches.v_coord_drop)
      throw MissingBranch(
          "hierarchical_fuse: coordinate stage enabled but coord-drop branch missing");
    Velocity coord_out =
        cfg_combine(*branches.v_coord_drop, v, cfg.scales.s_coord);
    if (cfg.norm) {
      const Velocity& base = cfg.norm_base == NormBase::TextCfg
                                 ? v
                                 : *branches.v_coord_drop;
      coord_out = renormalize(coord_out, base, *cfg.norm);
    }
    v = std::move(coord_out);
  }
  if (branches.img_enabled) {
    if (!branches.v_img_drop)
      throw MissingBranch(
          "hierarchical_fuse: image stage enabled but img-drop branch missing");
    v = cfg_combine(*branches.v_img_drop, v, cfg.scales.s_img);
  }
  return v;
}

// -- config block -------------------------------------------------------------

struct GuidanceConfig {
  GuidanceScales scales;
  bool coord_enabled = true;
  bool img_enabled = false;
  std::optional<NormConfig> norm;
  NormBase norm_base = NormBase::TextCfg;
};

/// Parses `{ "s_text": f, "s_img": f, "s_coord": f, "coord_enabled": b,
///           "img_enabled": b, "norm": {"domain": "global"|"per_channel",
///           "epsilon": f} | null }`.
inline GuidanceConfig guidance_config_from_json(const nlohmann::json& j) {
  GuidanceConfig cfg;
  cfg.scales.s_text = j.value("s_text", 1.0);
  cfg.scales.s_img = j.value("s_img", 1.0);
  cfg.scales.s_coord = j.value("s_coord", 1.0);
  cfg.coord_enabled = j.value("coord_enabled", true);
  cfg.img_enabled = j.value("img_enabled", false);
  if (!std::isfinite(cfg.scales.s_text) || !std::isfinite(cfg.scales.s_img) ||
      !std::isfinite(cfg.scales.s_coord) || cfg.scales.s_text < 0.0 ||
      cfg.scales.s_img < 0.0 || cfg.scales.s_coord < 0.0)
    throw ConfigError("guidance scales must be finite and nonnegative");
  if (j.contains("norm") && !j.at("norm").is_null()) {
    const auto& n = j.at("norm");
    NormConfig norm;
    const std::string domain = n.value("domain", "global");
    if (domain == "global") {
      norm.domain = NormDomain::Global;
    } else if (domain == "per_channel") {
      norm.domain = NormDomain::PerChannel;
    } else {
      throw ConfigError("norm domain must be 'global' or 'per_channel'");
    }
    norm.epsilon = n.value("epsilon", 1e-8);
    if (!(norm.epsilon > 0.0))
      throw ConfigError("norm epsilon must be positive");
    cfg.norm = norm;
  }
  if (j.contains("norm_base")) {
    const std::string base = j.at("norm_base").get<std::string>();
    if (base == "text_cfg") {
      cfg.norm_base = NormBase::TextCfg;
    } else if (base == "coord_drop") {
      cfg.norm_base = NormBase::CoordDrop;
    } else {
      throw ConfigError("norm_base must be 'text_cfg' or 'coord_drop'");
    }
  }
  return cfg;
}

inline nlohmann::json guidance_config_to_json(const GuidanceConfig& cfg) {
  nlohmann::json j{{"s_text", cfg.scales.s_text},
                   {"s_img", cfg.scales.s_img},
                   {"s_coord", cfg.scales.s_coord},
                   {"coord_enabled", cfg.coord_enabled},
                   {"img_enabled", cfg.img_enabled},
                   {"norm", nullptr}};
  if (cfg.norm) {
    j["norm"] = {{"domain", cfg.norm->domain == NormDomain::Global
                                ? "global"
                                : "per_channel"},
                 {"epsilon", cfg.norm->epsilon}};
  }
  j["norm_base"] =
      cfg.norm_base == NormBase::TextCfg ? "text_cfg" : "coord_drop";
  return j;
}

}  // namespace layoutkit::guidance
