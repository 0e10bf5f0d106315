// Learned components: per-constraint-kind feature encoders and energy
// networks, the conditional pair networks for the composed energy, a
// point-cloud encoder with shape code, the SDF prediction network, and the
// three weighting mechanisms (fixed, MLP, compositional weighting
// transformer).
//
// Energies are parameterized as net(features, k-embedding) / sigma_k so the
// raw network output stays O(1) across noise scales.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adcs/constraints.hpp"
#include "adcs/errors.hpp"
#include "adcs/kin.hpp"
#include "adcs/lie.hpp"
#include "adcs/rng.hpp"
#include "adcs/shapes.hpp"
#include "adcs/tape.hpp"
#include "adcs/tape_geometry.hpp"

namespace adcs::models {

using ad::Mat;
using ad::Tape;
using ad::TapePose;
using ad::Var;
using constraints::Constraint;
using constraints::ConstraintSet;
using constraints::Kind;

// --- parameters -----------------------------------------------------------

class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols) {
    entries_.push_back({name, Eigen::MatrixXd::Zero(rows, cols)});
    return static_cast<int>(entries_.size()) - 1;
  }
  Eigen::MatrixXd& at(int id) { return entries_[id].second; }
  const Eigen::MatrixXd& at(int id) const { return entries_[id].second; }
  const std::string& name(int id) const { return entries_[id].first; }
  int size() const { return static_cast<int>(entries_.size()); }

  double max_abs_diff(const ParamStore& other) const {
    double m = 0;
    for (int i = 0; i < size(); ++i)
      m = std::max(m, (entries_[i].second - other.entries_[i].second)
                          .cwiseAbs()
                          .maxCoeff());
    return m;
  }

 private:
  std::vector<std::pair<std::string, Eigen::MatrixXd>> entries_;
};

inline void xavier_init(Eigen::MatrixXd& w, rng::Stream& rs) {
  const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = rs.uniform(-limit, limit);
}

// Binds store parameters to tape leaves, one leaf per parameter per tape.
class Binder {
 public:
  Binder(Tape& t, const ParamStore& store)
      : tape_(t), store_(store), bound_(store.size()) {}

  Var use(int id) {
    if (!bound_[id].valid()) bound_[id] = tape_.leaf(store_.at(id));
    return bound_[id];
  }

  // Accumulates d(loss)/d(param) for every bound parameter after backward().
  void collect(std::vector<Eigen::MatrixXd>& grads) const {
    for (int id = 0; id < static_cast<int>(bound_.size()); ++id)
      if (bound_[id].valid()) grads[id] += tape_.grad(bound_[id]);
  }

 private:
  Tape& tape_;
  const ParamStore& store_;
  std::vector<Var> bound_;
};

// --- multilayer perceptrons -------------------------------------------------

enum class Act { Tanh, Softplus };

struct Mlp {
  std::vector<int> w, b;  // param ids, layer by layer

  static Mlp create(ParamStore& store, const std::string& name,
                    const std::vector<int>& dims, rng::Stream& rs) {
    Mlp m;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      const int wi = store.add(name + ".w" + std::to_string(l), dims[l + 1], dims[l]);
      const int bi = store.add(name + ".b" + std::to_string(l), dims[l + 1], 1);
      xavier_init(store.at(wi), rs);
      m.w.push_back(wi);
      m.b.push_back(bi);
    }
    return m;
  }
  int in_dim(const ParamStore& s) const { return static_cast<int>(s.at(w[0]).cols()); }
};

// Forward pass keeping the post-activation of every hidden layer so forward
// tangents can be rebuilt through the same weights. The last layer is linear.
struct MlpTrace {
  std::vector<Var> post;  // hidden activations
  Var out;
};

inline Var activation(Tape& t, Var x, Act act) {
  return act == Act::Tanh ? t.tanh(x) : t.softplus(x);
}

// d(act)/d(pre) expressed through values already on the tape.
inline Var activation_deriv(Tape& t, Var post, Var pre, Act act) {
  if (act == Act::Tanh) {
    // 1 - post^2
    Var ones = t.leaf(Mat::Ones(t.val(post).rows(), 1));
    return t.sub(ones, t.hadamard(post, post));
  }
  // softplus' = sigmoid(pre) = 1 / (1 + exp(-pre))
  Var ones = t.leaf(Mat::Ones(t.val(pre).rows(), 1));
  return t.recip(t.add(ones, t.exp(t.neg(pre))));
}

struct MlpForward {
  MlpTrace trace;
  std::vector<Var> pre;  // pre-activations (for softplus tangent)
};

inline MlpForward mlp_forward(Tape& t, Binder& bind, const Mlp& m, Var x, Act act) {
  MlpForward f;
  Var h = x;
  const int layers = static_cast<int>(m.w.size());
  for (int l = 0; l < layers; ++l) {
    Var pre = t.add(t.matmul(bind.use(m.w[l]), h), bind.use(m.b[l]));
    if (l + 1 == layers) {
      f.trace.out = pre;
    } else {
      f.pre.push_back(pre);
      h = activation(t, pre, act);
      f.trace.post.push_back(h);
    }
  }
  return f;
}

// Forward tangent through the same MLP: dx is the input tangent (a tape
// node, often a constant direction). Reuses the recorded activations.
inline Var mlp_tangent(Tape& t, Binder& bind, const Mlp& m, const MlpForward& f,
                       Var dx, Act act) {
  Var dh = dx;
  const int layers = static_cast<int>(m.w.size());
  for (int l = 0; l < layers; ++l) {
    Var dpre = t.matmul(bind.use(m.w[l]), dh);
    if (l + 1 == layers) return dpre;
    dh = t.hadamard(activation_deriv(t, f.trace.post[l], f.pre[l], act), dpre);
  }
  return dh;
}

// --- model configuration ----------------------------------------------------

struct ModelConfig {
  int feat_dim = 16;    // encoded feature width
  int hidden = 48;      // energy net hidden width
  int k_embed = 8;      // timestep embedding width
  int z_dim = 16;       // shape code width
  int pc_hidden = 48;   // point encoder width
  int sdf_hidden = 48;
  int token_dim = 32;   // CWT token width
  int heads = 2;
  int n_max = 6;        // maximum active constraints
  double posenc_scale = 1.0;
  bool freeze_posenc = false;  // fix positional encodings instead of resampling
};

enum class WeightMode { Fixed, Mlp, Cwt };

inline std::string weight_mode_tag(WeightMode m) {
  switch (m) {
    case WeightMode::Fixed: return "fixed";
    case WeightMode::Mlp: return "mlp";
    case WeightMode::Cwt: return "cwt";
  }
  return "?";
}
inline WeightMode weight_mode_from_tag(const std::string& s) {
  if (s == "fixed") return WeightMode::Fixed;
  if (s == "mlp") return WeightMode::Mlp;
  if (s == "cwt") return WeightMode::Cwt;
  throw SchemaMismatch("unknown weighting mode: " + s);
}

// Raw feature width per constraint kind (inputs to the encoders).
inline int raw_feature_dim(Kind k, const ModelConfig& cfg) {
  switch (k) {
    case Kind::RelativePose:
    case Kind::AbsolutePose:
      return 6;
    case Kind::MidpointEq:
    case Kind::MidpointBox:
      return 3;
    case Kind::OrientationAxis:
      return 1;
    case Kind::OrientationFull:
      return 3;
    case Kind::MidpointOnSurface:
      return 1 + cfg.z_dim + 3;  // predicted sdf, shape code, midpoint
    case Kind::SurfaceNormalOrientation:
      return 1 + cfg.z_dim + 3 + 3;  // + rotated body axis
    default:
      throw WrongArity("no learned feature for " + constraints::kind_tag(k));
  }
}

inline std::vector<Kind> learned_kinds() {
  return {Kind::RelativePose,      Kind::AbsolutePose,
          Kind::MidpointEq,        Kind::MidpointBox,
          Kind::MidpointOnSurface, Kind::OrientationAxis,
          Kind::OrientationFull,   Kind::SurfaceNormalOrientation};
}

inline Eigen::VectorXd k_embedding(int k, int dim) {
  Eigen::VectorXd e(dim);
  for (int j = 0; j < dim / 2; ++j) {
    const double f = std::pow(10000.0, -2.0 * j / dim);
    e[2 * j] = std::sin(k * f);
    e[2 * j + 1] = std::cos(k * f);
  }
  return e;
}

// --- the model --------------------------------------------------------------

class AdcsModel {
 public:
  ModelConfig cfg;
  ParamStore params;
  lie::NoiseSchedule schedule;
  WeightMode mode = WeightMode::Cwt;
  Eigen::VectorXd fixed_weights;  // normalized at load; empty = uniform
  std::int64_t trained_steps = 0;

  // per-kind nets, keyed by kind tag
  std::map<std::string, Mlp> encoders;   // raw -> feat_dim
  std::map<std::string, Mlp> energies;   // feat_dim + k_embed -> 1
  std::map<std::string, Mlp> pairs;      // 2*feat_dim + k_embed -> 1
  Mlp pc_point;                          // 3 -> pc_hidden (per point)
  int pc_out_w = -1, pc_out_b = -1;      // pc_hidden -> z_dim
  Mlp sdf_net;                           // z_dim + 3 -> 1
  Mlp weight_mlp;                        // n_max -> n_max logits
  int cwt_embed_w = -1, cwt_embed_b = -1;           // 1 -> token_dim
  std::vector<int> cwt_q, cwt_k, cwt_v;             // per head: dh x token_dim
  int cwt_o = -1;                                   // token_dim x token_dim
  int cwt_head_w = -1, cwt_head_b = -1;             // token_dim -> 1

  static AdcsModel create(const ModelConfig& cfg, const lie::NoiseSchedule& sched,
                          WeightMode mode, std::uint64_t seed) {
    AdcsModel m;
    m.cfg = cfg;
    m.schedule = sched;
    m.mode = mode;
    rng::Stream rs(seed, "init");
    auto& P = m.params;
    for (Kind k : learned_kinds()) {
      const std::string tag = constraints::kind_tag(k);
      const int raw = raw_feature_dim(k, cfg);
      m.encoders[tag] = Mlp::create(P, "enc." + tag, {raw, cfg.feat_dim}, rs);
      m.energies[tag] = Mlp::create(
          P, "energy." + tag,
          {cfg.feat_dim + cfg.k_embed, cfg.hidden, cfg.hidden, cfg.hidden, cfg.hidden, 1},
          rs);
      if (k != Kind::RelativePose)
        m.pairs[tag] = Mlp::create(
            P, "pair." + tag,
            {2 * cfg.feat_dim + cfg.k_embed, cfg.hidden, cfg.hidden, cfg.hidden, cfg.hidden, 1},
            rs);
    }
    m.pc_point = Mlp::create(P, "pc.point", {3, cfg.pc_hidden, cfg.pc_hidden}, rs);
    m.pc_out_w = P.add("pc.out.w", cfg.z_dim, cfg.pc_hidden);
    m.pc_out_b = P.add("pc.out.b", cfg.z_dim, 1);
    xavier_init(P.at(m.pc_out_w), rs);
    m.sdf_net = Mlp::create(P, "sdf",
                            {cfg.z_dim + 3, cfg.sdf_hidden, cfg.sdf_hidden, cfg.sdf_hidden, 1},
                            rs);
    m.weight_mlp = Mlp::create(P, "wmlp", {cfg.n_max, cfg.hidden, cfg.n_max}, rs);
    m.cwt_embed_w = P.add("cwt.embed.w", cfg.token_dim, 1);
    m.cwt_embed_b = P.add("cwt.embed.b", cfg.token_dim, 1);
    xavier_init(P.at(m.cwt_embed_w), rs);
    const int dh = cfg.token_dim / cfg.heads;
    for (int h = 0; h < cfg.heads; ++h) {
      m.cwt_q.push_back(P.add("cwt.q" + std::to_string(h), dh, cfg.token_dim));
      m.cwt_k.push_back(P.add("cwt.k" + std::to_string(h), dh, cfg.token_dim));
      m.cwt_v.push_back(P.add("cwt.v" + std::to_string(h), dh, cfg.token_dim));
      xavier_init(P.at(m.cwt_q.back()), rs);
      xavier_init(P.at(m.cwt_k.back()), rs);
      xavier_init(P.at(m.cwt_v.back()), rs);
    }
    m.cwt_o = P.add("cwt.o", cfg.token_dim, cfg.token_dim);
    xavier_init(P.at(m.cwt_o), rs);
    m.cwt_head_w = P.add("cwt.head.w", 1, cfg.token_dim);
    m.cwt_head_b = P.add("cwt.head.b", 1, 1);
    xavier_init(P.at(m.cwt_head_w), rs);
    return m;
  }

  // --- point cloud / sdf ----------------------------------------------------

  // Shape code on the tape (training path: gradients reach the encoder).
  Var encode_cloud(Tape& t, Binder& bind, const std::vector<shapes::Vec3>& cloud) const {
    if (cloud.empty()) throw EmptyCloud();
    Mat pts(cloud.size(), 3);
    for (size_t i = 0; i < cloud.size(); ++i) pts.row(i) = cloud[i].transpose();
    // per-point MLP applied to all rows at once: (P x 3) times W^T
    Var h = t.leaf(pts);
    for (size_t l = 0; l < pc_point.w.size(); ++l) {
      Var wt = t.transpose(bind.use(pc_point.w[l]));
      Var br = t.transpose(bind.use(pc_point.b[l]));
      h = t.tanh(t.add_rowvec(t.matmul(h, wt), br));
    }
    Var pooled = t.transpose(t.max_rows(h));  // pc_hidden x 1
    return t.add(t.matmul(bind.use(pc_out_w), pooled), bind.use(pc_out_b));
  }

  Eigen::VectorXd encode_cloud_value(const std::vector<shapes::Vec3>& cloud) const {
    Tape t;
    Binder bind(t, params);
    Var z = encode_cloud(t, bind, cloud);
    return t.val(z);
  }

  Var predict_sdf(Tape& t, Binder& bind, Var z, Var point) const {
    Var in = t.vcat(z, point);
    return mlp_forward(t, bind, sdf_net, in, Act::Softplus).trace.out;
  }

  double predict_sdf_value(const std::vector<shapes::Vec3>& cloud,
                           const shapes::Vec3& query) const {
    Tape t;
    Binder bind(t, params);
    Var z = encode_cloud(t, bind, cloud);
    Var s = predict_sdf(t, bind, z, t.leaf(Mat(query)));
    return t.scalar(s);
  }

  // --- weighting ------------------------------------------------------------

  struct Composed {
    Var total;
    std::vector<Var> weights;  // per active token, normalized
  };

  // Column-vector softmax via the row softmax primitive.
  static Var softmax_col(Tape& t, Var col) {
    return t.transpose(t.softmax_rows(t.transpose(col)));
  }

  // Composition weights over the active energy tokens; the total is
  // sum_i w_i e_i. Inactive slots never contribute tokens.
  Composed compose(Tape& t, Binder& bind, const std::vector<Var>& tokens,
                   const std::vector<int>& slots, rng::Stream& posenc) const {
    if (static_cast<int>(tokens.size()) > cfg.n_max)
      throw TooManyConstraints("active constraints exceed n_max");
    const int A = static_cast<int>(tokens.size());
    Composed out;
    if (A == 0) {
      out.total = t.leaf(0.0);
      return out;
    }
    switch (mode) {
      case WeightMode::Fixed: {
        Eigen::VectorXd w(A);
        for (int i = 0; i < A; ++i)
          w[i] = fixed_weights.size() > slots[i] ? fixed_weights[slots[i]] : 1.0;
        w /= w.sum();
        out.total = t.leaf(0.0);
        for (int i = 0; i < A; ++i) {
          Var wi = t.leaf(w[i]);
          out.weights.push_back(wi);
          out.total = t.add(out.total, t.hadamard(wi, tokens[i]));
        }
        return out;
      }
      case WeightMode::Mlp: {
        // zero-padded energy vector of length n_max, logits masked to active
        Var padded = t.leaf(Mat::Zero(cfg.n_max, 1));
        Var e = tokens[0];
        {
          // paste tokens into the padded vector via basis scaling
          Var acc = t.leaf(Mat::Zero(cfg.n_max, 1));
          for (int i = 0; i < A; ++i) {
            Mat basis = Mat::Zero(cfg.n_max, 1);
            basis(slots[i], 0) = 1.0;
            acc = t.add(acc, t.scale(t.leaf(basis), tokens[i]));
          }
          padded = acc;
        }
        (void)e;
        Var logits = mlp_forward(t, bind, weight_mlp, padded, Act::Tanh).trace.out;
        Var active_logits = t.entry(logits, slots[0], 0);
        for (int i = 1; i < A; ++i)
          active_logits = t.vcat(active_logits, t.entry(logits, slots[i], 0));
        Var w = softmax_col(t, active_logits);
        out.total = t.leaf(0.0);
        for (int i = 0; i < A; ++i) {
          Var wi = A == 1 ? t.leaf(1.0) : t.entry(w, i, 0);
          out.weights.push_back(wi);
          out.total = t.add(out.total, t.hadamard(wi, tokens[i]));
        }
        return out;
      }
      case WeightMode::Cwt:
        return compose_cwt(t, bind, tokens, posenc);
    }
    throw Error("unreachable");
  }

 private:
  Composed compose_cwt(Tape& t, Binder& bind, const std::vector<Var>& tokens,
                       rng::Stream& posenc) const {
    const int A = static_cast<int>(tokens.size());
    const int dh = cfg.token_dim / cfg.heads;
    // token embeddings + randomly drawn positional encodings
    std::vector<Var> tok(A);
    for (int i = 0; i < A; ++i) {
      Mat pe(cfg.token_dim, 1);
      for (int d = 0; d < cfg.token_dim; ++d)
        pe(d, 0) = cfg.freeze_posenc ? 0.0 : cfg.posenc_scale * posenc.normal();
      Var emb = t.add(t.scale(bind.use(cwt_embed_w), tokens[i]), bind.use(cwt_embed_b));
      tok[i] = t.add(emb, t.leaf(pe));
    }
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Var> attn_cat(A);
    for (int h = 0; h < cfg.heads; ++h) {
      std::vector<Var> q(A), k(A), v(A);
      for (int i = 0; i < A; ++i) {
        q[i] = t.matmul(bind.use(cwt_q[h]), tok[i]);
        k[i] = t.matmul(bind.use(cwt_k[h]), tok[i]);
        v[i] = t.matmul(bind.use(cwt_v[h]), tok[i]);
      }
      for (int i = 0; i < A; ++i) {
        Var scores{};
        for (int j = 0; j < A; ++j) {
          Var s = t.scale(ad::tp_dot(q[i], k[j]), t.leaf(inv_sqrt_dh));
          scores = j == 0 ? s : t.vcat(scores, s);
        }
        Var a = A == 1 ? t.leaf(1.0) : softmax_col(t, scores);
        Var o = t.scale(v[0], A == 1 ? a : t.entry(a, 0, 0));
        for (int j = 1; j < A; ++j)
          o = t.add(o, t.scale(v[j], t.entry(a, j, 0)));
        attn_cat[i] = h == 0 ? o : t.vcat(attn_cat[i], o);
      }
    }
    Composed out;
    Var logits{};
    for (int i = 0; i < A; ++i) {
      Var res = t.add(tok[i], t.matmul(bind.use(cwt_o), attn_cat[i]));
      Var logit = t.add(t.matmul(bind.use(cwt_head_w), t.tanh(res)), bind.use(cwt_head_b));
      logits = i == 0 ? logit : t.vcat(logits, logit);
    }
    Var w = A == 1 ? t.leaf(1.0) : softmax_col(t, logits);
    out.total = t.leaf(0.0);
    for (int i = 0; i < A; ++i) {
      Var wi = A == 1 ? w : t.entry(w, i, 0);
      out.weights.push_back(wi);
      out.total = t.add(out.total, t.hadamard(wi, tokens[i]));
    }
    return out;
  }

 public:
  // --- energies -------------------------------------------------------------

  // One energy token: e_0 = E(f_0) for the fundamental constraint, otherwise
  // the conditional delta E(f_0, f_i) - e_0 realized by the pair network.
  // Inputs arrive encoded; k_emb is the timestep embedding leaf and inv_sigma
  // scales the raw output.
  struct TokenTrace {
    int slot = 0;
    Var token;           // energy value (tape)
    MlpForward net;      // energy or pair net trace
    MlpForward enc;      // encoder trace for this constraint's raw feature
    bool is_pair = false;
    std::string tag;
  };

  struct EnergyGraph {
    std::vector<TokenTrace> tokens;
    MlpForward enc0;     // fundamental encoder trace
    MlpForward net0;     // fundamental energy trace
    Var e0;
    Var total;
    std::vector<Var> weights;
    std::vector<int> slots;
  };

  // Builds tokens from raw feature vars (already on the tape), composes them
  // with the active weighting mode.
  EnergyGraph energy_graph(Tape& t, Binder& bind, const ConstraintSet& cs,
                           const std::vector<int>& active,
                           const std::vector<Var>& raw_features, int k,
                           rng::Stream& posenc) const {
    if (static_cast<int>(active.size()) > cfg.n_max)
      throw TooManyConstraints("active set larger than n_max");
    EnergyGraph g;
    const double sigma = schedule.sigma(k);
    Var inv_sigma = t.leaf(1.0 / sigma);
    Var kemb = t.leaf(Mat(k_embedding(k, cfg.k_embed)));

    // fundamental constraint: always index 0 of cs, feature must be supplied
    // as raw_features[0]
    const std::string tag0 = constraints::kind_tag(cs.items[0].kind);
    g.enc0 = mlp_forward(t, bind, encoders.at(tag0), raw_features[0], Act::Tanh);
    Var enc0_out = t.tanh(g.enc0.trace.out);
    g.net0 = mlp_forward(t, bind, energies.at(tag0), t.vcat(enc0_out, kemb),
                         Act::Softplus);
    g.e0 = t.scale(g.net0.trace.out, inv_sigma);

    for (size_t idx = 0; idx < active.size(); ++idx) {
      const int slot = active[idx];
      const Constraint& c = cs.items[slot];
      const std::string tag = constraints::kind_tag(c.kind);
      TokenTrace tt;
      tt.slot = slot;
      tt.tag = tag;
      if (slot == 0) {
        tt.token = g.e0;
        tt.enc = g.enc0;
        tt.net = g.net0;
      } else {
        tt.is_pair = true;
        tt.enc = mlp_forward(t, bind, encoders.at(tag), raw_features[idx], Act::Tanh);
        Var enc_out = t.tanh(tt.enc.trace.out);
        Var in = t.vcat(t.vcat(t.tanh(g.enc0.trace.out), enc_out), kemb);
        tt.net = mlp_forward(t, bind, pairs.at(tag), in, Act::Softplus);
        tt.token = t.sub(t.scale(tt.net.trace.out, inv_sigma), g.e0);
      }
      g.tokens.push_back(tt);
      g.slots.push_back(slot);
    }

    std::vector<Var> token_vars;
    for (const auto& tt : g.tokens) token_vars.push_back(tt.token);
    Composed comp = compose(t, bind, token_vars, g.slots, posenc);
    g.total = comp.total;
    g.weights = comp.weights;
    return g;
  }

  // Raw feature vars for the sampling path: geometry features through the
  // tape, SDF-kind features through the SDF network with a frozen shape code.
  std::vector<Var> tape_features(Tape& t, Binder& bind,
                                 const std::vector<TapePose>& poses,
                                 const ConstraintSet& cs,
                                 const std::vector<int>& active,
                                 const Eigen::VectorXd* frozen_z) const {
    std::vector<Var> out;
    for (int slot : active) {
      const Constraint& c = cs.items[slot];
      if (constraints::is_sdf_kind(c.kind)) {
        if (frozen_z == nullptr) throw EmptyCloud();
        Var z = t.leaf(Mat(*frozen_z));
        Var m = constraints::tp::midpoint(t, poses[c.ee_a], poses[c.ee_b]);
        Var shat = predict_sdf(t, bind, z, m);
        Var f = t.vcat(t.vcat(shat, z), m);
        if (c.kind == Kind::SurfaceNormalOrientation) {
          Var axis = t.matmul(poses[c.ee].R, t.leaf(Mat(c.body_axis)));
          f = t.vcat(f, axis);
        }
        out.push_back(f);
      } else {
        const auto comps = constraints::tp::feature_pose(t, c, poses);
        Var f = comps[0];
        for (size_t i = 1; i < comps.size(); ++i) f = t.vcat(f, comps[i]);
        out.push_back(f);
      }
    }
    return out;
  }
};

}  // namespace adcs::models
