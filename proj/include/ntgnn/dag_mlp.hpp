#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"
#include "ntgnn/matrices.hpp"

namespace ntgnn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

enum class ReadoutMode { combine_heights, fixed_single_height };
enum class Pool { mean, sum };
// First addend of the layer update: the initial node embedding (tree
// canonization, DAG-MLP) or the node's own previous embedding (GIN).
enum class FirstAddend { initial, previous_self };

inline ReadoutMode parse_readout(std::string_view s) {
  if (s == "combine" || s == "combine-heights") return ReadoutMode::combine_heights;
  if (s == "fixed" || s == "fixed-single-height") return ReadoutMode::fixed_single_height;
  throw ArgumentError("readout must be combine or fixed, got '" + std::string(s) + "'");
}
inline const char* to_string(ReadoutMode r) {
  return r == ReadoutMode::combine_heights ? "combine" : "fixed";
}
inline Pool parse_pool(std::string_view s) {
  if (s == "mean") return Pool::mean;
  if (s == "sum") return Pool::sum;
  throw ArgumentError("pool must be mean or sum, got '" + std::string(s) + "'");
}
inline const char* to_string(Pool p) { return p == Pool::mean ? "mean" : "sum"; }

template <typename S>
struct Dense {
  Mat<S> weight;  // in x out
  RowVec<S> bias;
};

// Two dense layers, rectifier in between, identity output.
template <typename S>
struct Mlp {
  Dense<S> hidden;
  Dense<S> output;

  struct Cache {
    Mat<S> input;
    Mat<S> pre;  // hidden pre-activation
  };

  std::size_t in_dim() const { return hidden.weight.rows(); }
  std::size_t out_dim() const { return output.weight.cols(); }

  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    Mat<S> pre = x * hidden.weight;
    pre.rowwise() += hidden.bias;
    Mat<S> out = pre.cwiseMax(S(0)) * output.weight;
    out.rowwise() += output.bias;
    if (cache) {
      cache->input = x;
      cache->pre = std::move(pre);
    }
    return out;
  }

  // Accumulates parameter gradients into grad and returns d loss / d input.
  Mat<S> backward(const Cache& cache, const Mat<S>& d_out, Mlp& grad) const {
    const Mat<S> act = cache.pre.cwiseMax(S(0));
    grad.output.weight.noalias() += act.transpose() * d_out;
    grad.output.bias += d_out.colwise().sum();
    Mat<S> d_pre = (d_out * output.weight.transpose()).array() * (cache.pre.array() > S(0)).template cast<S>();
    grad.hidden.weight.noalias() += cache.input.transpose() * d_pre;
    grad.hidden.bias += d_pre.colwise().sum();
    return d_pre * hidden.weight.transpose();
  }

  static Mlp zeros(std::size_t in, std::size_t hid, std::size_t out) {
    return {{Mat<S>::Zero(in, hid), RowVec<S>::Zero(hid)}, {Mat<S>::Zero(hid, out), RowVec<S>::Zero(out)}};
  }

  // Uniform in +-sqrt(6 / (fan_in + fan_out)); zero biases.
  static Mlp glorot(std::size_t in, std::size_t hid, std::size_t out, std::mt19937_64& rng) {
    Mlp m = zeros(in, hid, out);
    auto fill = [&rng](Mat<S>& w) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w.data()[i] = static_cast<S>((2.0 * u - 1.0) * limit);
      }
    };
    fill(m.hidden.weight);
    fill(m.output.weight);
    return m;
  }

  // Identity map on non-negative inputs.
  static Mlp identity(std::size_t dim) {
    Mlp m = zeros(dim, dim, dim);
    m.hidden.weight.setIdentity();
    m.output.weight.setIdentity();
    return m;
  }
};

struct ModelShape {
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 32;
  std::size_t num_layers = 1;  // n: MLP_1..MLP_n, eps_1..eps_n
  std::size_t num_classes = 2;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// Parameters MLP_0..MLP_n, eps_1..eps_n and the prediction head, plus the
// readout configuration.
template <typename S>
struct MlpStack {
  ModelShape shape;
  std::vector<Mlp<S>> mlps;  // [0] maps input features to embeddings
  std::vector<S> eps;        // eps[0] is unused and stays 0
  Mlp<S> head;
  ReadoutMode readout = ReadoutMode::combine_heights;
  Pool pool = Pool::mean;

  static MlpStack init(const ModelShape& shape, ReadoutMode readout, Pool pool, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MlpStack p;
    p.shape = shape;
    p.readout = readout;
    p.pool = pool;
    p.mlps.push_back(Mlp<S>::glorot(shape.input_dim, shape.hidden_dim, shape.embed_dim, rng));
    for (std::size_t i = 1; i <= shape.num_layers; ++i) {
      p.mlps.push_back(Mlp<S>::glorot(shape.embed_dim, shape.hidden_dim, shape.embed_dim, rng));
    }
    p.eps.assign(shape.num_layers + 1, S(0));
    p.head = Mlp<S>::glorot(shape.embed_dim, shape.hidden_dim, shape.num_classes, rng);
    return p;
  }

  static MlpStack zeros_like(const MlpStack& other) {
    MlpStack p = other;
    p.for_each_block([](S* data, std::size_t n) { std::fill(data, data + n, S(0)); });
    return p;
  }

  // Visits every parameter block in a fixed order: MLP_0..MLP_n (hidden
  // weight, hidden bias, output weight, output bias), eps_1..eps_n, head.
  template <typename F>
  void for_each_block(F&& f) {
    auto visit_mlp = [&f](Mlp<S>& m) {
      f(m.hidden.weight.data(), static_cast<std::size_t>(m.hidden.weight.size()));
      f(m.hidden.bias.data(), static_cast<std::size_t>(m.hidden.bias.size()));
      f(m.output.weight.data(), static_cast<std::size_t>(m.output.weight.size()));
      f(m.output.bias.data(), static_cast<std::size_t>(m.output.bias.size()));
    };
    for (auto& m : mlps) visit_mlp(m);
    if (eps.size() > 1) f(eps.data() + 1, eps.size() - 1);
    visit_mlp(head);
  }

  std::size_t num_params() const {
    std::size_t n = 0;
    const_cast<MlpStack*>(this)->for_each_block([&n](S*, std::size_t k) { n += k; });
    return n;
  }

  std::vector<S> flatten() const {
    std::vector<S> out;
    out.reserve(num_params());
    const_cast<MlpStack*>(this)->for_each_block([&out](S* d, std::size_t k) { out.insert(out.end(), d, d + k); });
    return out;
  }

  void unflatten(std::span<const S> values) {
    if (values.size() != num_params()) throw DimensionError("parameter vector has the wrong length");
    std::size_t pos = 0;
    for_each_block([&](S* d, std::size_t k) {
      std::copy(values.begin() + pos, values.begin() + pos + k, d);
      pos += k;
    });
  }

  bool all_finite() const {
    for (S x : flatten()) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }
};

template <typename S>
Mat<S> to_matrix(const FeatureMatrix& f) {
  Mat<S> out(static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(f.dim));
  for (std::size_t i = 0; i < f.values.size(); ++i) out.data()[i] = static_cast<S>(f.values[i]);
  return out;
}

// Forward state of one DAG-MLP evaluation over all DAG nodes.
template <typename S>
struct DagForward {
  typename Mlp<S>::Cache mlp0_cache;
  Mat<S> transformed;  // F' = MLP_0(F)
  Mat<S> x;            // final node embeddings
  std::vector<typename Mlp<S>::Cache> layer_cache;  // index i = layer i
  FirstAddend first_addend = FirstAddend::initial;

  // Root embedding of tree t.
  RowVec<S> root(const LayeredMatrices& m, std::size_t t) const { return x.row(m.root_rows.at(t)); }
};

namespace detail {

template <typename S>
void check_dag_shapes(const LayeredMatrices& m, const MlpStack<S>& p, FirstAddend mode) {
  if (p.mlps.size() < m.height + 1) {
    throw DimensionError("DAG has height " + std::to_string(m.height) + " but the model has only " +
                         std::to_string(p.mlps.size() - 1) + " layers");
  }
  if (m.features.dim != p.shape.input_dim) {
    throw DimensionError("feature dimension " + std::to_string(m.features.dim) + " does not match model input " +
                         std::to_string(p.shape.input_dim));
  }
  if (m.features.rows() != m.num_nodes) throw DimensionError("feature matrix needs one row per DAG node");
  if (mode == FirstAddend::previous_self && m.self_links.size() != m.num_nodes) {
    throw ArgumentError("previous-self first addend needs self links");
  }
}

}  // namespace detail

// X^[0] = L_0 F'; for i = 1..H the rows of L_i get
//   MLP_i((1 + eps_i) * F'(v) + sum_{(u,v) in E_i} mult * X(u))
// and all other rows carry over unchanged.
template <typename S>
DagForward<S> forward_dag(const LayeredMatrices& m, const MlpStack<S>& p,
                          FirstAddend mode = FirstAddend::initial) {
  detail::check_dag_shapes(m, p, mode);
  DagForward<S> fw;
  fw.first_addend = mode;
  const auto d = static_cast<Eigen::Index>(p.shape.embed_dim);
  fw.transformed = p.mlps[0].forward(to_matrix<S>(m.features), &fw.mlp0_cache);
  fw.x = Mat<S>::Zero(static_cast<Eigen::Index>(m.num_nodes), d);
  for (NodeId v : m.layer_rows[0]) fw.x.row(v) = fw.transformed.row(v);

  fw.layer_cache.resize(m.height + 1);
  std::vector<std::int32_t> pos(m.num_nodes, -1);
  for (std::size_t i = 1; i <= m.height; ++i) {
    const auto& rows = m.layer_rows[i];
    if (rows.empty()) continue;
    const S scale = S(1) + p.eps[i];
    Mat<S> z(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      pos[rows[r]] = static_cast<std::int32_t>(r);
      const NodeId src = mode == FirstAddend::initial ? rows[r] : m.self_links[rows[r]];
      z.row(r) = scale * (mode == FirstAddend::initial ? fw.transformed.row(src) : fw.x.row(src));
    }
    const auto& e = m.edge_layers[i];
    for (std::size_t k = 0; k < e.nnz(); ++k) {
      z.row(pos[e.row[k]]) += static_cast<S>(e.value[k]) * fw.x.row(e.col[k]);
    }
    Mat<S> out = p.mlps[i].forward(z, &fw.layer_cache[i]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      fw.x.row(rows[r]) = out.row(r);
      pos[rows[r]] = -1;
    }
  }
  return fw;
}

// Reverse pass of forward_dag. d_x is d loss / d X (consumed); parameter
// gradients are accumulated into grad.
template <typename S>
void backward_dag(const LayeredMatrices& m, const MlpStack<S>& p, const DagForward<S>& fw, Mat<S> d_x,
                  MlpStack<S>& grad) {
  Mat<S> d_transformed = Mat<S>::Zero(fw.transformed.rows(), fw.transformed.cols());
  std::vector<std::int32_t> pos(m.num_nodes, -1);
  for (std::size_t i = m.height; i >= 1; --i) {
    const auto& rows = m.layer_rows[i];
    if (rows.empty()) continue;
    Mat<S> d_out(static_cast<Eigen::Index>(rows.size()), d_x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      d_out.row(r) = d_x.row(rows[r]);
      pos[rows[r]] = static_cast<std::int32_t>(r);
    }
    const Mat<S> d_z = p.mlps[i].backward(fw.layer_cache[i], d_out, grad.mlps[i]);
    const S scale = S(1) + p.eps[i];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const NodeId v = rows[r];
      if (fw.first_addend == FirstAddend::initial) {
        grad.eps[i] += d_z.row(r).dot(fw.transformed.row(v));
        d_transformed.row(v) += scale * d_z.row(r);
      } else {
        const NodeId self = m.self_links[v];
        grad.eps[i] += d_z.row(r).dot(fw.x.row(self));
        d_x.row(self) += scale * d_z.row(r);
      }
    }
    const auto& e = m.edge_layers[i];
    for (std::size_t k = 0; k < e.nnz(); ++k) {
      d_x.row(e.col[k]) += static_cast<S>(e.value[k]) * d_z.row(pos[e.row[k]]);
    }
    for (NodeId v : rows) pos[v] = -1;
  }
  for (NodeId v : m.layer_rows[0]) d_transformed.row(v) += d_x.row(v);
  p.mlps[0].backward(fw.mlp0_cache, d_transformed, grad.mlps[0]);
}

enum class GinVariant { gin, canonization };

// Vertex-level message passing on the input graph. Returns x_0..x_L:
//   gin:           x_i(v) = MLP_i((1+eps_i) x_{i-1}(v) + sum_{u in N(v)} x_{i-1}(u))
//   canonization:  x_i(v) = MLP_i((1+eps_i) x_0(v)     + sum_{u in N(v)} x_{i-1}(u))
template <typename S>
std::vector<Mat<S>> forward_gin(const LabeledGraph& g, const Mat<S>& features, const MlpStack<S>& p,
                                GinVariant variant, std::size_t layers) {
  if (features.rows() != static_cast<Eigen::Index>(g.num_vertices())) {
    throw DimensionError("feature matrix needs one row per vertex");
  }
  if (layers + 1 > p.mlps.size()) throw DimensionError("model has fewer layers than requested");
  std::vector<Mat<S>> xs;
  xs.push_back(p.mlps[0].forward(features));
  for (std::size_t i = 1; i <= layers; ++i) {
    const Mat<S>& prev = xs.back();
    const Mat<S>& self = variant == GinVariant::gin ? prev : xs.front();
    Mat<S> z = (S(1) + p.eps[i]) * self;
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      for (VertexId u : g.neighbors(static_cast<VertexId>(v))) z.row(v) += prev.row(u);
    }
    xs.push_back(p.mlps[i].forward(z));
  }
  return xs;
}

// One-hot vertex label matrix of a graph.
template <typename S>
Mat<S> one_hot_labels(const LabeledGraph& g, std::size_t label_dimension) {
  Mat<S> f = Mat<S>::Zero(static_cast<Eigen::Index>(g.num_vertices()), static_cast<Eigen::Index>(label_dimension));
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const Label l = g.label(static_cast<VertexId>(v));
    if (static_cast<std::size_t>(l) >= label_dimension) throw DimensionError("label exceeds label dimension");
    f(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(l)) = S(1);
  }
  return f;
}

// Which DAG rows hold the tree roots of every (graph, height) pair.
struct ReadoutPlan {
  std::size_t max_height = 0;
  // roots[g][h] = root rows of graph g's trees of height h (one per vertex).
  std::vector<std::vector<std::vector<NodeId>>> roots;
  // Whether trees of height h were built at all.
  std::vector<bool> height_present;

  std::size_t num_graphs() const { return roots.size(); }
};

// Pools each height's roots per graph; combine-heights averages the pooled
// vectors over heights 0..H, fixed-single-height uses height H only. Graphs
// without vertices pool to zero.
template <typename S>
Mat<S> readout(const Mat<S>& x, const ReadoutPlan& plan, ReadoutMode mode, Pool pool) {
  Mat<S> out = Mat<S>::Zero(static_cast<Eigen::Index>(plan.num_graphs()), x.cols());
  const std::size_t lo = mode == ReadoutMode::combine_heights ? 0 : plan.max_height;
  for (std::size_t h = lo; h <= plan.max_height; ++h) {
    if (h >= plan.height_present.size() || !plan.height_present[h]) {
      throw ArgumentError("readout needs root embeddings of height " + std::to_string(h));
    }
  }
  const S height_weight = S(1) / static_cast<S>(plan.max_height + 1 - lo);
  for (std::size_t g = 0; g < plan.num_graphs(); ++g) {
    if (plan.roots[g].size() != plan.max_height + 1) throw ArgumentError("readout plan has no entry for every height");
    for (std::size_t h = lo; h <= plan.max_height; ++h) {
      const auto& rows = plan.roots[g][h];
      if (rows.empty()) continue;
      const S w = height_weight * (pool == Pool::mean ? S(1) / static_cast<S>(rows.size()) : S(1));
      for (NodeId r : rows) out.row(g) += w * x.row(r);
    }
  }
  return out;
}

template <typename S>
void backward_readout(const Mat<S>& d_out, const ReadoutPlan& plan, ReadoutMode mode, Pool pool, Mat<S>& d_x) {
  const std::size_t lo = mode == ReadoutMode::combine_heights ? 0 : plan.max_height;
  const S height_weight = S(1) / static_cast<S>(plan.max_height + 1 - lo);
  for (std::size_t g = 0; g < plan.num_graphs(); ++g) {
    for (std::size_t h = lo; h <= plan.max_height; ++h) {
      const auto& rows = plan.roots[g][h];
      if (rows.empty()) continue;
      const S w = height_weight * (pool == Pool::mean ? S(1) / static_cast<S>(rows.size()) : S(1));
      for (NodeId r : rows) d_x.row(r) += w * d_out.row(g);
    }
  }
}

// Combines per-height pooled vectors of a single graph: the average of all
// of them (combine-heights) or the last one (fixed-single-height).
template <typename S>
RowVec<S> combine_pooled(const std::vector<RowVec<S>>& pooled_per_height, ReadoutMode mode) {
  if (pooled_per_height.empty()) throw ArgumentError("no pooled heights to combine");
  if (mode == ReadoutMode::fixed_single_height) return pooled_per_height.back();
  RowVec<S> acc = RowVec<S>::Zero(pooled_per_height.front().size());
  for (const auto& v : pooled_per_height) acc += v;
  return acc / static_cast<S>(pooled_per_height.size());
}

// Mean softmax cross-entropy of the selected rows; writes d loss / d logits.
template <typename S>
S cross_entropy(const Mat<S>& logits, std::span<const std::size_t> rows, std::span<const std::int64_t> targets,
                Mat<S>* d_logits) {
  if (rows.size() != targets.size()) throw DimensionError("one target per selected row is required");
  if (d_logits) *d_logits = Mat<S>::Zero(logits.rows(), logits.cols());
  S loss = 0;
  const S inv = rows.empty() ? S(0) : S(1) / static_cast<S>(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows[k]);
    const auto t = static_cast<Eigen::Index>(targets[k]);
    if (t < 0 || t >= logits.cols()) throw DimensionError("class target outside [0, num_classes)");
    const S mx = logits.row(r).maxCoeff();
    RowVec<S> e = (logits.row(r).array() - mx).exp().matrix();
    const S z = e.sum();
    loss += (std::log(z) + mx - logits(r, t)) * inv;
    if (d_logits) {
      d_logits->row(r) = e / z * inv;
      (*d_logits)(r, t) -= inv;
    }
  }
  return loss;
}

}  // namespace ntgnn
