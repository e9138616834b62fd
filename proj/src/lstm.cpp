#include "cfbench/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "cfbench/error.hpp"
#include "cfbench/simd.hpp"

namespace cfb::lstm {

void Config::validate() const {
  if (layers < 1) throw Error(Errc::InvalidConfig, "lstm.layers must be >= 1");
  if (hidden < 1) throw Error(Errc::InvalidConfig, "lstm.hidden must be >= 1");
  if (window < 1) throw Error(Errc::InvalidConfig, "lstm.window must be >= 1");
  if (input_dim < 1) throw Error(Errc::InvalidConfig, "lstm.input_dim must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "lstm.batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw Error(Errc::InvalidConfig, "lstm.learning_rate must be >= 0");
  if (!(clip_norm > 0.0)) throw Error(Errc::InvalidConfig, "lstm.clip_norm must be positive");
}

Params Params::zeros(const Config& config) {
  config.validate();
  Params p;
  const std::size_t H = config.hidden;
  for (std::size_t l = 0; l < config.layers; ++l) {
    LayerParams layer;
    layer.input = l == 0 ? config.input_dim : H;
    layer.hidden = H;
    layer.W_x.assign(4 * H * layer.input, 0.0);
    layer.W_h.assign(4 * H * H, 0.0);
    layer.b_x.assign(4 * H, 0.0);
    layer.b_h.assign(4 * H, 0.0);
    p.layers.push_back(std::move(layer));
  }
  p.head_w.assign(H, 0.0);
  return p;
}

Params Params::random(const Config& config, std::uint64_t seed) {
  Params p = zeros(config);
  const double k = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-k, k);
  for (auto t : p.tensors()) {
    for (double& v : t) v = dist(rng);
  }
  return p;
}

std::vector<std::span<double>> Params::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.W_x);
    out.emplace_back(l.W_h);
    out.emplace_back(l.b_x);
    out.emplace_back(l.b_h);
  }
  out.emplace_back(head_w);
  out.emplace_back(&head_b, 1);
  return out;
}

std::vector<std::span<const double>> Params::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.emplace_back(l.W_x);
    out.emplace_back(l.W_h);
    out.emplace_back(l.b_x);
    out.emplace_back(l.b_h);
  }
  out.emplace_back(head_w);
  out.emplace_back(&head_b, 1);
  return out;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t input_dim_of(const Params& p) {
  if (p.layers.empty()) throw Error(Errc::ShapeMismatch, "LSTM has no layers");
  return p.layers.front().input;
}

using SequenceCache = std::vector<std::vector<CellCache>>;  // [layer][t]

double forward_cached(std::span<const double> window, const Params& params, SequenceCache* cache) {
  const std::size_t in = input_dim_of(params);
  if (window.empty() || window.size() % in != 0) {
    throw Error(Errc::ShapeMismatch, "window of " + std::to_string(window.size()) +
                                         " values is not a multiple of input_dim " + std::to_string(in));
  }
  const std::size_t T = window.size() / in;
  std::vector<std::vector<double>> inputs(T);
  for (std::size_t t = 0; t < T; ++t) inputs[t].assign(window.begin() + t * in, window.begin() + (t + 1) * in);

  if (cache) cache->assign(params.layers.size(), {});
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    std::vector<double> h(layer.hidden, 0.0), c(layer.hidden, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      CellCache cell = cell_forward(inputs[t], h, c, layer);
      h = cell.h;
      c = cell.c;
      inputs[t] = cell.h;  // becomes the next layer's input
      if (cache) (*cache)[l].push_back(std::move(cell));
    }
  }
  const auto& top = inputs[T - 1];
  if (top.size() != params.head_w.size()) throw Error(Errc::ShapeMismatch, "dense head width mismatch");
  return simd::active().dot(params.head_w.data(), top.data(), top.size()) + params.head_b;
}

void add_scaled(Params& dst, const Params& src, double scale) {
  auto d = dst.tensors();
  const auto s = src.tensors();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d[i].size(); ++j) d[i][j] += scale * s[i][j];
  }
}

double squared_norm(const Params& p) {
  double acc = 0.0;
  for (auto t : p.tensors()) {
    for (double v : t) acc += v * v;
  }
  return acc;
}

// Accumulates the gradient of 0.5 * weight * (pred - target)^2 style terms:
// `dpred` is dLoss/dpred for this sample.
void backward_one(const SequenceCache& cache, const Params& params, double dpred, Params& grad) {
  const auto& kt = simd::active();
  const std::size_t L = params.layers.size();
  const std::size_t T = cache.front().size();
  const auto& top = cache[L - 1][T - 1].h;
  for (std::size_t j = 0; j < top.size(); ++j) grad.head_w[j] += dpred * top[j];
  grad.head_b += dpred;

  // dh arriving from above (the head for the top layer, the next layer otherwise).
  std::vector<std::vector<double>> dh_above(T);
  dh_above[T - 1].assign(params.head_w.size(), 0.0);
  for (std::size_t j = 0; j < params.head_w.size(); ++j) dh_above[T - 1][j] = dpred * params.head_w[j];

  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = params.layers[l];
    auto& g = grad.layers[l];
    const std::size_t H = layer.hidden;
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);
    std::vector<std::vector<double>> dx(T, std::vector<double>(layer.input, 0.0));
    for (std::size_t t = T; t-- > 0;) {
      const CellCache& cc = cache[l][t];
      for (std::size_t j = 0; j < H; ++j) {
        const double dh = dh_next[j] + (dh_above[t].empty() ? 0.0 : dh_above[t][j]);
        const double tc = std::tanh(cc.c[j]);
        const double dc = dc_next[j] + dh * cc.o[j] * (1.0 - tc * tc);
        const double d_o = dh * tc;
        const double d_i = dc * cc.g[j];
        const double d_g = dc * cc.i[j];
        const double d_f = dc * cc.c_prev[j];
        dc_next[j] = dc * cc.f[j];
        dz[j] = d_i * cc.i[j] * (1.0 - cc.i[j]);
        dz[H + j] = d_f * cc.f[j] * (1.0 - cc.f[j]);
        dz[2 * H + j] = d_g * (1.0 - cc.g[j] * cc.g[j]);
        dz[3 * H + j] = d_o * cc.o[j] * (1.0 - cc.o[j]);
      }
      kt.outer_acc(g.W_x.data(), 4 * H, layer.input, dz.data(), cc.x.data());
      kt.outer_acc(g.W_h.data(), 4 * H, H, dz.data(), cc.h_prev.data());
      for (std::size_t r = 0; r < 4 * H; ++r) {
        g.b_x[r] += dz[r];
        g.b_h[r] += dz[r];
      }
      kt.gemv_t_acc(layer.W_x.data(), 4 * H, layer.input, dz.data(), dx[t].data());
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      kt.gemv_t_acc(layer.W_h.data(), 4 * H, H, dz.data(), dh_next.data());
    }
    dh_above = std::move(dx);
  }
}

}  // namespace

CellCache cell_forward(std::span<const double> x, std::span<const double> h_prev,
                       std::span<const double> c_prev, const LayerParams& layer) {
  const std::size_t H = layer.hidden;
  if (x.size() != layer.input || h_prev.size() != H || c_prev.size() != H ||
      layer.W_x.size() != 4 * H * layer.input || layer.W_h.size() != 4 * H * H ||
      layer.b_x.size() != 4 * H || layer.b_h.size() != 4 * H) {
    throw Error(Errc::ShapeMismatch, "cell inputs do not match the layer shape");
  }
  const auto& kt = simd::active();
  std::vector<double> z(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) z[r] = layer.b_x[r] + layer.b_h[r];
  kt.gemv_acc(layer.W_x.data(), 4 * H, layer.input, x.data(), z.data());
  kt.gemv_acc(layer.W_h.data(), 4 * H, H, h_prev.data(), z.data());

  CellCache cc;
  cc.x.assign(x.begin(), x.end());
  cc.h_prev.assign(h_prev.begin(), h_prev.end());
  cc.c_prev.assign(c_prev.begin(), c_prev.end());
  cc.i.resize(H);
  cc.f.resize(H);
  cc.g.resize(H);
  cc.o.resize(H);
  cc.c.resize(H);
  cc.h.resize(H);
  for (std::size_t j = 0; j < H; ++j) {
    cc.i[j] = sigmoid(z[j]);
    cc.f[j] = sigmoid(z[H + j]);
    cc.g[j] = std::tanh(z[2 * H + j]);
    cc.o[j] = sigmoid(z[3 * H + j]);
    cc.c[j] = cc.f[j] * c_prev[j] + cc.i[j] * cc.g[j];
    cc.h[j] = cc.o[j] * std::tanh(cc.c[j]);
  }
  return cc;
}

double forward(std::span<const double> window, const Params& params) {
  return forward_cached(window, params, nullptr);
}

Gradients backward(std::span<const double> windows, std::span<const double> targets,
                   const Params& params) {
  const std::size_t n = targets.size();
  if (n == 0) throw Error(Errc::ShapeMismatch, "empty batch");
  if (windows.size() % n != 0) throw Error(Errc::ShapeMismatch, "windows do not split into the batch");
  const std::size_t per = windows.size() / n;

  Gradients out;
  out.grad = params;
  for (auto t : out.grad.tensors()) std::fill(t.begin(), t.end(), 0.0);
  SequenceCache cache;
  double loss = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double pred = forward_cached(windows.subspan(b * per, per), params, &cache);
    const double r = pred - targets[b];
    loss += r * r;
    backward_one(cache, params, 2.0 * r / static_cast<double>(n), out.grad);
  }
  out.loss = loss / static_cast<double>(n);
  return out;
}

TrainResult train(std::span<const double> windows, std::span<const double> targets,
                  const Config& config) {
  config.validate();
  const std::size_t n = targets.size();
  if (n == 0) throw Error(Errc::TooShort, "LSTM training needs at least one window");
  const std::size_t per = config.window * config.input_dim;
  if (windows.size() != n * per) {
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(n * per) + " window values, got " +
                                         std::to_string(windows.size()));
  }

  TrainResult res;
  res.params = Params::random(config, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_windows, batch_targets;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      batch_windows.clear();
      batch_targets.clear();
      for (std::size_t k = start; k < stop; ++k) {
        const auto w = windows.subspan(order[k] * per, per);
        batch_windows.insert(batch_windows.end(), w.begin(), w.end());
        batch_targets.push_back(targets[order[k]]);
      }
      Gradients g = backward(batch_windows, batch_targets, res.params);
      if (!std::isfinite(g.loss)) {
        throw Error(Errc::NonFiniteLoss, "loss became non-finite in epoch " + std::to_string(epoch));
      }
      epoch_loss += g.loss * static_cast<double>(stop - start);
      const double norm = std::sqrt(squared_norm(g.grad));
      const double scale = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
      if (config.learning_rate > 0.0) add_scaled(res.params, g.grad, -config.learning_rate * scale);
    }
    res.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double r = forward(windows.subspan(b * per, per), res.params) - targets[b];
    total += r * r;
  }
  res.final_loss = total / static_cast<double>(n);
  if (!std::isfinite(res.final_loss)) throw Error(Errc::NonFiniteLoss, "final training loss is non-finite");
  return res;
}

WindowSet make_windows(const Trajectory& segment, TargetKind target, std::size_t window) {
  if (window < 1) throw Error(Errc::InvalidConfig, "window must be >= 1");
  const std::size_t n = segment.size();
  if (n <= window) {
    throw Error(Errc::TooShort, "segment of " + std::to_string(n) + " samples cannot fill a window of " +
                                    std::to_string(window) + " plus a target");
  }
  const auto derived = derive_kinematics(segment);
  const auto vf = segment.v_follower();
  const auto vl = segment.v_leader();
  WindowSet set;
  set.window = window;
  set.input_dim = 3;
  for (std::size_t end = window - 1; end + 1 < n; ++end) {
    for (std::size_t k = end + 1 - window; k <= end; ++k) {
      set.features.push_back(vf[k]);
      set.features.push_back(vl[k]);
      set.features.push_back(derived.s[k]);
    }
    switch (target) {
      case TargetKind::A: set.targets.push_back(derived.a_follower[end]); break;
      case TargetKind::V: set.targets.push_back(vf[end + 1]); break;
      case TargetKind::S: set.targets.push_back(derived.s[end + 1]); break;
    }
  }
  return set;
}

Standardizer fit_scaler(const WindowSet& set) {
  const auto rows = static_cast<Eigen::Index>(set.features.size() / set.input_dim);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      set.features.data(), rows, static_cast<Eigen::Index>(set.input_dim));
  const Eigen::Map<const Eigen::VectorXd> y(set.targets.data(), static_cast<Eigen::Index>(set.targets.size()));
  Standardizer feat = Standardizer::fit(X, Eigen::VectorXd::Zero(rows));
  const Standardizer targ = Standardizer::fit(Eigen::MatrixXd::Zero(y.size(), 1), y);
  feat.target_mean = targ.target_mean;
  feat.target_std = targ.target_std;
  return feat;
}

WindowSet apply_scaler(const WindowSet& set, const Standardizer& scaler) {
  WindowSet out = set;
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i % set.input_dim);
    out.features[i] = (out.features[i] - scaler.feature_mean[c]) / scaler.feature_std[c];
  }
  for (double& t : out.targets) t = (t - scaler.target_mean) / scaler.target_std;
  return out;
}

Model fit(const Trajectory& train_segment, TargetKind target, const Config& config,
          std::vector<double>* loss_history) {
  config.validate();
  const WindowSet raw = make_windows(train_segment, target, config.window);
  Model m;
  m.config = config;
  m.config.input_dim = raw.input_dim;
  m.scaler = fit_scaler(raw);
  const WindowSet scaled = apply_scaler(raw, m.scaler);
  TrainResult tr = train(scaled.features, scaled.targets, m.config);
  m.params = std::move(tr.params);
  if (loss_history) *loss_history = std::move(tr.loss_history);
  return m;
}

double predict(const Model& model, std::span<const FeatureRow> rows) {
  if (rows.size() != model.config.window) {
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(model.config.window) +
                                         " rows, got " + std::to_string(rows.size()));
  }
  std::vector<double> window;
  window.reserve(rows.size() * 3);
  for (const auto& r : rows) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double raw = c == 0 ? r.v_follower : (c == 1 ? r.v_leader : r.s);
      window.push_back((raw - model.scaler.feature_mean[c]) / model.scaler.feature_std[c]);
    }
  }
  return model.scaler.inverse_target(forward(window, model.params));
}

namespace {

constexpr const char* kMagic = "CFBLSTM 1";

struct Entry {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

std::vector<Entry> manifest(const Model& m) {
  std::vector<Entry> out;
  for (std::size_t l = 0; l < m.params.layers.size(); ++l) {
    const auto& layer = m.params.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    out.push_back({p + "W_x", 4 * layer.hidden, layer.input});
    out.push_back({p + "W_h", 4 * layer.hidden, layer.hidden});
    out.push_back({p + "b_x", 4 * layer.hidden, 1});
    out.push_back({p + "b_h", 4 * layer.hidden, 1});
  }
  out.push_back({"head.w", 1, m.params.head_w.size()});
  out.push_back({"head.b", 1, 1});
  out.push_back({"scaler.feature_mean", 1, static_cast<std::size_t>(m.scaler.feature_mean.size())});
  out.push_back({"scaler.feature_std", 1, static_cast<std::size_t>(m.scaler.feature_std.size())});
  out.push_back({"scaler.target", 1, 2});
  return out;
}

}  // namespace

void save(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  const auto& c = model.config;
  out << kMagic << '\n'
      << "layers " << c.layers << " hidden " << c.hidden << " window " << c.window << " input "
      << c.input_dim << '\n';
  const auto entries = manifest(model);
  for (const auto& e : entries) out << "tensor " << e.name << ' ' << e.rows << ' ' << e.cols << '\n';
  out << "end\n";
  auto write = [&](std::span<const double> v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  };
  for (auto t : model.params.tensors()) write(t);
  write(std::span<const double>(model.scaler.feature_mean.data(), static_cast<std::size_t>(model.scaler.feature_mean.size())));
  write(std::span<const double>(model.scaler.feature_std.data(), static_cast<std::size_t>(model.scaler.feature_std.size())));
  const double target[2] = {model.scaler.target_mean, model.scaler.target_std};
  write(target);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Model load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw Error(Errc::Parse, path.string() + " is not an LSTM dump");
  Model m;
  {
    std::getline(in, line);
    std::istringstream hdr(line);
    std::string k1, k2, k3, k4;
    hdr >> k1 >> m.config.layers >> k2 >> m.config.hidden >> k3 >> m.config.window >> k4 >> m.config.input_dim;
    if (!hdr || k1 != "layers" || k2 != "hidden" || k3 != "window" || k4 != "input") {
      throw Error(Errc::Parse, "bad LSTM header in " + path.string());
    }
  }
  m.params = Params::zeros(m.config);
  m.scaler = Standardizer::identity(static_cast<Eigen::Index>(m.config.input_dim));
  const auto expected = manifest(m);
  std::size_t idx = 0;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string tag;
    Entry e;
    ls >> tag >> e.name >> e.rows >> e.cols;
    if (idx >= expected.size() || tag != "tensor" || e.name != expected[idx].name ||
        e.rows != expected[idx].rows || e.cols != expected[idx].cols) {
      throw Error(Errc::Parse, "unexpected manifest line '" + line + "'");
    }
    ++idx;
  }
  if (idx != expected.size()) throw Error(Errc::Parse, "truncated LSTM manifest");
  auto read = [&](std::span<double> v) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    if (!in) throw Error(Errc::Parse, "truncated LSTM payload in " + path.string());
  };
  for (auto t : m.params.tensors()) read(t);
  read(std::span<double>(m.scaler.feature_mean.data(), static_cast<std::size_t>(m.scaler.feature_mean.size())));
  read(std::span<double>(m.scaler.feature_std.data(), static_cast<std::size_t>(m.scaler.feature_std.size())));
  double target[2];
  read(target);
  m.scaler.target_mean = target[0];
  m.scaler.target_std = target[1];
  return m;
}

}  // namespace cfb::lstm
