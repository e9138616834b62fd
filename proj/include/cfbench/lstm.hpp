#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cfbench/rollout.hpp"
#include "cfbench/standardizer.hpp"
#include "cfbench/trajectory.hpp"

namespace cfb::lstm {

struct Config {
  std::size_t layers = 3;
  std::size_t hidden = 25;
  std::size_t window = 5;
  std::size_t input_dim = 3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double clip_norm = 5.0;  // global gradient-norm clip
  std::uint64_t seed = 0;

  void validate() const;
};

/// One LSTM layer. The four gates are stacked row-wise in the order
/// input (i), forget (f), cell candidate (g), output (o), so W_x is
/// 4H x in and W_h is 4H x H, both row-major. Both bias sets are kept.
struct LayerParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::vector<double> W_x;
  std::vector<double> W_h;
  std::vector<double> b_x;
  std::vector<double> b_h;

  bool operator==(const LayerParams&) const = default;
};

struct Params {
  std::vector<LayerParams> layers;
  std::vector<double> head_w;  // dense head over the top-layer hidden state
  double head_b = 0.0;

  static Params zeros(const Config& config);
  /// Uniform(-k, k) with k = 1/sqrt(hidden).
  static Params random(const Config& config, std::uint64_t seed);

  /// Views over every tensor in a fixed order: per layer W_x, W_h, b_x, b_h,
  /// then head_w and head_b.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  bool operator==(const Params&) const = default;
};

struct CellCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, g, o;
  std::vector<double> c, h;
};

/// Gates from the affine maps, c = f*c_prev + i*g, h = o*tanh(c).
/// Throws ShapeMismatch when the vectors do not fit the layer.
CellCache cell_forward(std::span<const double> x, std::span<const double> h_prev,
                       std::span<const double> c_prev, const LayerParams& layer);

/// Sequence-to-real prediction: `window` is a (T x input_dim) row-major block.
double forward(std::span<const double> window, const Params& params);

struct Gradients {
  Params grad;
  double loss = 0.0;  // batch-mean squared error
};

/// Exact BPTT gradient of the batch-mean squared error. `windows` holds
/// targets.size() consecutive (T x input_dim) blocks.
Gradients backward(std::span<const double> windows, std::span<const double> targets,
                   const Params& params);

struct TrainResult {
  Params params;
  std::vector<double> loss_history;  // mean loss over each epoch's batches, pre-update
  double final_loss = 0.0;           // full-data MSE after the last epoch
};

/// Minibatch SGD with a seeded per-epoch shuffle and global-norm clipping.
/// Throws NonFiniteLoss if training blows up.
TrainResult train(std::span<const double> windows, std::span<const double> targets,
                  const Config& config);

/// Sliding windows of (v_follower, v_leader, s). The target of the window
/// ending at step k is a_k (the acceleration that carries k to k+1),
/// v_{k+1} or s_{k+1}. N samples give N - window windows.
struct WindowSet {
  std::size_t window = 0;
  std::size_t input_dim = 3;
  std::vector<double> features;  // size() x window x input_dim, row-major
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> window_at(std::size_t i) const {
    return std::span<const double>(features).subspan(i * window * input_dim, window * input_dim);
  }
};

WindowSet make_windows(const Trajectory& segment, TargetKind target, std::size_t window);

/// Statistics over every feature row of every window, plus the targets.
Standardizer fit_scaler(const WindowSet& set);
WindowSet apply_scaler(const WindowSet& set, const Standardizer& scaler);

/// Trained network plus the scaling it was trained under.
struct Model {
  Config config;
  Params params;
  Standardizer scaler;
};

/// Windows the segment, fits the scaler on it, and trains.
Model fit(const Trajectory& train_segment, TargetKind target, const Config& config,
          std::vector<double>* loss_history = nullptr);

double predict(const Model& model, std::span<const FeatureRow> rows);

/// Binary dump: a text manifest (one line per tensor with its shape), then
/// the raw little-endian doubles in manifest order. Round trips bit-exactly.
void save(const Model& model, const std::filesystem::path& path);
Model load(const std::filesystem::path& path);

}  // namespace cfb::lstm
