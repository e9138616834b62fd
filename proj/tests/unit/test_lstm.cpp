#include <cmath>
#include <random>
#include <thread>

#include "cfbench/lstm.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cfb;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Scalar-by-scalar gate equations, written without the library's layout
// helpers beyond the documented i, f, g, o row stacking.
void oracle_cell(const std::vector<double>& x, const std::vector<double>& h_prev,
                 const std::vector<double>& c_prev, const lstm::LayerParams& L,
                 std::vector<double>& h, std::vector<double>& c) {
  const std::size_t H = L.hidden, I = L.input;
  h.assign(H, 0.0);
  c.assign(H, 0.0);
  auto pre = [&](std::size_t gate, std::size_t j) {
    const std::size_t r = gate * H + j;
    double z = L.b_x[r] + L.b_h[r];
    for (std::size_t k = 0; k < I; ++k) z += L.W_x[r * I + k] * x[k];
    for (std::size_t k = 0; k < H; ++k) z += L.W_h[r * H + k] * h_prev[k];
    return z;
  };
  for (std::size_t j = 0; j < H; ++j) {
    const double i = sigmoid(pre(0, j)), f = sigmoid(pre(1, j));
    const double g = std::tanh(pre(2, j)), o = sigmoid(pre(3, j));
    c[j] = f * c_prev[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

double oracle_forward(const std::vector<double>& window, const lstm::Params& p, std::size_t in_dim) {
  const std::size_t T = window.size() / in_dim;
  std::vector<std::vector<double>> h(p.layers.size()), c(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    h[l].assign(p.layers[l].hidden, 0.0);
    c[l].assign(p.layers[l].hidden, 0.0);
  }
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> x(window.begin() + t * in_dim, window.begin() + (t + 1) * in_dim);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      std::vector<double> hn, cn;
      oracle_cell(x, h[l], c[l], p.layers[l], hn, cn);
      h[l] = hn;
      c[l] = cn;
      x = hn;
    }
  }
  double y = p.head_b;
  for (std::size_t j = 0; j < p.head_w.size(); ++j) y += p.head_w[j] * h.back()[j];
  return y;
}

std::vector<double> rand_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

lstm::Config tiny() {
  lstm::Config c;
  c.layers = 1;
  c.hidden = 3;
  c.window = 2;
  return c;
}

double batch_loss(const std::vector<double>& windows, const std::vector<double>& targets,
                  const lstm::Params& p, std::size_t block) {
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = lstm::forward(std::span<const double>(windows).subspan(i * block, block), p) - targets[i];
    sum += r * r;
  }
  return sum / static_cast<double>(targets.size());
}

Trajectory sample_traj(std::size_t n) {
  std::vector<double> xl, vl, xf, vf;
  for (std::size_t k = 0; k < n; ++k) {
    vl.push_back(10.0 + std::sin(0.3 * k));
    vf.push_back(9.0 + 0.5 * std::cos(0.2 * k));
    xl.push_back(40.0 + 1.0 * k);
    xf.push_back(0.9 * k);
  }
  return Trajectory(0.1, 0.0, xl, vl, xf, vf, 5.0);
}

}  // namespace

TEST_CASE("zero parameters give neutral gates") {
  lstm::Config cfg = tiny();
  const auto p = lstm::Params::zeros(cfg);
  const std::vector<double> x{0.3, -1.0, 2.0}, h0(3, 0.0), c0(3, 0.0), cp{1.0, -2.0, 0.5};
  const auto z = lstm::cell_forward(x, h0, c0, p.layers[0]);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(z.i[j] == 0.5);
    CHECK(z.f[j] == 0.5);
    CHECK(z.o[j] == 0.5);
    CHECK(z.g[j] == 0.0);
    CHECK(z.c[j] == 0.0);
    CHECK(z.h[j] == 0.0);
  }
  const auto w = lstm::cell_forward(x, h0, cp, p.layers[0]);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(w.c[j] == 0.5 * cp[j]);
    CHECK(w.h[j] == doctest::Approx(0.5 * std::tanh(0.5 * cp[j])).epsilon(1e-15));
  }
  const std::vector<double> window(6, 1.0);
  CHECK(lstm::forward(window, p) == 0.0);
  CHECK(oracle::code_of([&] { lstm::cell_forward(std::vector<double>(2), h0, c0, p.layers[0]); }) ==
        Errc::ShapeMismatch);
}

TEST_CASE("cell and forward agree with an independent re-evaluation") {
  std::mt19937_64 rng(31);
  lstm::Config cfg;
  cfg.layers = 3;
  cfg.hidden = 5;
  cfg.window = 4;
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = lstm::Params::random(cfg, 100 + rep);
    const auto x = rand_vec(rng, 3), h = rand_vec(rng, 5, 0.5), c = rand_vec(rng, 5, 0.5);
    std::vector<double> ho, co;
    oracle_cell(x, h, c, p.layers[0], ho, co);
    const auto got = lstm::cell_forward(x, h, c, p.layers[0]);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(std::abs(got.h[j] - ho[j]) <= 1e-12);
      CHECK(std::abs(got.c[j] - co[j]) <= 1e-12);
    }
    const auto window = rand_vec(rng, 12);
    CHECK(std::abs(lstm::forward(window, p) - oracle_forward(window, p, 3)) <= 1e-12);
  }
}

TEST_CASE("forward is deterministic and sensitive to the last step") {
  lstm::Config cfg;
  cfg.hidden = 8;
  cfg.window = 3;
  const auto p = lstm::Params::random(cfg, 7);
  std::vector<double> flat(9, 0.4), bumped = flat;
  bumped[8] = -1.5;
  const double a = lstm::forward(flat, p);
  CHECK(a != lstm::forward(bumped, p));
  double from_thread = 0.0;
  std::thread([&] { from_thread = lstm::forward(flat, p); }).join();
  CHECK(from_thread == a);
  CHECK(lstm::forward(flat, lstm::Params::random(cfg, 7)) == a);
}

TEST_CASE("backward matches finite differences on every parameter") {
  std::mt19937_64 rng(32);
  for (std::size_t layers : {std::size_t{1}, std::size_t{2}}) {
    lstm::Config cfg = tiny();
    cfg.layers = layers;
    const std::size_t block = cfg.window * 3;
    auto p = lstm::Params::random(cfg, 9);
    const auto windows = rand_vec(rng, 4 * block);
    const auto targets = rand_vec(rng, 4);
    const auto g = lstm::backward(windows, targets, p);
    CHECK(g.loss == doctest::Approx(batch_loss(windows, targets, p, block)).epsilon(1e-12));

    const double h = 1e-5;
    auto params = p.tensors();
    const auto grads = g.grad.tensors();
    REQUIRE(params.size() == grads.size());
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t].size(); ++i) {
        const double keep = params[t][i];
        params[t][i] = keep + h;
        const double up = batch_loss(windows, targets, p, block);
        params[t][i] = keep - h;
        const double down = batch_loss(windows, targets, p, block);
        params[t][i] = keep;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, oracle::rel_err(grads[t][i], fd, 1e-6));
        ++checked;
      }
    }
    CHECK(checked > 50);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("backward: zero at the optimum and linear in the residual") {
  std::mt19937_64 rng(33);
  lstm::Config cfg = tiny();
  const auto p = lstm::Params::random(cfg, 4);
  const std::size_t block = cfg.window * 3;
  const auto windows = rand_vec(rng, 5 * block);
  std::vector<double> preds(5), targets(5), doubled(5);
  const auto offsets = rand_vec(rng, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    preds[i] = lstm::forward(std::span<const double>(windows).subspan(i * block, block), p);
    targets[i] = preds[i] - offsets[i];
    doubled[i] = preds[i] - 2.0 * offsets[i];
  }
  const auto zero = lstm::backward(windows, preds, p);
  for (auto t : zero.grad.tensors())
    for (double v : t) CHECK(std::abs(v) <= 1e-12);

  const auto g1 = lstm::backward(windows, targets, p);
  const auto g2 = lstm::backward(windows, doubled, p);
  const auto a = g1.grad.tensors(), b = g2.grad.tensors();
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size(); ++i) CHECK(std::abs(b[t][i] - 2.0 * a[t][i]) <= 1e-12);
}

TEST_CASE("training: zero learning rate, determinism and memorization") {
  std::mt19937_64 rng(34);
  lstm::Config cfg = tiny();
  const auto windows = rand_vec(rng, 10 * 6);
  const auto targets = rand_vec(rng, 10);

  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  const auto frozen = lstm::train(windows, targets, cfg);
  CHECK(frozen.params == lstm::Params::random(cfg, cfg.seed));
  for (double l : frozen.loss_history) CHECK(l == doctest::Approx(frozen.loss_history[0]).epsilon(1e-12));

  cfg.learning_rate = 0.05;
  cfg.batch_size = 3;
  const auto r1 = lstm::train(windows, targets, cfg);
  const auto r2 = lstm::train(windows, targets, cfg);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(r1.params == r2.params);

  lstm::Config mem;
  mem.hidden = 8;
  mem.window = 5;
  mem.epochs = 2000;
  mem.learning_rate = 0.05;
  const auto one_window = rand_vec(rng, 15);
  const std::vector<double> one_target{0.7};
  const auto m = lstm::train(one_window, one_target, mem);
  CHECK(m.final_loss <= 1e-4);

  mem.learning_rate = 1e-4;
  mem.epochs = 10;
  const auto slow = lstm::train(one_window, one_target, mem);
  for (std::size_t e = 1; e < slow.loss_history.size(); ++e)
    CHECK(slow.loss_history[e] <= slow.loss_history[e - 1]);
}

TEST_CASE("non-finite training aborts") {
  lstm::Config cfg = tiny();
  std::vector<double> windows(6, 1.0);
  std::vector<double> targets{NAN};
  CHECK(oracle::code_of([&] { lstm::train(windows, targets, cfg); }) == Errc::NonFiniteLoss);
}

TEST_CASE("windows: count, targets and scaling") {
  const Trajectory t = sample_traj(7);
  const auto w = lstm::make_windows(t, TargetKind::V, 5);
  REQUIRE(w.size() == 2);
  CHECK(w.targets[0] == t.v_follower()[5]);
  CHECK(w.targets[1] == t.v_follower()[6]);
  CHECK(w.window_at(1)[0] == t.v_follower()[1]);
  CHECK(w.window_at(1)[14] == t.spacing(5));
  const auto ws = lstm::make_windows(t, TargetKind::S, 5);
  CHECK(ws.targets[0] == t.spacing(5));
  CHECK(oracle::code_of([&] { lstm::make_windows(t, TargetKind::A, 7); }) == Errc::TooShort);

  const auto big = lstm::make_windows(sample_traj(80), TargetKind::A, 5);
  const auto scaled = lstm::apply_scaler(big, lstm::fit_scaler(big));
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    const std::size_t rows = scaled.features.size() / 3;
    for (std::size_t r = 0; r < rows; ++r) sum += scaled.features[r * 3 + c];
    const double mean = sum / rows;
    for (std::size_t r = 0; r < rows; ++r) sq += std::pow(scaled.features[r * 3 + c] - mean, 2);
    CHECK(std::abs(mean) <= 1e-10);
    CHECK(std::abs(std::sqrt(sq / rows) - 1.0) <= 1e-10);
  }
}

TEST_CASE("fitted model saves and loads bit-exactly") {
  lstm::Config cfg;
  cfg.layers = 2;
  cfg.hidden = 4;
  cfg.window = 3;
  cfg.epochs = 3;
  const Trajectory t = sample_traj(60);
  const auto m = lstm::fit(t, TargetKind::V, cfg);
  const auto path = oracle::temp_dir("lstm") / "m.bin";
  lstm::save(m, path);
  const auto back = lstm::load(path);
  CHECK(back.params == m.params);
  CHECK(back.scaler == m.scaler);
  CHECK(back.config.window == 3);
  const std::vector<FeatureRow> rows{{9.0, 10.0, 30.0}, {9.1, 10.1, 30.2}, {9.2, 10.0, 30.1}};
  CHECK(lstm::predict(back, rows) == lstm::predict(m, rows));
  CHECK(oracle::code_of([&] { lstm::predict(m, std::span(rows).first(2)); }) == Errc::ShapeMismatch);
}
