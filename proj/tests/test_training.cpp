#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "hiformer/adam.hpp"
#include "hiformer/checkpoint.hpp"
#include "hiformer/error.hpp"
#include "hiformer/synth.hpp"
#include "hiformer/trainer.hpp"
#include "hiformer/windows.hpp"
#include "support.hpp"

using namespace hiformer;
using ad::Tensor;
using testing_support::random_tensor;
using testing_support::TempDir;
using train::MetricsAccumulator;

namespace {

struct Task {
  model::ModelConfig cfg;
  data::WindowedDataset ds;
  vmd::VmdConfig vmd;
  Tensor node;
  train::ExperimentData data;
};

// Small weather-coupled farm shared by the training tests.
const Task& task() {
  static const Task t = [] {
    Task k;
    data::SynthRecipe r;
    r.turbines = 4;
    r.rows = 1200;
    r.seed = 11;
    data::WindowConfig w;
    w.P = 24;
    w.Q = 6;
    w.stride = 2;
    k.ds = data::make_windows(data::synth_generate(r), w);
    k.cfg = testing_support::micro_model_config();
    k.cfg.N = 4;
    k.cfg.C = 2;
    k.vmd.num_modes = static_cast<int>(k.cfg.M);
    std::mt19937_64 rng(5);
    k.node = random_tensor({k.cfg.N, k.cfg.node_dims}, rng, -1, 1, false);
    k.data = train::ExperimentData::prepare(k.ds, k.vmd, k.node);
    return k;
  }();
  return t;
}

train::TrainConfig quick(std::size_t epochs) {
  train::TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 32;
  c.seed = 4;
  return c;
}

train::PreparedSplit series_split(const std::function<double(std::size_t)>& f, std::size_t windows, std::size_t P,
                                  std::size_t Q) {
  train::PreparedSplit s;
  for (std::size_t w = 0; w < windows; ++w) {
    std::vector<double> hist(P), fut(Q);
    for (std::size_t t = 0; t < P; ++t) hist[t] = f(w + t);
    for (std::size_t q = 0; q < Q; ++q) fut[q] = f(w + P + q);
    model::ModelInputs in;
    in.power = Tensor({P, 1}, hist);
    s.inputs.push_back(in);
    s.targets.emplace_back(ad::Shape{Q, 1}, fut);
    s.starts.push_back(w);
  }
  return s;
}

}  // namespace

// ----------------------------------------------------------------------- adam

TEST(Adam, FirstStepMatchesHandTrace) {
  train::AdamConfig cfg;
  train::AdamState st;
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, -4.0, 1e-9};
  const auto p0 = p;
  train::adam_step(p, g, st, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    const double m = (1 - cfg.beta1) * g[i], v = (1 - cfg.beta2) * g[i] * g[i];
    const double mh = m / (1 - cfg.beta1), vh = v / (1 - cfg.beta2);
    EXPECT_NEAR(p[i], p0[i] - cfg.lr * mh / (std::sqrt(vh) + cfg.eps), 1e-15);
  }
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ConstantGradientApproachesSignStep) {
  train::AdamConfig cfg;
  train::AdamState st;
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{2.5, -0.01};
  std::vector<double> before;
  for (int i = 0; i < 5000; ++i) {
    before = p;
    train::adam_step(p, g, st, cfg);
  }
  EXPECT_NEAR(p[0] - before[0], -cfg.lr, 1e-9);
  EXPECT_NEAR(p[1] - before[1], cfg.lr, 1e-8);
}

TEST(Adam, ZeroGradientAndZeroRateAreFixedPoints) {
  train::AdamConfig cfg;
  train::AdamState st;
  std::vector<double> p{1.0, 2.0};
  for (int i = 0; i < 10; ++i) train::adam_step(p, std::vector<double>{0.0, 0.0}, st, cfg);
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  cfg.lr = 0.0;
  train::AdamState st2;
  for (int i = 0; i < 10; ++i) train::adam_step(p, std::vector<double>{0.7, -3.0}, st2, cfg);
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
}

TEST(Adam, SizeMismatchIsContractError) {
  train::AdamState st;
  std::vector<double> p(3);
  EXPECT_THROW(train::adam_step(p, std::vector<double>(2), st, {}), ContractError);
  train::adam_step(p, std::vector<double>(3), st, {});
  std::vector<double> q(4);
  EXPECT_THROW(train::adam_step(q, std::vector<double>(4), st, {}), ContractError);
  std::vector<Tensor> leaves{Tensor({2, 2}), Tensor({3})};
  train::Adam opt(leaves, {});
  EXPECT_EQ(opt.size(), 7u);
  EXPECT_THROW(opt.step(std::vector<double>(6)), ContractError);
}

// -------------------------------------------------------------- normalization

TEST(Zscore, MeanMapsToZeroAndRandomDataRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  train::NormStats st{{"power", "ws"}, {123.4, -7.0}, {56.7, 0.003}};
  EXPECT_EQ(st.apply(0, 123.4), 0.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = u(rng);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    const auto back = train::inverse_zscore(train::zscore(x, st, ch), st, ch);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12 * std::max(1.0, std::abs(x[i])));
  }
  st.stddev[1] = 0.0;
  EXPECT_THROW(st.validate(), DataError);
}

// -------------------------------------------------------------------- metrics

TEST(Metrics, PerfectAndOffsetPredictions) {
  MetricsAccumulator perfect(3, 2), offset(3, 2);
  std::mt19937_64 rng(2);
  for (int w = 0; w < 5; ++w) {
    const auto y = random_tensor({3, 2}, rng, -1, 1, false);
    std::vector<double> shifted(y.data().begin(), y.data().end());
    for (auto& v : shifted) v += 1.0;
    perfect.add(y.data(), y.data());
    offset.add(shifted, y.data());
  }
  EXPECT_EQ(perfect.report().mae, 0.0);
  EXPECT_EQ(perfect.report().mse, 0.0);
  EXPECT_NEAR(offset.report().mae, 1.0, 1e-15);
  EXPECT_NEAR(offset.report().mse, 1.0, 1e-15);
  EXPECT_THROW(MetricsAccumulator(3, 2).report(), DataError);
}

TEST(Metrics, MatchesLoopOracle) {
  std::mt19937_64 rng(3);
  const std::size_t Q = 5, N = 3, W = 7, H = 4;
  MetricsAccumulator acc(H, N);
  std::vector<Tensor> pred, targ;
  for (std::size_t w = 0; w < W; ++w) {
    pred.push_back(random_tensor({Q, N}, rng, -2, 2, false));
    targ.push_back(random_tensor({Q, N}, rng, -2, 2, false));
    acc.add(pred.back().data(), targ.back().data());
  }
  const auto rep = acc.report();
  double mae = 0, mse = 0;
  std::vector<double> mae_h(H, 0), mse_n(N, 0);
  for (std::size_t w = 0; w < W; ++w)
    for (std::size_t q = 0; q < H; ++q)
      for (std::size_t n = 0; n < N; ++n) {
        const double e = pred[w].at({q, n}) - targ[w].at({q, n});
        mae += std::abs(e) / double(W * H * N);
        mse += e * e / double(W * H * N);
        mae_h[q] += std::abs(e) / double(W * N);
        mse_n[n] += e * e / double(W * H);
      }
  EXPECT_NEAR(rep.mae, mae, 1e-12);
  EXPECT_NEAR(rep.mse, mse, 1e-12);
  for (std::size_t q = 0; q < H; ++q) EXPECT_NEAR(rep.mae_per_horizon[q], mae_h[q], 1e-12);
  for (std::size_t n = 0; n < N; ++n) EXPECT_NEAR(rep.mse_per_turbine[n], mse_n[n], 1e-12);
  EXPECT_EQ(rep.windows, W);
  EXPECT_EQ(rep.horizon, H);
}

TEST(MetricsProperty, MaeBoundedByRootMse) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    MetricsAccumulator acc(4, 3);
    for (int w = 0; w < 3; ++w)
      acc.add(random_tensor({4, 3}, rng, -5, 5, false).data(), random_tensor({4, 3}, rng, -1, 1, false).data());
    const auto r = acc.report();
    EXPECT_GE(r.mae, 0.0);
    EXPECT_LE(r.mae, std::sqrt(r.mse) + 1e-15);
    for (std::size_t q = 0; q < 4; ++q) EXPECT_LE(r.mae_per_horizon[q], std::sqrt(r.mse_per_horizon[q]) + 1e-15);
  }
}

TEST(MetricsProperty, EvaluateIgnoresWindowOrder) {
  const auto& t = task();
  const auto params = model::HiformerParams::init(t.cfg, 3);
  auto shuffled = t.data.test;
  std::mt19937_64 rng(5);
  std::vector<std::size_t> idx(shuffled.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    shuffled.inputs[i] = t.data.test.inputs[idx[i]];
    shuffled.targets[i] = t.data.test.targets[idx[i]];
  }
  const auto a = train::evaluate(params, t.cfg, t.data.test);
  const auto b = train::evaluate(params, t.cfg, shuffled);
  EXPECT_NEAR(a.mse, b.mse, 1e-12);
  EXPECT_NEAR(a.mae, b.mae, 1e-12);
  EXPECT_THROW(train::evaluate(params, t.cfg, train::PreparedSplit{}), DataError);
  EXPECT_THROW(train::evaluate(params, t.cfg, t.data.test, t.cfg.Q + 1), ConfigError);
}

// ---------------------------------------------------------------- persistence

TEST(Persistence, ConstantSeriesHasNoError) {
  const auto r = train::persistence_baseline(series_split([](std::size_t) { return 3.25; }, 10, 8, 4));
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.mse, 0.0);
}

TEST(Persistence, RampClosedForm) {
  const double s = 0.7;
  for (std::size_t Q : {1u, 4u, 12u}) {
    const auto r = train::persistence_baseline(series_split([s](std::size_t t) { return s * double(t); }, 9, 6, Q));
    EXPECT_NEAR(r.mae, s * double(Q + 1) / 2, 1e-12);
    EXPECT_NEAR(r.mae_per_horizon.back(), s * double(Q), 1e-12);
  }
}

TEST(Persistence, SinusoidAtHalfPeriodIsNearWorstCase) {
  const double period = 24.0;
  const std::size_t Q = 12;
  auto f = [&](std::size_t t) { return std::sin(2 * std::numbers::pi * double(t) / period); };
  // 240 windows cover whole periods, so phase averages are exact.
  const auto r = train::persistence_baseline(series_split(f, 240, 10, Q));
  double want = 0;
  for (std::size_t q = 1; q <= Q; ++q) want += (1 - std::cos(2 * std::numbers::pi * double(q) / period)) / double(Q);
  EXPECT_NEAR(r.mse, want, 1e-12);
  EXPECT_NEAR(r.mse_per_horizon.back(), 2.0, 1e-12);  // anti-phase: the largest possible expected error
}

// ---------------------------------------------------------------------- train

TEST(Train, ZeroRateLeavesParametersAndValidationLoss) {
  const auto& t = task();
  auto cfg = quick(3);
  cfg.lr = 0.0;
  auto mcfg = t.cfg;
  mcfg.dropout = 0.0;
  const auto init = model::HiformerParams::init(mcfg, 8);
  const auto res = train::train(init, mcfg, t.data, cfg);
  const auto a = init.named_parameters(), b = res.params.named_parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(std::ranges::equal(a[i].second.data(), b[i].second.data()));
  ASSERT_EQ(res.history.size(), 3u);
  for (const auto& e : res.history) {
    EXPECT_EQ(e.val_loss, res.history.front().val_loss);
    EXPECT_NEAR(e.train_loss, res.history.front().train_loss, 1e-12);
  }
}

TEST(Train, EarlyStoppingAfterPatience) {
  const auto& t = task();
  auto cfg = quick(10);
  cfg.lr = 0.0;
  cfg.early_stop_patience = 2;
  const auto res = train::train(model::HiformerParams::init(t.cfg, 8), t.cfg, t.data, cfg);
  EXPECT_TRUE(res.stopped_early);
  EXPECT_EQ(res.history.size(), 3u);
  EXPECT_EQ(res.best_epoch, 1u);
}

TEST(Train, LearnsAndKeepsBestValidationModel) {
  const auto& t = task();
  std::vector<double> seen;
  const auto res = train::train(model::HiformerParams::init(t.cfg, 9), t.cfg, t.data, quick(50),
                                [&](const train::EpochRecord& e) { seen.push_back(e.val_loss); });
  ASSERT_EQ(res.history.size(), 50u);
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_LT(res.history.back().val_loss, 0.5 * res.history.front().val_loss);
  const auto best = std::min_element(seen.begin(), seen.end());
  EXPECT_EQ(res.best_epoch, std::size_t(best - seen.begin()) + 1);
  EXPECT_EQ(res.best_val_loss, *best);
  EXPECT_EQ(train::evaluate(res.params, t.cfg, t.data.val).mse, res.best_val_loss);
}

TEST(Train, SameSeedSameHistoryForAnyThreadCount) {
  const auto& t = task();
  const auto init = model::HiformerParams::init(t.cfg, 10);
  auto cfg = quick(3);
  const auto a = train::train(init, t.cfg, t.data, cfg);
  const auto b = train::train(init, t.cfg, t.data, cfg);
  cfg.threads = 3;
  const auto c = train::train(init, t.cfg, t.data, cfg);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
    EXPECT_EQ(a.history[e].val_loss, b.history[e].val_loss);
    EXPECT_EQ(a.history[e].train_loss, c.history[e].train_loss);
    EXPECT_EQ(a.history[e].val_loss, c.history[e].val_loss);
  }
  cfg.seed += 1;
  cfg.threads = 1;
  const auto d = train::train(init, t.cfg, t.data, cfg);
  EXPECT_NE(a.history[0].train_loss, d.history[0].train_loss);
}

TEST(TrainProperty, FixedBatchLossDecreasesOverFirstSteps) {
  const auto& t = task();
  auto params = model::HiformerParams::init(t.cfg, 12);
  std::vector<Tensor> leaves;
  for (const auto& [name, p] : params.named_parameters()) leaves.push_back(p);
  train::Adam opt(leaves, {});
  const std::size_t B = 16;
  double previous = INFINITY;
  for (int step = 0; step < 5; ++step) {
    params.zero_grad();
    double loss = 0;
    for (std::size_t i = 0; i < B; ++i) {
      model::ForwardContext ctx;
      const auto l = ad::affine(ad::mse_loss(model::forward(t.data.train.inputs[i], params, t.cfg, ctx),
                                             t.data.train.targets[i]),
                                1.0 / B);
      l.backward();
      loss += l.item();
    }
    EXPECT_LT(loss, previous) << "step " << step;
    previous = loss;
    std::vector<double> flat;
    for (const auto& p : leaves) {
      const auto g = p.grad();
      flat.insert(flat.end(), g.begin(), g.end());
    }
    opt.step(flat);
  }
}

TEST(Train, NonFiniteLossIsDiagnosed) {
  const auto& t = task();
  auto broken = t.data;
  auto v = broken.train.targets[0].data();
  std::vector<double> bad(v.begin(), v.end());
  bad[0] = std::nan("");
  for (auto& target : broken.train.targets) target = Tensor(target.shape(), bad);
  try {
    train::train(model::HiformerParams::init(t.cfg, 13), t.cfg, broken, quick(1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
  }
}

TEST(Train, ConfigValidation) {
  train::TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lr = -1e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.early_stop_patience = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, HistoryCsvLayout) {
  TempDir dir("hist");
  train::write_history_csv(dir / "h.csv", {{1, 0.5, 0.25, 1e-3}, {2, 0.4, std::nan(""), 1e-3}});
  std::ifstream f(dir / "h.csv");
  std::string header, first, second;
  std::getline(f, header);
  std::getline(f, first);
  std::getline(f, second);
  EXPECT_EQ(header, "epoch,train_loss,val_loss,lr");
  EXPECT_EQ(first.substr(0, 10), "1,0.5,0.25");
  EXPECT_NE(second.find("nan"), std::string::npos);
}

// ----------------------------------------------------------------- checkpoint

TEST(Checkpoint, RoundTripReproducesMetricsBitExactly) {
  const auto& t = task();
  TempDir dir("ckpt");
  Checkpoint ck{t.cfg, model::HiformerParams::init(t.cfg, 14), t.ds.stats(), t.vmd, {}, t.node, {{"note", "x"}}};
  save_checkpoint(dir / "c.bin", ck);
  const auto back = load_checkpoint(dir / "c.bin");
  EXPECT_EQ(config_fingerprint(back.config), config_fingerprint(t.cfg));
  EXPECT_EQ(back.stats.mean, t.ds.stats().mean);
  EXPECT_EQ(back.metadata["note"], "x");
  EXPECT_TRUE(std::ranges::equal(back.node_embedding.data(), t.node.data()));
  const auto a = train::evaluate(ck.params, t.cfg, t.data.test);
  const auto b = train::evaluate(back.params, back.config, t.data.test);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.mae, b.mae);
  EXPECT_EQ(a.mse_per_horizon, b.mse_per_horizon);

  std::ifstream in(dir / "c.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::ofstream(dir / "cut.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_THROW(load_checkpoint(dir / "cut.bin"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), DataError);
}

TEST(Checkpoint, FingerprintTracksConfiguration) {
  auto c = testing_support::micro_model_config();
  const auto f = config_fingerprint(c);
  EXPECT_EQ(f.size(), 16u);
  EXPECT_EQ(config_fingerprint(c), f);
  c.L = 2;
  EXPECT_NE(config_fingerprint(c), f);
}
