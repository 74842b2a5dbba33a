#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ntgnn/generators.hpp"
#include "ntgnn/pipeline.hpp"
#include "ntgnn/train.hpp"

using namespace ntgnn;

namespace {

// Hexagon (class 0) versus two triangles (class 1).
TrainingData hexagon_task(Redundancy k, std::uint32_t height, std::size_t copies = 1) {
  GraphCollection c;
  std::vector<std::int64_t> targets;
  for (std::size_t i = 0; i < copies; ++i) {
    c.graphs.push_back(generate_counterexample(Counterexample::hexagon));
    targets.push_back(0);
    c.graphs.push_back(generate_counterexample(Counterexample::two_triangles));
    targets.push_back(1);
  }
  reindex_labels(c);
  PreprocessOptions opt;
  opt.k = k;
  opt.height = height;
  auto pre = preprocess(c, opt);
  return {pre.matrices, pre.plan, targets};
}

MlpStack<double> small_model(std::size_t layers, std::uint64_t seed) {
  return MlpStack<double>::init({1, 16, 16, layers, 2}, ReadoutMode::combine_heights, Pool::mean, seed);
}

}  // namespace

TEST(Trainer, ZeroLearningRateLeavesParameters) {
  auto data = hexagon_task(1, 3);
  auto p = small_model(3, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0;
  Trainer<double> t(p, cfg);
  std::vector<std::size_t> all{0, 1};
  auto eval = t.backward_and_step(data, all);
  EXPECT_GT(eval.loss, 0.0);
  EXPECT_EQ(t.params().flatten(), p.flatten());
}

TEST(Trainer, SgdStepFollowsGradient) {
  auto data = hexagon_task(1, 3);
  auto p = small_model(3, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.optimizer = Optimizer::sgd;
  Trainer<double> t(p, cfg);
  std::vector<std::size_t> all{0, 1};
  auto grad = MlpStack<double>::zeros_like(p);
  loss_and_gradient<double>(data, p, all, &grad);
  t.backward_and_step(data, all);
  auto before = p.flatten(), after = t.params().flatten(), g = grad.flatten();
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(after[i], before[i] - 0.1 * g[i], 1e-15);
}

TEST(Trainer, ClippingBoundsTheStep) {
  auto data = hexagon_task(1, 3);
  auto p = small_model(3, 3);
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.optimizer = Optimizer::sgd;
  cfg.clip_norm = 1e-3;
  Trainer<double> t(p, cfg);
  std::vector<std::size_t> all{0, 1};
  t.backward_and_step(data, all);
  auto before = p.flatten(), after = t.params().flatten();
  double norm2 = 0;
  for (std::size_t i = 0; i < before.size(); ++i) norm2 += (after[i] - before[i]) * (after[i] - before[i]);
  EXPECT_LE(std::sqrt(norm2), 1e-3 * (1 + 1e-12));
}

TEST(Trainer, NonFiniteLossIsReportedWithoutStep) {
  auto data = hexagon_task(1, 3);
  auto p = small_model(3, 4);
  p.head.output.bias(0) = std::numeric_limits<double>::infinity();
  Trainer<double> t(p, {});
  std::vector<std::size_t> all{0, 1};
  EXPECT_THROW(t.backward_and_step(data, all), NumericError);
  auto a = t.params().flatten(), b = p.flatten();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(b[i])) {
      EXPECT_EQ(a[i], b[i]);
    }
  }
}

TEST(Trainer, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.learning_rate = -1;
  EXPECT_THROW(Trainer<double>(small_model(1, 0), cfg), ArgumentError);
  cfg.learning_rate = 0.1;
  cfg.momentum = 1.0;
  EXPECT_THROW(Trainer<double>(small_model(1, 0), cfg), ArgumentError);
}

TEST(Train, HexagonVersusTrianglesWithOneNt) {
  auto data = hexagon_task(1, 3);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  Trainer<double> t(small_model(3, 0), cfg);
  auto history = train(t, data);
  EXPECT_EQ(history.back().accuracy, 1.0);
}

TEST(Train, DeterministicGivenSeed) {
  auto data = hexagon_task(0, 2, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 2;
  cfg.seed = 9;
  Trainer<double> a(small_model(2, 1), cfg), b(small_model(2, 1), cfg);
  auto ha = train(a, data), hb = train(b, data);
  EXPECT_EQ(a.params().flatten(), b.params().flatten());
  std::ostringstream sa, sb;
  write_metrics_csv(ha, sa);
  write_metrics_csv(hb, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, 27), "epoch,split,loss,accuracy\n1");
}

TEST(Train, EarlyStop) {
  auto data = hexagon_task(1, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  Trainer<double> t(small_model(3, 0), cfg);
  auto history = train<double>(t, data, [](const EpochMetrics& m) { return m.epoch == 3; });
  EXPECT_EQ(history.size(), 3u);
}

TEST(Checkpoint, RoundTrip) {
  auto p = small_model(2, 7);
  p.eps[1] = 0.125;
  p.eps[2] = -1.0 / 3.0;
  auto j = checkpoint_to_json(p);
  EXPECT_EQ(j["version"], kCheckpointVersion);
  auto back = checkpoint_from_json<double>(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.flatten(), p.flatten());
  EXPECT_EQ(back.shape, p.shape);
  EXPECT_EQ(back.readout, p.readout);
  EXPECT_EQ(back.pool, p.pool);
}

TEST(Checkpoint, Malformed) {
  EXPECT_THROW(checkpoint_from_json<double>(nlohmann::json::object()), DataError);
  auto j = checkpoint_to_json(small_model(1, 0));
  j["version"] = 99;
  EXPECT_THROW(checkpoint_from_json<double>(j), DataError);
  j = checkpoint_to_json(small_model(1, 0));
  j["mlps"][0]["hidden"]["bias"] = nlohmann::json::array({1.0});
  EXPECT_THROW(checkpoint_from_json<double>(j), DataError);
}

TEST(SinglePrecision, ForwardAndStepRun) {
  auto data = hexagon_task(1, 3);
  auto p = MlpStack<float>::init({1, 8, 8, 3, 2}, ReadoutMode::combine_heights, Pool::mean, 0);
  Trainer<float> t(p, {});
  std::vector<std::size_t> all{0, 1};
  EXPECT_TRUE(std::isfinite(t.backward_and_step(data, all).loss));
}
