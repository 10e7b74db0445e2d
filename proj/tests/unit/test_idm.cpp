#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ssorl/env/mdp.hpp"
#include "ssorl/env/policies.hpp"
#include "ssorl/data/split.hpp"
#include "ssorl/idm/idm.hpp"
#include "ssorl/idm/idm_io.hpp"
#include "ssorl/selftrain/selftrain.hpp"
#include "test_support.hpp"

using namespace ssorl;
using namespace ssorl::idm;
using nn::Tensor;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

IdmModel zeroed_model(std::size_t sd, std::size_t ad) {
  IdmConfig cfg;
  cfg.hidden = {8};
  IdmModel m(cfg, sd, ad, 1);
  for (auto& e : m.params().entries()) e.value.fill(0.0);
  m.set_normalizer(std::vector<double>(m.input_dim(), 0.0), std::vector<double>(m.input_dim(), 1.0));
  return m;
}

std::string last_bias(const nn::Mlp& net) { return net.bias_name(net.layer_count() - 1); }

env::Dataset pointmass_data(std::size_t n, std::uint64_t seed) {
  const auto mdp = env::make_env("pointmass");
  return env::generate_dataset(mdp, {{env::medium_tier(), 1.0}}, n, seed);
}

}  // namespace

TEST(IdmNll, StandardNormalAtMean) {
  auto m = zeroed_model(3, 2);
  Rng rng(1);
  const Tensor x = tsup::random_tensor(5, m.input_dim(), rng);
  const Tensor y = Tensor::matrix(5, 2);
  EXPECT_NEAR(idm_nll_value(m, x, y), 2 * kHalfLog2Pi, 1e-12);
  const auto [mean, var] = m.predict(x);
  for (double v : var.values()) EXPECT_DOUBLE_EQ(v, 1.0);
  for (double v : mean.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(IdmNll, DoublingVarianceAddsHalfLog2) {
  auto m = zeroed_model(3, 2);
  Rng rng(2);
  const Tensor x = tsup::random_tensor(4, m.input_dim(), rng);
  const Tensor y = Tensor::matrix(4, 2);
  const double base = idm_nll_value(m, x, y);
  m.params().value(last_bias(m.logvar_net()))[1] = std::log(2.0);
  EXPECT_NEAR(idm_nll_value(m, x, y) - base, 0.5 * std::log(2.0), 1e-12);
}

// A constant-output model has zero NLL gradient exactly at the sample mean
// and the (population) sample variance.
TEST(IdmNll, ConstantModelMinimizedAtSampleMoments) {
  auto m = zeroed_model(2, 1);
  Rng rng(3);
  const Tensor x = tsup::random_tensor(20, m.input_dim(), rng);
  Tensor y = tsup::random_tensor(20, 1, rng, 2.0);
  double mu = 0.0, var = 0.0;
  for (double v : y.values()) mu += v / 20.0;
  for (double v : y.values()) var += (v - mu) * (v - mu) / 20.0;
  m.params().value(last_bias(m.mean_net()))[0] = mu;
  m.params().value(last_bias(m.logvar_net()))[0] = std::log(var);
  nn::Graph g;
  g.backward(idm_nll(g, m, x, y));
  const auto grads = g.gradients(m.params());
  EXPECT_NEAR(grads.at(last_bias(m.mean_net()))[0], 0.0, 1e-12);
  EXPECT_NEAR(grads.at(last_bias(m.logvar_net()))[0], 0.0, 1e-12);
  const double at_opt = idm_nll_value(m, x, y);
  m.params().value(last_bias(m.mean_net()))[0] = mu + 0.05;
  EXPECT_GT(idm_nll_value(m, x, y), at_opt);
}

TEST(IdmModel, VarianceClampedAndPositive) {
  auto m = zeroed_model(2, 1);
  m.params().value(last_bias(m.logvar_net()))[0] = -50.0;
  Rng rng(4);
  const auto [mean, var] = m.predict(tsup::random_tensor(3, m.input_dim(), rng));
  for (double v : var.values()) EXPECT_NEAR(v, std::exp(-10.0), 1e-18);
  EXPECT_THROW(m.predict(tsup::random_tensor(3, m.input_dim() + 1, rng)), std::invalid_argument);
}

// With unit variance frozen, NLL is half the squared error plus a constant,
// so NLL and MSE training agree (Adam is invariant to the factor 1/2).
TEST(IdmTraining, FixedVarianceNllMatchesMse) {
  const auto ds = pointmass_data(6, 5);
  IdmConfig cfg;
  cfg.hidden = {16};
  cfg.fixed_variance = true;
  cfg.budget = 300;
  cfg.eval_every = 300;
  cfg.batch_size = 32;
  const auto a = train_idm(ds, cfg, 9);
  cfg.loss = IdmLoss::kMse;
  const auto b = train_idm(ds, cfg, 9);
  const auto wm = data::window_matrix(ds.trajectories, cfg.window, 2);
  const auto pa = a.predict(wm.inputs).first;
  const auto pb = b.predict(wm.inputs).first;
  double worst = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) worst = std::max(worst, std::abs(pa[i] - pb[i]));
  EXPECT_LT(worst, 1e-3);
}

TEST(IdmTraining, DeterministicAndSelectsBestValidation) {
  const auto ds = pointmass_data(8, 6);
  IdmConfig cfg;
  cfg.hidden = {16, 16};
  cfg.budget = 400;
  cfg.eval_every = 100;
  cfg.batch_size = 32;
  const auto a = train_idm(ds, cfg, 1);
  const auto b = train_idm(ds, cfg, 1);
  EXPECT_TRUE(a.params() == b.params());
  ASSERT_EQ(a.validation_curve().size(), 4u);
  double best = 1e300;
  std::size_t best_it = 0;
  for (const auto& p : a.validation_curve()) {
    if (p.val_nll < best) best = p.val_nll, best_it = p.iteration;
  }
  EXPECT_EQ(a.best_iteration(), best_it);
  cfg.budget = 0;
  EXPECT_THROW(train_idm(ds, cfg, 1), std::invalid_argument);
}

TEST(IdmTraining, ProxyLabelAndSaveLoad) {
  const auto ds = pointmass_data(6, 7);
  IdmConfig cfg;
  cfg.hidden = {8};
  cfg.budget = 50;
  cfg.eval_every = 25;
  cfg.window.k = 1;
  const auto m = train_idm(ds, cfg, 2);
  EXPECT_THROW(proxy_label(m, ds), std::invalid_argument);
  const auto proxy = proxy_label(m, data::strip_actions(ds));
  for (const auto& t : proxy.trajectories) {
    ASSERT_TRUE(t.labelled());
    for (double v : t.actions->values()) EXPECT_LE(std::abs(v), 1.0);
  }
  const auto path = std::filesystem::temp_directory_path() / "ssorl_test_idm.bin";
  save_idm(path, m);
  const auto back = load_idm(path);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  const auto wm = data::window_matrix(ds.trajectories, cfg.window, 2);
  EXPECT_EQ(back.predict(wm.inputs).first, m.predict(wm.inputs).first);
  EXPECT_EQ(back.config().window.k, 1u);
}

TEST(SelfTrain, MixtureVarianceLawOfTotalVariance) {
  const std::vector<std::vector<double>> means{{0.0}, {2.0}};
  const std::vector<std::vector<double>> vars{{1.0}, {1.0}};
  EXPECT_DOUBLE_EQ(selftrain::mixture_variance(means, vars)[0], 2.0);
  const std::vector<std::vector<double>> same{{0.3, 0.1}, {0.3, 0.1}};
  const std::vector<std::vector<double>> sv{{0.5, 2.0}, {0.5, 2.0}};
  EXPECT_EQ(selftrain::mixture_variance(same, sv), (std::vector<double>{0.5, 2.0}));
  const double per_dim[2] = {2.0, 4.0};
  EXPECT_DOUBLE_EQ(selftrain::reduce_uncertainty(per_dim, selftrain::Reduction::kMean), 3.0);
  EXPECT_DOUBLE_EQ(selftrain::reduce_uncertainty(per_dim, selftrain::Reduction::kMax), 4.0);
}

TEST(SelfTrain, ScheduleAndSelection) {
  EXPECT_EQ(selftrain::augmentation_schedule(100, 5), (std::vector<std::size_t>{20, 20, 20, 20, 20}));
  EXPECT_EQ(selftrain::augmentation_schedule(10, 3), (std::vector<std::size_t>{3, 3, 4}));
  const double nu[5] = {0.5, 0.1, 0.5, 0.05, 0.1};
  EXPECT_EQ(selftrain::lowest_uncertainty(nu, 3), (std::vector<std::size_t>{3, 1, 4}));
  EXPECT_EQ(selftrain::lowest_uncertainty(nu, 4).back(), 0u);
}

TEST(SelfTrain, RoundsDrainThePool) {
  const auto ds = pointmass_data(6, 8);
  const auto unl = pointmass_data(2, 9);
  selftrain::SelfTrainConfig cfg;
  cfg.idm.hidden = {8};
  cfg.idm.budget = 40;
  cfg.idm.eval_every = 20;
  cfg.members = 2;
  cfg.rounds = 4;
  const auto lab = data::window_matrix(ds.trajectories, cfg.idm.window, 2);
  auto unw = data::window_matrix(data::strip_actions(unl).trajectories, cfg.idm.window, 2);
  const auto r = selftrain::self_train(lab, unw, cfg, 4, 2, 3);
  ASSERT_EQ(r.log.size(), 5u);
  const std::size_t n = unw.size();
  for (std::size_t round = 0; round <= 4; ++round) {
    const std::size_t left = r.log[round]["unlabelled_size"];
    EXPECT_EQ(left, n - round * (n / 4)) << round;
  }
  EXPECT_EQ(r.proxy_actions.rows(), n);
  EXPECT_EQ(r.ensemble.size(), 2u);
  const auto labelled = selftrain::apply_proxy_actions(data::strip_actions(unl), unw, r.proxy_actions);
  for (const auto& t : labelled.trajectories) EXPECT_TRUE(t.labelled());
}
