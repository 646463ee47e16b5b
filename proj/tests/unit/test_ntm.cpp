#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "topicaux/auxloss/aux_loss.hpp"
#include "topicaux/common/error.hpp"
#include "topicaux/corpus/corpus.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/num/gradcheck.hpp"
#include "topicaux/ntm/checkpoint.hpp"
#include "topicaux/ntm/model.hpp"
#include "topicaux/ntm/topics.hpp"
#include "topicaux/ntm/trainer.hpp"

using namespace topicaux;
using namespace topicaux::ntm;
using num::Matrix;
using num::RngStream;
using num::Tape;
using num::Var;

namespace {

ModelConfig small_config(std::size_t K = 3, std::size_t V = 10) {
  ModelConfig c;
  c.num_topics = K;
  c.vocab_size = V;
  c.hidden = 8;
  c.batch_size = 4;
  c.epochs = 4;
  c.seed = 11;
  return c;
}

// Two clean themes over V=10: words 0-4 and 5-9.
corpus::BowCorpus toy_corpus() {
  std::vector<corpus::TokenSequence> seqs = {
      {0, 1, 2, 0, 1, 3}, {1, 2, 3, 4, 2},    {0, 2, 4, 4, 1}, {3, 4, 0, 1},
      {5, 6, 7, 5, 6, 8}, {6, 7, 8, 9, 7, 7}, {5, 7, 9, 9, 6}, {8, 9, 5, 6},
  };
  return corpus::make_bow(seqs, 10);
}

corpus::NpmiMatrix toy_npmi() {
  corpus::NpmiMatrix n(10, -0.2f);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) n(i, j) = i == j ? 1.0f : ((i < 5) == (j < 5) ? 0.4f : -0.2f);
  return n;
}

ModelParams fresh_params(const ModelConfig& c) {
  RngStream rng(c.seed, kInitStream);
  return init_params(c, rng);
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  const auto pa = a.trainable();
  const auto pb = b.trainable();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!(pa[i]->value == pb[i]->value)) return false;
  return a.bn_mu.running_mean == b.bn_mu.running_mean && a.bn_mu.running_var == b.bn_mu.running_var &&
         a.bn_lv.running_mean == b.bn_lv.running_mean && a.bn_lv.running_var == b.bn_lv.running_var &&
         a.bn_dec.running_mean == b.bn_dec.running_mean && a.bn_dec.running_var == b.bn_dec.running_var;
}

std::vector<std::size_t> all_docs(const corpus::BowCorpus& c) {
  std::vector<std::size_t> ids(c.num_docs());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

// KL(N(m, e^lv) || N(pm, e^plv)) in one dimension by Simpson's rule on +-12 sd.
double kl_quadrature(double m, double lv, double pm, double plv) {
  const double s = std::exp(0.5 * lv), ps = std::exp(0.5 * plv);
  const auto logpdf = [](double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
  };
  const int n = 20000;
  const double a = m - 12 * s, b = m + 12 * s, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double lq = logpdf(x, m, s);
    const double f = std::exp(lq) * (lq - logpdf(x, pm, ps));
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return acc * h / 3.0;
}

}  // namespace

// ---- config and init --------------------------------------------------------------

TEST(ModelConfig, Validation) {
  ModelConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.num_topics = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.input_mode = InputMode::concat;
  EXPECT_THROW(c.validate(), ConfigError);
  c.embed_dim = 4;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.input_dim(), 14u);
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_input_mode("concat"), InputMode::concat);
  EXPECT_THROW(parse_input_mode("both"), ConfigError);
}

TEST(InitPrior, LaplaceApproximation) {
  auto [m2, lv2] = init_prior(2);
  EXPECT_EQ(m2, Matrix(1, 2, 0.0));
  EXPECT_NEAR(std::exp(lv2[0]), 0.5, 1e-15);
  auto [m50, lv50] = init_prior(50);
  for (double v : lv50.data()) EXPECT_NEAR(std::exp(v), 0.98, 1e-15);
  EXPECT_THROW(init_prior(1), ConfigError);
}

TEST(InitParams, ShapesBoundsAndDeterminism) {
  const ModelConfig c = small_config(3, 10);
  const ModelParams p = fresh_params(c);
  EXPECT_EQ(p.enc_w.value.rows(), 10u);
  EXPECT_EQ(p.enc_w.value.cols(), 8u);
  EXPECT_EQ(p.beta.value.rows(), 3u);
  EXPECT_EQ(p.beta.value.cols(), 10u);
  const double bound = std::sqrt(6.0 / 13.0);
  for (double v : p.beta.value.data()) EXPECT_LE(std::abs(v), bound);
  EXPECT_TRUE(params_equal(p, fresh_params(c)));
  ModelConfig other = c;
  other.seed = 12;
  EXPECT_FALSE(params_equal(p, fresh_params(other)));
}

// ---- inputs -----------------------------------------------------------------------------

TEST(MakeInput, Modes) {
  const std::vector<corpus::BowEntry> doc = {{1, 2}, {3, 6}};
  const std::vector<double> emb = {0.5, -1.0};
  ModelConfig c = small_config(2, 4);
  EXPECT_EQ(make_input(doc, {}, c), Matrix::from_rows({{0, 2, 0, 6}}));
  c.input_mode = InputMode::embedding;
  c.embed_dim = 2;
  EXPECT_EQ(make_input(doc, emb, c), Matrix::from_rows({{0.5, -1.0}}));
  c.input_mode = InputMode::concat;
  EXPECT_EQ(make_input(doc, emb, c), Matrix::from_rows({{0, 0.25, 0, 0.75, 0.5, -1.0}}));
  EXPECT_THROW(make_input(doc, std::vector<double>{1.0}, c), DimensionError);
}

TEST(Encode, InputWidthMismatch) {
  ModelConfig c = small_config(2, 4);
  c.input_mode = InputMode::concat;
  c.embed_dim = 2;
  ModelParams p = fresh_params(c);
  Tape t;
  const BoundParams b = bind(t, p);
  RngStream r(0, 0);
  EXPECT_THROW(encode(b, p, t.constant(Matrix(3, 4)), Mode::eval, 0.0, r), DimensionError);
  EXPECT_NO_THROW(encode(b, p, t.constant(Matrix(3, 6)), Mode::eval, 0.0, r));
}

TEST(MakeBatch, DenseLayout) {
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config();
  const std::vector<std::size_t> ids = {3, 0};
  const Batch b = make_batch(corpus, nullptr, ids, c);
  EXPECT_EQ(b.bow.rows(), 2u);
  EXPECT_EQ(b.bow(1, 0), 2.0);
  EXPECT_EQ(b.bow(0, 3), 1.0);
  EXPECT_EQ(b.input, b.bow);
  ModelConfig wrong = c;
  wrong.vocab_size = 11;
  EXPECT_THROW(make_batch(corpus, nullptr, ids, wrong), DimensionError);
}

// ---- reparameterization ------------------------------------------------------------------

TEST(Reparameterize, VanishingVarianceGivesSoftmaxOfMean) {
  const Matrix mu = Matrix::from_rows({{0.3, -1.2, 2.0}, {0.0, 0.0, 0.0}});
  Tape t;
  RngStream noise(5, kNoiseStream);
  const Matrix theta = reparameterize(t.constant(mu), t.constant(Matrix(2, 3, -60.0)), &noise).value();
  const Matrix expect = reparameterize(t.constant(mu), t.constant(Matrix(2, 3)), nullptr).value();
  EXPECT_LT(num::max_abs_diff(theta, expect), 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(theta(1, i), 1.0 / 3.0, 1e-12);
  double z = 0;
  for (double v : mu.row(0)) z += std::exp(v);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(expect(0, i), std::exp(mu(0, i)) / z, 1e-15);
}

TEST(Reparameterize, MonteCarloMatchesIndependentSampler) {
  const std::size_t N = 10000;
  const std::vector<double> m = {0.5, -0.3, 0.0, 1.0};
  const std::vector<double> lv = {0.2, -1.0, 0.5, -0.4};
  Matrix mu(N, 4), logvar(N, 4);
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t k = 0; k < 4; ++k) {
      mu(r, k) = m[k];
      logvar(r, k) = lv[k];
    }
  Tape t;
  RngStream noise(17, kNoiseStream);
  const Matrix theta = reparameterize(t.constant(mu), t.constant(logvar), &noise).value();

  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < 4; ++k) {
    double s1 = 0, q1 = 0, s2 = 0, q2 = 0;
    for (std::size_t r = 0; r < N; ++r) {
      s1 += theta(r, k);
      q1 += theta(r, k) * theta(r, k);
      double e[4], z = 0;
      for (std::size_t j = 0; j < 4; ++j) z += e[j] = std::exp(m[j] + std::exp(0.5 * lv[j]) * normal(gen));
      s2 += e[k] / z;
      q2 += e[k] / z * e[k] / z;
    }
    const double n = static_cast<double>(N);
    const double m1 = s1 / n, m2 = s2 / n;
    const double se = std::sqrt((q1 / n - m1 * m1) / n + (q2 / n - m2 * m2) / n);
    EXPECT_LT(std::abs(m1 - m2), 3.0 * se) << "topic " << k;
  }
}

// ---- decoder -----------------------------------------------------------------------------

TEST(Decode, RowsAreDistributions) {
  const ModelConfig c = small_config();
  ModelParams p = fresh_params(c);
  std::mt19937_64 gen(1);
  Tape t;
  const BoundParams b = bind(t, p);
  Matrix theta = testutil::random_matrix(gen, 5, 3, 0.01, 1.0);
  for (std::size_t r = 0; r < 5; ++r) {
    const double s = theta(r, 0) + theta(r, 1) + theta(r, 2);
    for (std::size_t k = 0; k < 3; ++k) theta(r, k) /= s;
  }
  for (Mode mode : {Mode::train, Mode::eval}) {
    const Matrix lp = decode(b, p, t.constant(theta), mode).value();
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0;
      for (double v : lp.row(r)) s += std::exp(v);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Decode, OneHotThetaSelectsTopicRow) {
  // Fresh running stats are mean 0, var 1: eval-mode BN divides by sqrt(1 + eps).
  const ModelConfig c = small_config();
  ModelParams p = fresh_params(c);
  Tape t;
  const BoundParams b = bind(t, p);
  const Matrix lp = decode(b, p, t.constant(Matrix::from_rows({{0, 1, 0}})), Mode::eval).value();
  const double scale = 1.0 / std::sqrt(1.0 + 1e-8);
  double z = 0;
  for (double v : p.beta.value.row(1)) z += std::exp(v * scale);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(lp(0, i), p.beta.value(1, i) * scale - std::log(z), 1e-12);
}

// ---- KL and ELBO ----------------------------------------------------------------------------

TEST(KlDivergence, MatchesQuadrature) {
  const ModelConfig c = small_config(2, 10);
  ModelParams p = fresh_params(c);
  p.prior_mean.value = Matrix::from_rows({{0.1, -0.2}});
  p.prior_logvar.value = Matrix::from_rows({{std::log(0.5), 0.3}});
  const Matrix mu = Matrix::from_rows({{0.4, -1.0}, {-0.7, 0.2}});
  const Matrix lv = Matrix::from_rows({{-0.5, 0.1}, {0.3, -1.2}});
  Tape t;
  const BoundParams b = bind(t, p);
  const double kl = kl_divergence(b, t.constant(mu), t.constant(lv)).value()[0];
  double expect = 0;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t k = 0; k < 2; ++k)
      expect += kl_quadrature(mu(r, k), lv(r, k), p.prior_mean.value[k], p.prior_logvar.value[k]);
  EXPECT_NEAR(kl, expect / 2.0, 1e-8);
}

TEST(KlDivergence, NonNegativeAndZeroAtPrior) {
  const ModelConfig c = small_config(4, 10);
  ModelParams p = fresh_params(c);
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    Tape t;
    const BoundParams b = bind(t, p);
    const double kl = kl_divergence(b, t.constant(testutil::random_matrix(gen, 3, 4, -3, 3)),
                                    t.constant(testutil::random_matrix(gen, 3, 4, -3, 3)))
                          .value()[0];
    EXPECT_GE(kl, 0.0);
  }
  Tape t;
  const BoundParams b = bind(t, p);
  Matrix mu(2, 4), lv(2, 4);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t k = 0; k < 4; ++k) lv(r, k) = p.prior_logvar.value[k];
  EXPECT_NEAR(kl_divergence(b, t.constant(mu), t.constant(lv)).value()[0], 0.0, 1e-14);
}

TEST(Elbo, PosteriorEqualToPriorWithFlatTopics) {
  // Zero encoder heads give mu = 0 and a constant logvar; matching the prior to
  // them makes KL vanish, and beta = 0 makes every word equally likely.
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config(3, 10);
  ModelParams p = fresh_params(c);
  const double bn = 1.0 / std::sqrt(1.0 + 1e-8);
  p.mu_w.value = Matrix(8, 3);
  p.mu_b.value = Matrix(1, 3);
  p.lv_w.value = Matrix(8, 3);
  p.lv_b.value = Matrix(1, 3, -0.4);
  p.prior_logvar.value = Matrix(1, 3, -0.4 * bn);
  p.beta.value = Matrix(3, 10);
  const Batch batch = make_batch(corpus, nullptr, all_docs(corpus), c);
  Tape t;
  const BoundParams b = bind(t, p);
  RngStream d(0, kDropoutStream), n(0, kNoiseStream);
  const ElboTerms terms = elbo(b, p, batch, Mode::eval, c.dropout, d, n);
  double tokens = 0;
  for (double v : batch.bow.data()) tokens += v;
  EXPECT_NEAR(terms.kl.value()[0], 0.0, 1e-14);
  EXPECT_NEAR(terms.recon.value()[0], tokens / 8.0 * std::log(10.0), 1e-12);
  EXPECT_NEAR(terms.loss.value()[0], terms.recon.value()[0], 1e-14);
}

TEST(Elbo, FullObjectiveGradientMatchesFiniteDifferences) {
  const auto corpus = toy_corpus();
  ModelConfig c = small_config(3, 10);
  c.hidden = 5;
  ModelParams p = fresh_params(c);
  const std::vector<std::size_t> ids = {0, 2, 5, 7};
  const Batch batch = make_batch(corpus, nullptr, ids, c);
  auxloss::AuxConfig aux;
  aux.top_n = 4;
  const Matrix w = auxloss::compute_weights(p.beta.value, toy_npmi(), aux).diversity;
  const RngStream d0(3, kDropoutStream), n0(3, kNoiseStream);
  num::Objective f = [&](Tape& t) {
    RngStream d = d0, n = n0;
    const BoundParams b = bind(t, p);
    return step_objective(b, p, batch, c, Mode::train, &w, 5.0, d, n).loss;
  };
  // Biases feeding a training-mode batch norm have exactly zero gradient, so
  // their difference quotients are pure roundoff (~1e-10 at this loss scale).
  const auto res = num::finite_diff_check(f, p.trainable(), {1e-5, 1e-4, 1e-5});
  EXPECT_TRUE(res.passed) << res.worst_param << "[" << res.worst_index << "] rel " << res.max_rel_error;
  Tape t;
  p.zero_grad();
  t.backward(f(t));
  for (double g : p.mu_b.grad.data()) EXPECT_NEAR(g, 0.0, 1e-12);
  for (double g : p.lv_b.grad.data()) EXPECT_NEAR(g, 0.0, 1e-12);
  EXPECT_EQ(res.coordinates, 10u * 5 + 5 + 2 * (5 * 3 + 3) + 3 * 10 + 3 + 3);
}

TEST(StepObjective, AuxTermOnlyRecordedWhenActive) {
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config(3, 10);
  ModelParams p = fresh_params(c);
  const Batch batch = make_batch(corpus, nullptr, all_docs(corpus), c);
  const Matrix w(3, 10, 0.5);
  // loss value and unscaled aux; the tape dies with the lambda
  const auto value = [&](const Matrix* weights, double lambda) {
    Tape t;
    RngStream d(1, kDropoutStream), n(1, kNoiseStream);
    const BoundParams b = bind(t, p);
    const StepObjective s = step_objective(b, p, batch, c, Mode::train, weights, lambda, d, n);
    return std::pair{s.loss.value()[0], s.aux};
  };
  const auto [base, base_aux] = value(nullptr, 0.0);
  const auto [zero, zero_aux] = value(&w, 0.0);
  const auto [on, on_aux] = value(&w, 2.0);
  EXPECT_EQ(base, zero);
  EXPECT_EQ(base_aux, 0.0);
  EXPECT_EQ(zero_aux, auxloss::aux_loss_value(p.beta.value, w));
  EXPECT_NEAR(on, base + 2.0 * on_aux, 1e-12);
}

// ---- topics --------------------------------------------------------------------------

TEST(ExtractTopics, OrderAndTies) {
  const Matrix beta = Matrix::from_rows({{1, 2, 2, 0}, {0, 0, 0, 0}});
  const TopicSet t = extract_topics(beta, 3);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(topic_word_ids(t)[0], (std::vector<corpus::WordId>{1, 2, 0}));
  EXPECT_EQ(topic_word_ids(t)[1], (std::vector<corpus::WordId>{0, 1, 2}));
  const double z = std::exp(1) + 2 * std::exp(2) + 1;
  EXPECT_NEAR(t[0][0].prob, std::exp(2) / z, 1e-15);
  EXPECT_NEAR(t[1][2].prob, 0.25, 1e-15);
  EXPECT_THROW(extract_topics(beta, 5), ConfigError);
}

TEST(InferTheta, RowsOnSimplex) {
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config();
  ModelParams p = fresh_params(c);
  const Matrix theta = infer_theta(p, c, make_batch(corpus, nullptr, all_docs(corpus), c).input);
  for (std::size_t r = 0; r < theta.rows(); ++r) {
    double s = 0;
    for (double v : theta.row(r)) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_THROW(infer_theta(p, c, Matrix(2, 9)), DimensionError);
}

// ---- training -------------------------------------------------------------------------

TEST(Trainer, LossDecreasesOnToyCorpus) {
  const auto corpus = toy_corpus();
  ModelConfig c = small_config(2, 10);
  c.epochs = 50;
  Trainer tr(c, std::nullopt, {&corpus, nullptr}, nullptr);
  tr.fit();
  ASSERT_EQ(tr.trace().size(), 50u);
  double first = 0, last = 0;
  for (std::size_t e = 0; e < 5; ++e) {
    first += tr.trace()[e].elbo;
    last += tr.trace()[45 + e].elbo;
  }
  EXPECT_LT(last, first);
  for (const auto& s : tr.trace()) EXPECT_TRUE(std::isfinite(s.elbo));
}

TEST(Trainer, DeterministicForSeed) {
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config();
  Trainer a(c, std::nullopt, {&corpus, nullptr}, nullptr);
  Trainer b(c, std::nullopt, {&corpus, nullptr}, nullptr);
  a.fit();
  b.fit();
  EXPECT_TRUE(params_equal(a.params(), b.params()));
  EXPECT_EQ(a.trace(), b.trace());
}

TEST(Trainer, BaselineIgnoresNpmi) {
  const auto corpus = toy_corpus();
  const auto npmi = toy_npmi();
  const ModelConfig c = small_config();
  Trainer a(c, std::nullopt, {&corpus, nullptr}, nullptr);
  Trainer b(c, std::nullopt, {&corpus, nullptr}, &npmi);
  a.fit();
  b.fit();
  EXPECT_TRUE(params_equal(a.params(), b.params()));
}

TEST(Trainer, WarmupEpochZeroMatchesBaseline) {
  const auto corpus = toy_corpus();
  const auto npmi = toy_npmi();
  const ModelConfig c = small_config();
  auxloss::AuxConfig aux;
  aux.top_n = 4;
  aux.warmup_epochs = 50;
  Trainer base(c, std::nullopt, {&corpus, nullptr}, nullptr);
  Trainer with(c, aux, {&corpus, nullptr}, &npmi);
  base.run_epoch();
  const EpochStats s = with.run_epoch();
  EXPECT_EQ(s.lambda_a, 0.0);
  EXPECT_GT(s.aux, 0.0);
  EXPECT_TRUE(params_equal(base.params(), with.params()));
  base.run_epoch();
  EXPECT_EQ(with.run_epoch().lambda_a, 2.0);
  EXPECT_FALSE(params_equal(base.params(), with.params()));
}

TEST(Trainer, InputErrors) {
  const auto corpus = toy_corpus();
  const ModelConfig c = small_config();
  auxloss::AuxConfig aux;
  EXPECT_THROW(Trainer(c, aux, {&corpus, nullptr}, nullptr), ConfigError);
  aux.top_n = 4;
  EXPECT_THROW(Trainer(c, aux, {&corpus, nullptr}, nullptr), ConfigError);
  const corpus::NpmiMatrix small(9, 0.0f);
  EXPECT_THROW(Trainer(c, aux, {&corpus, nullptr}, &small), DimensionError);
  ModelConfig wrong = c;
  wrong.vocab_size = 12;
  EXPECT_THROW(Trainer(wrong, std::nullopt, {&corpus, nullptr}, nullptr), DimensionError);
  ModelConfig emb = c;
  emb.input_mode = InputMode::embedding;
  emb.embed_dim = 3;
  EXPECT_THROW(Trainer(emb, std::nullopt, {&corpus, nullptr}, nullptr), ConfigError);
}

TEST(Trainer, EmbeddingInputTrains) {
  const auto corpus = toy_corpus();
  corpus::DocEmbeddings emb{3, Matrix(8, 3)};
  std::mt19937_64 gen(4);
  emb.rows = testutil::random_matrix(gen, 8, 3);
  for (InputMode mode : {InputMode::embedding, InputMode::concat}) {
    ModelConfig c = small_config();
    c.input_mode = mode;
    c.embed_dim = 3;
    Trainer tr(c, std::nullopt, {&corpus, &emb}, nullptr);
    tr.fit();
    EXPECT_EQ(tr.trace().size(), 4u);
  }
}

// ---- checkpoints -----------------------------------------------------------------------

TEST(Checkpoint, RoundTrip) {
  testutil::TempDir dir;
  const auto corpus = toy_corpus();
  const auto npmi = toy_npmi();
  const ModelConfig c = small_config();
  auxloss::AuxConfig aux;
  aux.top_n = 4;
  aux.mode = auxloss::WeightMode::coherence;
  Trainer tr(c, aux, {&corpus, nullptr}, &npmi);
  tr.set_vocabulary({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  tr.run_epoch();
  tr.run_epoch();
  const Checkpoint saved = tr.checkpoint();
  save_checkpoint(dir.path() / "m.ckpt", saved);
  const Checkpoint loaded = load_checkpoint(dir.path() / "m.ckpt");
  EXPECT_EQ(loaded.config, saved.config);
  ASSERT_TRUE(loaded.aux.has_value());
  EXPECT_EQ(loaded.aux->top_n, 4u);
  EXPECT_EQ(loaded.aux->mode, auxloss::WeightMode::coherence);
  EXPECT_EQ(loaded.vocabulary, saved.vocabulary);
  EXPECT_EQ(loaded.trace, saved.trace);
  EXPECT_TRUE(params_equal(loaded.params, saved.params));
  EXPECT_EQ(loaded.state.epoch, 2u);
  EXPECT_EQ(loaded.state.adam_step, saved.state.adam_step);
  EXPECT_EQ(loaded.state.noise, saved.state.noise);
}

TEST(Checkpoint, ResumeIsBitExact) {
  testutil::TempDir dir;
  const auto corpus = toy_corpus();
  const auto npmi = toy_npmi();
  ModelConfig c = small_config();
  c.epochs = 5;
  auxloss::AuxConfig aux;
  aux.top_n = 4;
  aux.warmup_epochs = 2;
  for (bool with_aux : {false, true}) {
    const std::optional<auxloss::AuxConfig> a = with_aux ? std::optional(aux) : std::nullopt;
    Trainer straight(c, a, {&corpus, nullptr}, &npmi);
    straight.fit();

    Trainer first(c, a, {&corpus, nullptr}, &npmi);
    first.run_epoch();
    first.run_epoch();
    save_checkpoint(dir.path() / "r.ckpt", first.checkpoint());
    Trainer resumed(load_checkpoint(dir.path() / "r.ckpt"), {&corpus, nullptr}, &npmi);
    resumed.fit();
    EXPECT_EQ(resumed.epoch(), 5u);
    EXPECT_TRUE(params_equal(straight.params(), resumed.params())) << "aux " << with_aux;
    EXPECT_EQ(straight.trace(), resumed.trace());
  }
}

TEST(Checkpoint, CorruptFilesRejected) {
  testutil::TempDir dir;
  const auto corpus = toy_corpus();
  Trainer tr(small_config(), std::nullopt, {&corpus, nullptr}, nullptr);
  tr.run_epoch();
  const auto good = dir.path() / "good.ckpt";
  save_checkpoint(good, tr.checkpoint());
  const std::string bytes = testutil::read_file(good);

  const auto expect_format_error = [&](const std::string& content, const char* what) {
    const auto p = dir.path() / "bad.ckpt";
    testutil::write_file(p, content);
    EXPECT_THROW(load_checkpoint(p), FormatError) << what;
  };
  expect_format_error("", "empty");
  expect_format_error("NOT-A-CHECKPOINT\n" + bytes.substr(bytes.find('\n') + 1), "magic");
  expect_format_error(bytes.substr(0, bytes.size() - 9), "truncated");
  expect_format_error(bytes + "x", "trailing bytes");
  std::string nan = bytes;
  const double qnan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan.data() + nan.size() - 8, &qnan, 8);
  expect_format_error(nan, "nan");
  std::string k = bytes;
  k.replace(k.find("num_topics=3"), 12, "num_topics=1");
  expect_format_error(k, "bad config");
  EXPECT_THROW(load_checkpoint(dir.path() / "missing.ckpt"), IoError);
}
