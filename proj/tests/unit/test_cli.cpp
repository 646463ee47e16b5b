#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "json.hpp"
#include "test_util.hpp"
#include "topicaux/cli/cli.hpp"
#include "topicaux/common/error.hpp"
#include "topicaux/corpus/npmi.hpp"

using namespace topicaux;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Three themes of eight words each, plus shared filler.
std::string fixture_corpus(std::size_t docs = 60, std::uint64_t seed = 7) {
  const std::vector<std::vector<std::string>> themes = {
      {"game", "team", "score", "season", "player", "coach", "league", "goal"},
      {"disk", "drive", "memory", "card", "cpu", "board", "bus", "chip"},
      {"god", "church", "faith", "belief", "bible", "prayer", "sin", "soul"},
  };
  const std::vector<std::string> filler = {"time", "people", "year"};
  std::mt19937_64 gen(seed);
  std::string text;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto& theme = themes[d % 3];
    const std::size_t len = 8 + gen() % 10;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += gen() % 6 == 0 ? filler[gen() % filler.size()] : theme[gen() % theme.size()];
    }
    text += '\n';
  }
  return text;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::istringstream in(testutil::read_file(p));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

void set_flag(std::vector<std::string>& args, const std::string& flag, const std::string& value) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == flag) {
      args[i + 1] = value;
      return;
    }
  args.insert(args.end(), {flag, value});
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = (dir_.path() / "corpus.txt").string();
    testutil::write_file(corpus_, fixture_corpus());
    const Result r = cli_run({"build-cooc", "--corpus", corpus_, "--out", p("cooc")});
    ASSERT_EQ(r.code, 0) << r.err;
    vocab_ = p("cooc/vocab.txt");
    npmi_ = p("cooc/npmi.bin");
  }

  std::string p(const std::string& rel) const { return (dir_.path() / rel).string(); }

  std::vector<std::string> train_args(const std::string& out, const std::string& aux = "wd") const {
    std::vector<std::string> a = {"train", "--corpus", corpus_, "--vocab", vocab_, "--npmi", npmi_, "--k", "3",
                                  "--epochs", "6", "--batch-size", "16", "--hidden", "10", "--aux", aux,
                                  "--top-n", "5", "--warmup", "3", "--lambda-a", "20", "--seed", "3",
                                  "--out", out, "--quiet"};
    return a;
  }

  testutil::TempDir dir_;
  std::string corpus_, vocab_, npmi_;
};

}  // namespace

// ---- helpers ---------------------------------------------------------------------------

TEST(ConfigFile, Parsing) {
  testutil::TempDir dir;
  const auto f = dir.path() / "run.cfg";
  testutil::write_file(f, "# comment\nepochs = 5\n\nlambda_d=0.8  # trailing\nout = x y\n");
  const auto m = cli::read_config_file(f);
  EXPECT_EQ(m.at("epochs"), "5");
  EXPECT_EQ(m.at("lambda-d"), "0.8");
  EXPECT_EQ(m.at("out"), "x y");
  testutil::write_file(f, "epochs=5\nepochs=6\n");
  EXPECT_THROW(cli::read_config_file(f), ConfigError);
  testutil::write_file(f, "just words\n");
  EXPECT_THROW(cli::read_config_file(f), ConfigError);
  EXPECT_THROW(cli::read_config_file(dir.path() / "missing.cfg"), ConfigError);
}

TEST(SeedList, Forms) {
  EXPECT_EQ(cli::parse_seed_list("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(cli::parse_seed_list("0..3"), (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(cli::parse_seed_list("1,4,7"), (std::vector<std::uint64_t>{1, 4, 7}));
  EXPECT_THROW(cli::parse_seed_list(""), ConfigError);
  EXPECT_THROW(cli::parse_seed_list("3..1"), ConfigError);
  EXPECT_THROW(cli::parse_seed_list("a,b"), ConfigError);
}

// ---- commands ------------------------------------------------------------------------

TEST_F(CliTest, BuildCoocOutputs) {
  const Result r = cli_run({"build-cooc", "--corpus", corpus_, "--out", p("c2"), "--threads", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("V=27 docs=60 dropped_docs=0 window=10 windows=", 0), 0u) << r.out;
  EXPECT_EQ(read_lines(p("c2/vocab.txt")).size(), 27u);
  const auto npmi = corpus::load_npmi(p("c2/npmi.bin"), 27);
  EXPECT_EQ(testutil::read_file(p("c2/npmi.bin")), testutil::read_file(npmi_));

  // a fixed vocabulary is not rewritten
  const Result fixed = cli_run({"build-cooc", "--corpus", corpus_, "--vocab", vocab_, "--out", p("c3")});
  ASSERT_EQ(fixed.code, 0) << fixed.err;
  EXPECT_FALSE(fs::exists(p("c3/vocab.txt")));
  EXPECT_EQ(testutil::read_file(p("c3/npmi.bin")), testutil::read_file(npmi_));
}

TEST_F(CliTest, TrainWritesCheckpointAndTrace) {
  const Result r = cli_run(train_args(p("run")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("run/model.ckpt")));
  const auto lines = read_lines(p("run/loss_trace.csv"));
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "epoch,elbo,aux,lambda_a");
  double prev = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<double> f;
    std::stringstream ss(lines[i]);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(std::stod(cell));
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0], static_cast<double>(i - 1));
    EXPECT_TRUE(std::isfinite(f[1]));
    EXPECT_GE(f[3], prev);
    prev = f[3];
  }
  EXPECT_EQ(prev, 20.0);
}

TEST_F(CliTest, ReRunsAreByteIdentical) {
  ASSERT_EQ(cli_run(train_args(p("a"))).code, 0);
  ASSERT_EQ(cli_run(train_args(p("b"))).code, 0);
  EXPECT_EQ(testutil::read_file(p("a/model.ckpt")), testutil::read_file(p("b/model.ckpt")));
  EXPECT_EQ(testutil::read_file(p("a/loss_trace.csv")), testutil::read_file(p("b/loss_trace.csv")));
}

TEST_F(CliTest, ResumeMatchesUninterruptedRun) {
  ASSERT_EQ(cli_run(train_args(p("full"))).code, 0);
  auto first = train_args(p("half"));
  set_flag(first, "--epochs", "3");
  ASSERT_EQ(cli_run(first).code, 0);
  const Result r = cli_run({"train", "--resume", p("half/model.ckpt"), "--corpus", corpus_, "--vocab", vocab_,
                            "--npmi", npmi_, "--epochs", "6", "--out", p("rest"), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testutil::read_file(p("full/model.ckpt")), testutil::read_file(p("rest/model.ckpt")));
  EXPECT_EQ(testutil::read_file(p("full/loss_trace.csv")), testutil::read_file(p("rest/loss_trace.csv")));
}

TEST_F(CliTest, TopicsRowsAreDistributions) {
  ASSERT_EQ(cli_run(train_args(p("run"))).code, 0);
  const Result r = cli_run({"topics", "--ckpt", p("run/model.ckpt"), "--top", "27", "--out", p("topics.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testutil::read_file(p("topics.txt")), r.out);
  std::istringstream in(r.out);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line); ++rows) {
    EXPECT_EQ(line.rfind("topic " + std::to_string(rows) + ":", 0), 0u);
    std::istringstream ws(line.substr(line.find(':') + 1));
    double sum = 0;
    std::size_t words = 0;
    for (std::string tok; ws >> tok; ++words) sum += std::stod(tok.substr(tok.rfind(':') + 1));
    EXPECT_EQ(words, 27u);
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_EQ(cli_run({"topics", "--ckpt", p("run/model.ckpt"), "--top", "28"}).code, 1);
}

TEST_F(CliTest, EvalReports) {
  ASSERT_EQ(cli_run(train_args(p("r1"))).code, 0);
  const Result r = cli_run({"eval", "--ckpt", p("r1/model.ckpt"), "--npmi", npmi_, "--out", p("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["we"].is_null());
  EXPECT_EQ(j["top_words"].size(), 3u);
  EXPECT_EQ(j["top_words"][0].size(), 10u);
  EXPECT_EQ(j["config"]["K"].get<int>(), 3);
  for (const char* f : {"npmi", "tu", "irbo"}) EXPECT_TRUE(j[f].is_number()) << f;
  EXPECT_EQ(testutil::read_file(p("report.json")), r.out);

  testutil::write_file(p("vec.txt"), "game 1 0\nteam 0.9 0.1\ndisk 0 1\ngod -1 0\n");
  const Result w = cli_run({"eval", "--ckpt", p("r1/model.ckpt"), "--cooc", npmi_, "--word-vectors", p("vec.txt")});
  ASSERT_EQ(w.code, 0) << w.err;
  EXPECT_GT(nlohmann::json::parse(w.out)["we_skipped_pairs"].get<int>(), 0);

  ASSERT_EQ(cli_run(train_args(p("r2"), "none")).code, 0);
  const Result many = cli_run({"eval", "--ckpt", p("r1/model.ckpt"), p("r2/model.ckpt"), "--npmi", npmi_});
  ASSERT_EQ(many.code, 0) << many.err;
  const auto s = nlohmann::json::parse(many.out);
  EXPECT_EQ(s["runs"].size(), 2u);
  EXPECT_NEAR(s["mean"]["tu"].get<double>(),
              (s["runs"][0]["tu"].get<double>() + s["runs"][1]["tu"].get<double>()) / 2.0, 1e-4);
}

TEST_F(CliTest, SweepWritesPerSeedAndSummary) {
  auto a = train_args(p("sweep"));
  a[0] = "sweep";
  a.insert(a.end(), {"--seeds", "0,5"});
  const Result r = cli_run(a);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* s : {"seed_0", "seed_5"})
    for (const char* f : {"model.ckpt", "loss_trace.csv", "report.json"})
      EXPECT_TRUE(fs::exists(p(std::string("sweep/") + s + "/" + f))) << s << "/" << f;
  const auto j = nlohmann::json::parse(testutil::read_file(p("sweep/summary.json")));
  EXPECT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["config"]["runs"].get<int>(), 2);
  EXPECT_EQ(j["runs"][1]["run"].get<std::string>(), "seed_5");
}

TEST_F(CliTest, HalfBalancedDiversityEqualsDoubledCoherence) {
  // W_D = W_C / 2 at lambda_d = 0.5, so doubling lambda_a gives the same objective.
  auto wc = train_args(p("wc"), "wc");
  auto wd = train_args(p("wd"), "wd");
  set_flag(wd, "--lambda-d", "0.5");
  set_flag(wd, "--lambda-a", "40");
  ASSERT_EQ(cli_run(wc).code, 0);
  ASSERT_EQ(cli_run(wd).code, 0);
  const Result a = cli_run({"topics", "--ckpt", p("wc/model.ckpt"), "--top", "27"});
  const Result b = cli_run({"topics", "--ckpt", p("wd/model.ckpt"), "--top", "27"});
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, ConcatInputMode) {
  std::string emb;
  for (int d = 0; d < 60; ++d) emb += std::to_string(d % 3) + " " + std::to_string(0.1 * d) + " 1\n";
  testutil::write_file(p("emb.txt"), emb);
  auto a = train_args(p("concat"), "none");
  a.insert(a.end(), {"--input-mode", "concat", "--doc-embeddings", p("emb.txt")});
  const Result r = cli_run(a);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cli_run({"topics", "--ckpt", p("concat/model.ckpt")}).code, 0);
}

// ---- flags and config files ------------------------------------------------------------

TEST_F(CliTest, UsageErrorsExitOneWithoutOutput) {
  const auto fails_cleanly = [&](std::vector<std::string> args, const char* what) {
    const Result r = cli_run(args);
    EXPECT_EQ(r.code, 1) << what << ": " << r.err;
    EXPECT_FALSE(r.err.empty()) << what;
    EXPECT_FALSE(fs::exists(p("bad"))) << what;
  };
  fails_cleanly({}, "no subcommand");
  fails_cleanly({"frobnicate"}, "unknown subcommand");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad")}, "missing --k");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad"), "--k", "3", "--bogus"}, "unknown flag");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad"), "--k", "three"}, "non-numeric");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad"), "--k", "3", "--aux", "wd"}, "aux without npmi");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad"), "--k", "3", "--aux", "xx", "--npmi", npmi_},
                "bad aux");
  fails_cleanly({"train", "--corpus", corpus_, "--out", p("bad"), "--k", "3", "--npmi", npmi_}, "npmi without vocab");
  auto a = train_args(p("bad"));
  a.insert(a.end(), {"--lambda-d", "0.3"});
  fails_cleanly(a, "lambda_d out of range");
  a = train_args(p("bad"));
  a.insert(a.end(), {"--input-mode", "concat"});
  fails_cleanly(a, "concat without embeddings");
  a = train_args(p("bad"));
  a.insert(a.end(), {"--dropout", "1.5"});
  fails_cleanly(a, "dropout");
  fails_cleanly({"eval", "--ckpt", p("x"), "--npmi", npmi_, "--rbo-p", "1"}, "rbo_p");
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  auto a = train_args(p("run"));
  set_flag(a, "--corpus", p("missing.txt"));
  EXPECT_EQ(cli_run(a).code, 2);
  testutil::write_file(p("junk.ckpt"), "garbage");
  EXPECT_EQ(cli_run({"topics", "--ckpt", p("junk.ckpt")}).code, 2);
  // V of the cache does not match the corpus vocabulary
  testutil::write_file(p("other.txt"), "alpha beta\nbeta gamma\n");
  ASSERT_EQ(cli_run({"build-cooc", "--corpus", p("other.txt"), "--out", p("other")}).code, 0);
  a = train_args(p("run"));
  set_flag(a, "--npmi", p("other/npmi.bin"));
  EXPECT_EQ(cli_run(a).code, 2);
}

TEST_F(CliTest, HelpExitsZero) {
  const Result r = cli_run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("build-cooc"), std::string::npos);
  const Result t = cli_run({"train", "--help"});
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("--lambda-d"), std::string::npos);
}

TEST_F(CliTest, ConfigFilePrecedence) {
  testutil::write_file(p("run.cfg"), "k = 3\nepochs = 2\nbatch_size = 16\nhidden = 10\nquiet = true\nseed = 3\n");
  const Result r = cli_run({"train", "--config", p("run.cfg"), "--corpus", corpus_, "--epochs", "4", "--out", p("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_lines(p("c/loss_trace.csv")).size(), 5u);
  const Result flags = cli_run({"train", "--corpus", corpus_, "--k", "3", "--epochs", "4", "--batch-size", "16",
                                "--hidden", "10", "--seed", "3", "--quiet", "--out", p("f")});
  ASSERT_EQ(flags.code, 0) << flags.err;
  EXPECT_EQ(testutil::read_file(p("c/model.ckpt")), testutil::read_file(p("f/model.ckpt")));

  testutil::write_file(p("bad.cfg"), "k = 3\ncolour = blue\n");
  const Result bad = cli_run({"train", "--config", p("bad.cfg"), "--corpus", corpus_, "--out", p("bad")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("colour"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("bad")));
}

// ---- builds ---------------------------------------------------------------------------

TEST_F(CliTest, BaselineMatchesAuxFreeBuild) {
  for (bool with_cache : {false, true}) {
    std::string flags = " train --corpus " + corpus_ + " --k 3 --epochs 4 --batch-size 16 --hidden 10 --seed 5" +
                        " --aux none --quiet";
    if (with_cache) flags += " --vocab " + vocab_ + " --npmi " + npmi_;
    const std::string tag = with_cache ? "c" : "p";
    ASSERT_EQ(shell(std::string(TOPICAUX_CLI_PATH) + flags + " --out " + p("full" + tag)), 0);
    ASSERT_EQ(shell(std::string(TOPICAUX_CLI_NOAUX_PATH) + flags + " --out " + p("noaux" + tag)), 0);
    EXPECT_EQ(testutil::read_file(p("full" + tag + "/model.ckpt")), testutil::read_file(p("noaux" + tag + "/model.ckpt")));
  }
  // the aux-free build refuses aux runs
  EXPECT_EQ(shell(std::string(TOPICAUX_CLI_NOAUX_PATH) + " train --corpus " + corpus_ + " --vocab " + vocab_ +
                  " --npmi " + npmi_ + " --k 3 --aux wd --top-n 5 --out " + p("x")),
            1);
}
