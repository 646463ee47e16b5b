#include "topicaux/cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "topicaux/common/error.hpp"
#include "topicaux/common/json_writer.hpp"
#include "topicaux/common/text.hpp"
#include "topicaux/corpus/cooccurrence.hpp"
#include "topicaux/corpus/corpus.hpp"
#include "topicaux/corpus/embeddings.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/eval/report.hpp"
#include "topicaux/ntm/checkpoint.hpp"
#include "topicaux/ntm/topics.hpp"
#include "topicaux/ntm/trainer.hpp"

namespace topicaux::cli {

namespace fs = std::filesystem;

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path.string() + ":" + std::to_string(ln) + ": expected key=value");
    std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(ln) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(path.string() + ":" + std::to_string(ln) + ": key '" + key + "' given twice");
  }
  return kv;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view spec) {
  const auto bad = [&] { return ConfigError("bad seed list '" + std::string(spec) + "' (use 3, 0..9 or 1,4,7)"); };
  std::vector<std::uint64_t> seeds;
  if (const auto dots = spec.find(".."); dots != std::string_view::npos) {
    const auto lo = text::parse_u64(text::trim(spec.substr(0, dots)));
    const auto hi = text::parse_u64(text::trim(spec.substr(dots + 2)));
    if (!lo || !hi || *hi < *lo || *hi - *lo > 10000) throw bad();
    for (std::uint64_t s = *lo; s <= *hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto piece = text::trim(spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start));
    const auto v = text::parse_u64(piece);
    if (!v) throw bad();
    if (std::find(seeds.begin(), seeds.end(), *v) != seeds.end()) throw bad();
    seeds.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return seeds;
}

namespace {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

// Values from a config file fill every option the command line left unset.
void apply_config(CLI::App* sub, const std::string& config_file) {
  if (config_file.empty()) return;
  for (const auto& [key, value] : read_config_file(config_file)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw ConfigError("unknown config key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0 && value != "true" && value != "false")
      throw ConfigError("config key '" + key + "' expects true or false");
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

void add_model_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--corpus", c.corpus, "One document per line, whitespace-separated tokens");
  sub->add_option("--vocab", c.vocab, "Fixed vocabulary, one token per line (required with --npmi)");
  sub->add_option("--npmi,--cooc", c.npmi, "NPMI cache written by build-cooc");
  sub->add_option("--doc-embeddings", c.doc_embeddings, "Per-document embeddings for embedding/concat input");
  sub->add_option("--min-df", c.min_df, "Minimum document frequency when building the vocabulary");
  sub->add_option("--max-vocab", c.max_vocab, "Keep the most frequent tokens only (0 = all)");
  sub->add_option("--k", c.model.num_topics, "Number of topics");
  sub->add_option("--hidden", c.model.hidden, "Encoder hidden units");
  sub->add_option("--input-mode", c.input_mode, "bow, embedding or concat");
  sub->add_option("--embed-dim", c.model.embed_dim, "Document embedding size (default: from the file)");
  sub->add_option("--dropout", c.model.dropout);
  sub->add_option("--epochs", c.model.epochs);
  sub->add_option("--batch-size", c.model.batch_size);
  sub->add_option("--lr", c.model.lr);
  sub->add_option("--seed", c.model.seed);
  sub->add_option("--aux", c.aux, "Auxiliary loss: none, wc or wd");
  sub->add_option("--top-n", c.aux_config.top_n, "Top words used for the aux masks");
  sub->add_option("--lambda-d", c.aux_config.lambda_d, "Diversity balance in [0.5, 1]");
  sub->add_option("--lambda-a", c.aux_config.lambda_a_max, "Aux loss scale after warm-up");
  sub->add_option("--warmup", c.aux_config.warmup_epochs, "Epochs of linear aux warm-up");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_flag("--quiet", c.quiet, "No per-epoch progress");
}

void add_eval_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--word-vectors", c.word_vectors, "Pretrained word vectors for WE (optional)");
  sub->add_option("--rbo-p", c.rbo_p, "RBO persistence");
  sub->add_option("--top", c.top_words, "Top words per topic");
}

void validate_eval_flags(const RunConfig& c) {
  if (!(c.rbo_p > 0.0 && c.rbo_p < 1.0)) throw ConfigError("--rbo-p must lie in (0, 1)");
  if (c.top_words < 2) throw ConfigError("--top must be at least 2");
}

std::optional<auxloss::AuxConfig> parse_aux(const RunConfig& c) {
  if (c.aux == "none") return std::nullopt;
  auxloss::AuxConfig a = c.aux_config;
  a.mode = auxloss::parse_weight_mode(c.aux);
  return a;
}

// Flag-only checks; nothing is read before this passes.
void validate_train_flags(RunConfig& c) {
  if (c.corpus.empty()) throw ConfigError("--corpus is required");
  if (c.out.empty()) throw ConfigError("--out is required");
  if (!c.resume.empty()) return;
  if (c.model.num_topics == 0) throw ConfigError("--k is required");
  c.model.input_mode = ntm::parse_input_mode(c.input_mode);
  if (c.model.input_mode != ntm::InputMode::bow && c.doc_embeddings.empty())
    throw ConfigError("--input-mode " + c.input_mode + " needs --doc-embeddings");
  if (c.model.input_mode == ntm::InputMode::bow && !c.doc_embeddings.empty())
    throw ConfigError("--doc-embeddings given but --input-mode is bow");
  if (c.min_df < 1) throw ConfigError("--min-df must be >= 1");
  const auto aux = parse_aux(c);
  if (aux) {
    if (c.npmi.empty()) throw ConfigError("--aux " + c.aux + " needs --npmi");
    aux->validate(std::numeric_limits<std::size_t>::max());
  }
  if (!c.npmi.empty() && c.vocab.empty()) throw ConfigError("--npmi needs the matching --vocab");
  ntm::ModelConfig probe = c.model;
  probe.vocab_size = 2;
  if (probe.input_mode != ntm::InputMode::bow && probe.embed_dim == 0) probe.embed_dim = 1;
  probe.validate();
}

struct TrainInputs {
  corpus::LoadedCorpus corpus;
  std::optional<corpus::NpmiMatrix> npmi;
  std::optional<corpus::DocEmbeddings> embeddings;
};

TrainInputs load_train_inputs(const RunConfig& c, const std::vector<std::string>* fixed_vocab, bool need_npmi,
                              ntm::ModelConfig& model) {
  TrainInputs in;
  if (fixed_vocab != nullptr) {
    in.corpus = corpus::load_corpus(c.corpus, corpus::Vocabulary(*fixed_vocab));
  } else if (!c.vocab.empty()) {
    in.corpus = corpus::load_corpus(c.corpus, corpus::load_vocabulary(c.vocab));
  } else {
    corpus::CorpusOptions opts;
    opts.min_df = c.min_df;
    if (c.max_vocab > 0) opts.max_vocab = c.max_vocab;
    in.corpus = corpus::load_corpus(c.corpus, opts);
  }
  const std::size_t V = in.corpus.vocab.size();
  if (fixed_vocab == nullptr) model.vocab_size = V;
  if (need_npmi) in.npmi = corpus::load_npmi(c.npmi, V);
  if (model.input_mode != ntm::InputMode::bow) {
    auto raw = corpus::load_doc_embeddings(c.doc_embeddings);
    in.embeddings = corpus::align_doc_embeddings(std::move(raw), in.corpus.bow.num_docs(), in.corpus.source_lines,
                                                 in.corpus.dropped_lines);
    if (model.embed_dim == 0) model.embed_dim = in.embeddings->dim;
  }
  return in;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_trace_csv(const fs::path& path, const std::vector<ntm::EpochStats>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,elbo,aux,lambda_a\n";
  for (const auto& t : trace) out << t.epoch << ',' << fmt_g(t.elbo) << ',' << fmt_g(t.aux) << ',' << fmt_g(t.lambda_a) << '\n';
  if (!out) throw IoError("error while writing " + path.string());
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << s;
  if (!out) throw IoError("error while writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

ntm::Checkpoint train_to_dir(ntm::Trainer& trainer, const fs::path& dir, bool quiet, Io io) {
  const std::size_t total = trainer.config().epochs;
  trainer.fit([&](const ntm::EpochStats& s) {
    if (quiet) return;
    io.err << "epoch " << (s.epoch + 1) << "/" << total << "  elbo " << fmt_g(s.elbo) << "  aux " << fmt_g(s.aux)
           << "  lambda_a " << fmt_g(s.lambda_a) << '\n';
  });
  make_dir(dir);
  ntm::Checkpoint ckpt = trainer.checkpoint();
  ntm::save_checkpoint(dir / "model.ckpt", ckpt);
  write_trace_csv(dir / "loss_trace.csv", ckpt.trace);
  return ckpt;
}

int cmd_build_cooc(const RunConfig& c, Io io) {
  if (c.corpus.empty()) throw ConfigError("--corpus is required");
  if (c.out.empty()) throw ConfigError("--out is required");
  if (c.window < 1) throw ConfigError("--window must be >= 1");
  if (c.min_df < 1) throw ConfigError("--min-df must be >= 1");
  if (c.threads < 1) throw ConfigError("--threads must be >= 1");

  corpus::LoadedCorpus lc;
  if (!c.vocab.empty()) {
    lc = corpus::load_corpus(c.corpus, corpus::load_vocabulary(c.vocab));
  } else {
    corpus::CorpusOptions opts;
    opts.min_df = c.min_df;
    if (c.max_vocab > 0) opts.max_vocab = c.max_vocab;
    lc = corpus::load_corpus(c.corpus, opts);
  }
  const std::size_t V = lc.vocab.size();
  const corpus::CoocCounts counts = corpus::count_cooccurrences(lc.sequences, V, c.window, c.threads);
  const corpus::NpmiMatrix npmi = corpus::npmi_matrix(counts);

  const fs::path dir(c.out);
  make_dir(dir);
  if (c.vocab.empty()) corpus::save_vocabulary(dir / "vocab.txt", lc.vocab);
  corpus::save_npmi(dir / "npmi.bin", npmi);

  io.out << "V=" << V << " docs=" << lc.bow.num_docs() << " dropped_docs=" << lc.dropped_lines.size()
         << " window=" << c.window << " windows=" << counts.window_count
         << " nonzero_pairs=" << counts.pair_windows.size() << '\n';
  return kOk;
}

int cmd_train(RunConfig& c, bool epochs_given, Io io) {
  validate_train_flags(c);
  if (!c.resume.empty()) {
    ntm::Checkpoint ckpt = ntm::load_checkpoint(c.resume);
    if (ckpt.vocabulary.empty()) throw FormatError("checkpoint has no vocabulary; cannot resume");
    if (epochs_given) ckpt.config.epochs = c.model.epochs;
    if (ckpt.aux && c.npmi.empty()) throw ConfigError("resuming an aux run needs --npmi");
    if (ckpt.config.input_mode != ntm::InputMode::bow && c.doc_embeddings.empty())
      throw ConfigError("resuming needs --doc-embeddings");
    ntm::ModelConfig model = ckpt.config;
    RunConfig rc = c;
    const TrainInputs in = load_train_inputs(rc, &ckpt.vocabulary, ckpt.aux.has_value(), model);
    ntm::Trainer trainer(std::move(ckpt), {&in.corpus.bow, in.embeddings ? &*in.embeddings : nullptr},
                         in.npmi ? &*in.npmi : nullptr);
    train_to_dir(trainer, c.out, c.quiet, io);
    return kOk;
  }

  const auto aux = parse_aux(c);
  ntm::ModelConfig model = c.model;
  const TrainInputs in = load_train_inputs(c, nullptr, aux.has_value(), model);
  ntm::Trainer trainer(model, aux, {&in.corpus.bow, in.embeddings ? &*in.embeddings : nullptr},
                       in.npmi ? &*in.npmi : nullptr);
  trainer.set_vocabulary(in.corpus.vocab.words());
  if (!c.quiet)
    io.err << "training K=" << model.num_topics << " V=" << model.vocab_size << " docs=" << in.corpus.bow.num_docs()
           << " aux=" << c.aux << '\n';
  train_to_dir(trainer, c.out, c.quiet, io);
  return kOk;
}

std::string format_topics(const ntm::Checkpoint& ckpt, std::size_t top) {
  const ntm::TopicSet topics = ntm::extract_topics(ckpt.params.beta.value, top);
  std::string s;
  char buf[64];
  for (std::size_t k = 0; k < topics.size(); ++k) {
    s += "topic " + std::to_string(k) + ":";
    for (const auto& tw : topics[k]) {
      std::snprintf(buf, sizeof buf, "%.9f", tw.prob);
      s += ' ';
      s += ckpt.vocabulary.empty() ? std::to_string(tw.word) : ckpt.vocabulary[tw.word];
      s += ':';
      s += buf;
    }
    s += '\n';
  }
  return s;
}

int cmd_topics(const RunConfig& c, Io io) {
  if (c.checkpoints.size() != 1) throw ConfigError("--ckpt is required (exactly one)");
  if (c.top_words < 1) throw ConfigError("--top must be >= 1");
  const ntm::Checkpoint ckpt = ntm::load_checkpoint(c.checkpoints.front());
  if (c.top_words > ckpt.config.vocab_size)
    throw ConfigError("--top " + std::to_string(c.top_words) + " exceeds V=" + std::to_string(ckpt.config.vocab_size));
  const std::string table = format_topics(ckpt, c.top_words);
  io.out << table;
  if (!c.out.empty()) write_text(c.out, table);
  return kOk;
}

std::string run_json(const std::string& label, const eval::EvalReport& r) {
  json::Writer w;
  w.field("run", json::quote(label))
      .field("npmi", json::fixed(r.npmi))
      .field("we", json::fixed(r.we))
      .field("tu", json::fixed(r.tu))
      .field("irbo", json::fixed(r.irbo));
  return w.inline_object();
}

std::string summary_json(const std::vector<std::string>& labels, const std::vector<eval::EvalReport>& reports) {
  const eval::EvalReport mean = eval::mean_report(reports);
  json::Writer runs(2);
  for (std::size_t i = 0; i < reports.size(); ++i) runs.item(run_json(labels[i], reports[i]));
  json::Writer m(2);
  m.field("npmi", json::fixed(mean.npmi))
      .field("we", json::fixed(mean.we))
      .field("tu", json::fixed(mean.tu))
      .field("irbo", json::fixed(mean.irbo));
  json::Writer config(2);
  config.field("K", std::to_string(mean.num_topics))
      .field("top_words", std::to_string(mean.options.top_words))
      .field("rbo_p", json::fixed(mean.options.rbo_p))
      .field("runs", std::to_string(reports.size()));
  json::Writer doc;
  doc.field("mean", m.object()).field("runs", runs.array()).field("config", config.object());
  return doc.object() + "\n";
}

int cmd_eval(const RunConfig& c, Io io) {
  if (c.checkpoints.empty()) throw ConfigError("--ckpt is required");
  if (c.npmi.empty()) throw ConfigError("--npmi (--cooc) is required");
  validate_eval_flags(c);

  std::optional<corpus::WordVectors> vectors;
  if (!c.word_vectors.empty()) vectors = corpus::load_word_vectors(c.word_vectors);
  std::optional<corpus::NpmiMatrix> npmi;
  std::vector<eval::EvalReport> reports;
  for (const auto& path : c.checkpoints) {
    const ntm::Checkpoint ckpt = ntm::load_checkpoint(path);
    if (!npmi) npmi = corpus::load_npmi(c.npmi);
    reports.push_back(eval::evaluate_all(ckpt, *npmi, vectors ? &*vectors : nullptr, {c.top_words, c.rbo_p}));
  }
  const std::string doc = reports.size() == 1 ? eval::to_json(reports.front()) : summary_json(c.checkpoints, reports);
  io.out << doc;
  if (!c.out.empty()) write_text(c.out, doc);
  return kOk;
}

int cmd_sweep(RunConfig& c, Io io) {
  validate_train_flags(c);
  validate_eval_flags(c);
  if (!c.resume.empty()) throw ConfigError("sweep does not support --resume");
  if (c.npmi.empty()) throw ConfigError("sweep needs --npmi for evaluation");
  const std::vector<std::uint64_t> seeds = parse_seed_list(c.seeds.empty() ? "0..9" : c.seeds);

  const auto aux = parse_aux(c);
  ntm::ModelConfig model = c.model;
  const TrainInputs in = load_train_inputs(c, nullptr, true, model);
  std::optional<corpus::WordVectors> vectors;
  if (!c.word_vectors.empty()) vectors = corpus::load_word_vectors(c.word_vectors);

  std::vector<std::string> labels;
  std::vector<eval::EvalReport> reports;
  for (const auto seed : seeds) {
    model.seed = seed;
    ntm::Trainer trainer(model, aux, {&in.corpus.bow, in.embeddings ? &*in.embeddings : nullptr},
                         aux ? &*in.npmi : nullptr);
    trainer.set_vocabulary(in.corpus.vocab.words());
    if (!c.quiet) io.err << "seed " << seed << '\n';
    const fs::path dir = fs::path(c.out) / ("seed_" + std::to_string(seed));
    const ntm::Checkpoint ckpt = train_to_dir(trainer, dir, c.quiet, io);
    reports.push_back(eval::evaluate_all(ckpt, *in.npmi, vectors ? &*vectors : nullptr, {c.top_words, c.rbo_p}));
    write_text(dir / "report.json", eval::to_json(reports.back()));
    labels.push_back("seed_" + std::to_string(seed));
  }
  const std::string doc = summary_json(labels, reports);
  write_text(fs::path(c.out) / "summary.json", doc);
  io.out << doc;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string config_file;

  CLI::App app{"Neural topic model with a coherence/diversity auxiliary loss", "topicaux"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* build = app.add_subcommand("build-cooc", "Count sliding-window co-occurrences and write the NPMI cache");
  build->add_option("--corpus", c.corpus, "One document per line");
  build->add_option("--vocab", c.vocab, "Fixed vocabulary (otherwise built and written to OUT/vocab.txt)");
  build->add_option("--window", c.window, "Sliding window size");
  build->add_option("--min-df", c.min_df);
  build->add_option("--max-vocab", c.max_vocab, "0 = unlimited");
  build->add_option("--threads", c.threads);
  build->add_option("--out", c.out, "Output directory");
  build->add_option("--config", config_file, "key=value file");

  auto* train = app.add_subcommand("train", "Train a model; writes OUT/model.ckpt and OUT/loss_trace.csv");
  add_model_options(train, c);
  train->add_option("--resume", c.resume, "Continue training from a checkpoint");
  train->add_option("--config", config_file, "key=value file");

  auto* topics = app.add_subcommand("topics", "Print the top words of every topic");
  topics->add_option("--ckpt", c.checkpoints, "Checkpoint")->expected(1);
  topics->add_option("--top", c.top_words, "Words per topic");
  topics->add_option("--out", c.out, "Also write the table to this file");

  auto* ev = app.add_subcommand("eval", "NPMI, WE, TU and I-RBO of one or more checkpoints");
  ev->add_option("--ckpt", c.checkpoints, "Checkpoint(s); several are averaged")->expected(1, 1000);
  ev->add_option("--npmi,--cooc", c.npmi, "NPMI cache");
  add_eval_options(ev, c);
  ev->add_option("--out", c.out, "Write the JSON report here");
  ev->add_option("--config", config_file, "key=value file");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over several seeds; reports the mean");
  add_model_options(sweep, c);
  add_eval_options(sweep, c);
  sweep->add_option("--seeds", c.seeds, "e.g. 0..9 or 1,2,3 (default 0..9)");
  sweep->add_option("--config", config_file, "key=value file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  const Io io{out, err};
  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config(sub, config_file);
    const bool epochs_given = sub->get_option_no_throw("--epochs") != nullptr && sub->count("--epochs") > 0;
    if (sub == build) return cmd_build_cooc(c, io);
    if (sub == train) return cmd_train(c, epochs_given, io);
    if (sub == topics) return cmd_topics(c, io);
    if (sub == ev) return cmd_eval(c, io);
    return cmd_sweep(c, io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace topicaux::cli
