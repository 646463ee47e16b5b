#include "topicaux/ntm/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <string_view>
#include <type_traits>

#include "topicaux/common/binary_io.hpp"
#include "topicaux/common/error.hpp"
#include "topicaux/common/text.hpp"

namespace topicaux::ntm {

namespace {

constexpr std::string_view kMagic = "TOPICAUX-CHECKPOINT 1";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_rng(const num::RngStream& r) { return std::to_string(r.key()) + ":" + std::to_string(r.counter()); }

void write_array(std::ostream& out, const std::string& name, const num::Matrix& m) {
  out << "array " << name << " f64 " << m.rows() << ' ' << m.cols() << '\n';
  binio::write_f64_array(out, m.data());
}

void read_array(std::istream& in, const std::string& name, num::Matrix& m) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("checkpoint: missing array " + name);
  const auto f = text::split_ws(line);
  const std::string expect_rows = std::to_string(m.rows()), expect_cols = std::to_string(m.cols());
  if (f.size() != 5 || f[0] != "array" || f[1] != name || f[2] != "f64")
    throw FormatError("checkpoint: expected array " + name + ", found '" + line + "'");
  if (f[3] != expect_rows || f[4] != expect_cols)
    throw FormatError("checkpoint: array " + name + " has shape " + std::string(f[3]) + "x" + std::string(f[4]) +
                      ", expected " + expect_rows + "x" + expect_cols);
  binio::read_f64_array(in, m.data(), "checkpoint array " + name);
  if (!m.all_finite()) throw FormatError("checkpoint: non-finite values in " + name);
}

template <typename M>
struct NamedMatrix {
  std::string name;
  M* m;
};

// Works for both const and mutable params.
template <typename P>
auto tensors(P& p) {
  using M = std::conditional_t<std::is_const_v<P>, const num::Matrix, num::Matrix>;
  std::vector<NamedMatrix<M>> out;
  for (auto* q : p.trainable()) out.push_back({q->name, &q->value});
  out.push_back({"bn_mu.mean", &p.bn_mu.running_mean});
  out.push_back({"bn_mu.var", &p.bn_mu.running_var});
  out.push_back({"bn_lv.mean", &p.bn_lv.running_mean});
  out.push_back({"bn_lv.var", &p.bn_lv.running_var});
  out.push_back({"bn_dec.mean", &p.bn_dec.running_mean});
  out.push_back({"bn_dec.var", &p.bn_dec.running_var});
  return out;
}

class Header {
 public:
  explicit Header(std::map<std::string, std::string, std::less<>> kv) : kv_(std::move(kv)) {}

  const std::string& str(std::string_view key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw FormatError("checkpoint: missing header key '" + std::string(key) + "'");
    return it->second;
  }
  bool has(std::string_view key) const { return kv_.contains(key); }
  std::uint64_t u64(std::string_view key) const {
    const auto v = text::parse_u64(str(key));
    if (!v) throw FormatError("checkpoint: bad integer for '" + std::string(key) + "'");
    return *v;
  }
  double f64(std::string_view key) const {
    const auto v = text::parse_double(str(key));
    if (!v) throw FormatError("checkpoint: bad number for '" + std::string(key) + "'");
    return *v;
  }
  num::RngStream rng(std::string_view key) const {
    const std::string& s = str(key);
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw FormatError("checkpoint: bad rng state for '" + std::string(key) + "'");
    const auto k = text::parse_u64(std::string_view(s).substr(0, colon));
    const auto c = text::parse_u64(std::string_view(s).substr(colon + 1));
    if (!k || !c) throw FormatError("checkpoint: bad rng state for '" + std::string(key) + "'");
    return num::RngStream::from_state(*k, *c);
  }

 private:
  std::map<std::string, std::string, std::less<>> kv_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.config;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());

  out << kMagic << '\n';
  out << "num_topics=" << c.num_topics << '\n'
      << "vocab_size=" << c.vocab_size << '\n'
      << "hidden=" << c.hidden << '\n'
      << "input_mode=" << to_string(c.input_mode) << '\n'
      << "embed_dim=" << c.embed_dim << '\n'
      << "dropout=" << fmt_double(c.dropout) << '\n'
      << "epochs=" << c.epochs << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "lr=" << fmt_double(c.lr) << '\n'
      << "seed=" << c.seed << '\n';
  if (ckpt.aux) {
    const auto& a = *ckpt.aux;
    out << "aux=" << auxloss::to_string(a.mode) << '\n'
        << "aux_top_n=" << a.top_n << '\n'
        << "aux_lambda_d=" << fmt_double(a.lambda_d) << '\n'
        << "aux_lambda_a=" << fmt_double(a.lambda_a_max) << '\n'
        << "aux_warmup=" << a.warmup_epochs << '\n';
  } else {
    out << "aux=none\n";
  }
  const TrainingState& s = ckpt.state;
  out << "epoch=" << s.epoch << '\n'
      << "adam_step=" << s.adam_step << '\n'
      << "rng_shuffle=" << fmt_rng(s.shuffle) << '\n'
      << "rng_dropout=" << fmt_rng(s.dropout) << '\n'
      << "rng_noise=" << fmt_rng(s.noise) << '\n';
  out << "vocab " << ckpt.vocabulary.size() << '\n';
  for (const auto& w : ckpt.vocabulary) out << w << '\n';
  out << "trace " << ckpt.trace.size() << '\n';
  for (const auto& t : ckpt.trace)
    out << t.epoch << ' ' << fmt_double(t.elbo) << ' ' << fmt_double(t.aux) << ' ' << fmt_double(t.lambda_a) << '\n';
  out << "END\n";

  const ModelParams& params = ckpt.params;
  for (const auto& t : tensors(params)) write_array(out, t.name, *t.m);
  if (s.adam_step > 0) {
    const auto names = params.trainable();
    if (s.adam_m.size() != names.size() || s.adam_v.size() != names.size())
      throw DimensionError("checkpoint: optimizer state does not match the parameter list");
    for (std::size_t k = 0; k < names.size(); ++k) write_array(out, "adam_m." + names[k]->name, s.adam_m[k]);
    for (std::size_t k = 0; k < names.size(); ++k) write_array(out, "adam_v." + names[k]->name, s.adam_v[k]);
  }
  out.flush();
  if (!out) throw IoError("error while writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError(path.string() + " is not a topicaux checkpoint");

  Checkpoint ckpt;
  std::map<std::string, std::string, std::less<>> kv;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "END") {
      ended = true;
      break;
    }
    const auto f = text::split_ws(line);
    if (f.size() == 2 && (f[0] == "vocab" || f[0] == "trace")) {
      const std::string section(f[0]);
      const auto n = text::parse_u64(f[1]);
      if (!n) throw FormatError("checkpoint: bad section length in '" + line + "'");
      for (std::uint64_t i = 0; i < *n; ++i) {
        if (!std::getline(in, line)) throw FormatError("checkpoint: truncated " + section + " section");
        if (section == "vocab") {
          ckpt.vocabulary.push_back(line);
          continue;
        }
        const auto r = text::split_ws(line);
        std::optional<std::uint64_t> ep;
        std::optional<double> a, b, c;
        if (r.size() == 4) {
          ep = text::parse_u64(r[0]);
          a = text::parse_double(r[1]);
          b = text::parse_double(r[2]);
          c = text::parse_double(r[3]);
        }
        if (!ep || !a || !b || !c) throw FormatError("checkpoint: bad trace row '" + line + "'");
        ckpt.trace.push_back({static_cast<std::size_t>(*ep), *a, *b, *c});
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint: bad header line '" + line + "'");
    kv.emplace(line.substr(0, eq), line.substr(eq + 1));
  }
  if (!ended) throw FormatError("checkpoint: header not terminated");

  const Header h(std::move(kv));
  ModelConfig& c = ckpt.config;
  c.num_topics = h.u64("num_topics");
  c.vocab_size = h.u64("vocab_size");
  c.hidden = h.u64("hidden");
  try {
    c.input_mode = parse_input_mode(h.str("input_mode"));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  c.embed_dim = h.u64("embed_dim");
  c.dropout = h.f64("dropout");
  c.epochs = h.u64("epochs");
  c.batch_size = h.u64("batch_size");
  c.lr = h.f64("lr");
  c.seed = h.u64("seed");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: invalid model config: ") + e.what());
  }
  if (!ckpt.vocabulary.empty() && ckpt.vocabulary.size() != c.vocab_size)
    throw FormatError("checkpoint: vocabulary section does not match vocab_size");

  if (h.str("aux") != "none") {
    auxloss::AuxConfig a;
    try {
      a.mode = auxloss::parse_weight_mode(h.str("aux"));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
    a.top_n = h.u64("aux_top_n");
    a.lambda_d = h.f64("aux_lambda_d");
    a.lambda_a_max = h.f64("aux_lambda_a");
    a.warmup_epochs = h.u64("aux_warmup");
    ckpt.aux = a;
  }

  TrainingState& s = ckpt.state;
  s.epoch = h.u64("epoch");
  s.adam_step = h.u64("adam_step");
  s.shuffle = h.rng("rng_shuffle");
  s.dropout = h.rng("rng_dropout");
  s.noise = h.rng("rng_noise");

  // Shapes come from a freshly initialized model; values are overwritten.
  num::RngStream shape_rng;
  ckpt.params = init_params(c, shape_rng);
  for (const auto& t : tensors(ckpt.params)) read_array(in, t.name, *t.m);
  for (num::Parameter* p : ckpt.params.trainable()) p->zero_grad();
  if (s.adam_step > 0) {
    const auto params = ckpt.params.trainable();
    for (const num::Parameter* p : params) {
      s.adam_m.emplace_back(p->value.rows(), p->value.cols());
      read_array(in, "adam_m." + p->name, s.adam_m.back());
    }
    for (const num::Parameter* p : params) {
      s.adam_v.emplace_back(p->value.rows(), p->value.cols());
      read_array(in, "adam_v." + p->name, s.adam_v.back());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes after last array");
  return ckpt;
}

}  // namespace topicaux::ntm
