#include "wprox/harness/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "wprox/harness/format.hpp"

namespace wprox::harness {
namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

constexpr unsigned bit(ExperimentKind k) { return 1u << static_cast<unsigned>(k); }
constexpr unsigned kGauss = bit(ExperimentKind::kGaussian);
constexpr unsigned kRuns = bit(ExperimentKind::kMfldProx) | bit(ExperimentKind::kMfldGd) |
                           bit(ExperimentKind::kSweep) | bit(ExperimentKind::kCompare);
constexpr unsigned kProx =
    bit(ExperimentKind::kMfldProx) | bit(ExperimentKind::kSweep) | bit(ExperimentKind::kCompare);
constexpr unsigned kMfld = kRuns | bit(ExperimentKind::kReference);
constexpr unsigned kAll = kGauss | kMfld;

struct Entry {
  std::string key;
  unsigned kinds;
  Setter set;
  Getter get;
};

double as_double(const std::string& key, const std::string& v) {
  const auto d = parse_double(v);
  if (!d) throw ConfigError(key, "expected a real number, got '" + v + "'");
  return *d;
}

template <typename Int>
Int as_integer(const std::string& key, const std::string& v) {
  const auto i = parse_integer<Int>(v);
  if (!i) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return *i;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

template <typename T>
Entry real_entry(std::string key, unsigned kinds, T ExperimentConfig::*outer, double T::*field) {
  return {key, kinds,
          [key, outer, field](ExperimentConfig& c, const std::string& v) {
            c.*outer.*field = as_double(key, v);
          },
          [outer, field](const ExperimentConfig& c) { return format_double(c.*outer.*field); }};
}

template <typename T, typename Int>
Entry int_entry(std::string key, unsigned kinds, T ExperimentConfig::*outer, Int T::*field) {
  return {key, kinds,
          [key, outer, field](ExperimentConfig& c, const std::string& v) {
            c.*outer.*field = as_integer<Int>(key, v);
          },
          [outer, field](const ExperimentConfig& c) { return std::to_string(c.*outer.*field); }};
}

const std::vector<Entry>& registry() {
  using EC = ExperimentConfig;
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back({"step_xi", kGauss | kRuns,
                 [](EC& c, const std::string& v) {
                   const double x = as_double("step_xi", v);
                   if (c.kind == ExperimentKind::kGaussian)
                     c.gaussian.step_xi = x;
                   else
                     c.mfld.step_xi = x;
                 },
                 [](const EC& c) {
                   return format_double(c.kind == ExperimentKind::kGaussian ? c.gaussian.step_xi
                                                                            : c.mfld.step_xi);
                 }});
    // Gaussian
    e.push_back(int_entry("iterations", kGauss, &EC::gaussian,
                          &GaussianProxConfig<double>::iterations));
    e.push_back({"init_mean", kGauss,
                 [](EC& c, const std::string& v) { c.gaussian.init.mean = as_double("init_mean", v); },
                 [](const EC& c) { return format_double(c.gaussian.init.mean); }});
    e.push_back({"init_variance", kGauss,
                 [](EC& c, const std::string& v) {
                   const double var = as_double("init_variance", v);
                   if (!(var > 0)) throw ConfigError("init_variance", "must be > 0");
                   c.gaussian.init.stddev = std::sqrt(var);
                 },
                 [](const EC& c) { return format_double(c.gaussian.init.variance()); }});
    e.push_back(real_entry("mu", kGauss, &EC::gaussian, &GaussianProxConfig<double>::mu));
    e.push_back({"histogram_particles", kGauss,
                 [](EC& c, const std::string& v) {
                   c.histogram_particles = as_integer<Eigen::Index>("histogram_particles", v);
                 },
                 [](const EC& c) { return std::to_string(c.histogram_particles); }});
    e.push_back({"seed", kGauss,
                 [](EC& c, const std::string& v) {
                   c.histogram_seed = as_integer<std::uint64_t>("seed", v);
                 },
                 [](const EC& c) { return std::to_string(c.histogram_seed); }});
    // Mean-field data and objective
    e.push_back(int_entry("dim", kMfld, &EC::mfld, &MfldRunConfig::dim));
    e.push_back(int_entry("samples", kMfld, &EC::mfld, &MfldRunConfig::samples));
    e.push_back({"lambda", kMfld,
                 [](EC& c, const std::string& v) { c.mfld.spec.lambda = as_double("lambda", v); },
                 [](const EC& c) { return format_double(c.mfld.spec.lambda); }});
    e.push_back({"tau", kMfld,
                 [](EC& c, const std::string& v) { c.mfld.spec.tau = as_double("tau", v); },
                 [](const EC& c) { return format_double(c.mfld.spec.tau); }});
    e.push_back(int_entry("data_seed", kMfld, &EC::mfld, &MfldRunConfig::data_seed));
    e.push_back(int_entry("weight_seed", kMfld, &EC::mfld, &MfldRunConfig::weight_seed));
    e.push_back(int_entry("noise_seed", kMfld, &EC::mfld, &MfldRunConfig::noise_seed));
    // Runs
    e.push_back(int_entry("particles", kRuns, &EC::mfld, &MfldRunConfig::particles));
    e.push_back(int_entry("outer_iterations", kRuns, &EC::mfld, &MfldRunConfig::outer_iterations));
    e.push_back({"repetitions", kRuns,
                 [](EC& c, const std::string& v) { c.repetitions = as_integer<int>("repetitions", v); },
                 [](const EC& c) { return std::to_string(c.repetitions); }});
    e.push_back({"use_reference", kRuns,
                 [](EC& c, const std::string& v) { c.use_reference = as_bool("use_reference", v); },
                 [](const EC& c) { return std::string(c.use_reference ? "true" : "false"); }});
    e.push_back({"track_entropy", kRuns,
                 [](EC& c, const std::string& v) {
                   c.mfld.track_entropy = as_bool("track_entropy", v);
                 },
                 [](const EC& c) { return std::string(c.mfld.track_entropy ? "true" : "false"); }});
    // Proximal inner fit
    e.push_back({"inner_lr", kProx,
                 [](EC& c, const std::string& v) { c.mfld.inner.lr = as_double("inner_lr", v); },
                 [](const EC& c) { return format_double(c.mfld.inner.lr); }});
    e.push_back({"inner_iters", kProx,
                 [](EC& c, const std::string& v) { c.mfld.inner.iters = as_integer<int>("inner_iters", v); },
                 [](const EC& c) { return std::to_string(c.mfld.inner.iters); }});
    e.push_back({"inner_batch", kProx,
                 [](EC& c, const std::string& v) {
                   c.mfld.inner.batch = as_integer<Eigen::Index>("inner_batch", v);
                 },
                 [](const EC& c) { return std::to_string(c.mfld.inner.batch); }});
    e.push_back({"flow_blocks", kProx,
                 [](EC& c, const std::string& v) { c.mfld.inner.blocks = as_integer<int>("flow_blocks", v); },
                 [](const EC& c) { return std::to_string(c.mfld.inner.blocks); }});
    e.push_back({"flow_hidden", kProx,
                 [](EC& c, const std::string& v) {
                   c.mfld.inner.hidden = as_integer<Eigen::Index>("flow_hidden", v);
                 },
                 [](const EC& c) { return std::to_string(c.mfld.inner.hidden); }});
    e.push_back({"flow_init_scale", kProx,
                 [](EC& c, const std::string& v) {
                   c.mfld.inner.init_scale = as_double("flow_init_scale", v);
                 },
                 [](const EC& c) { return format_double(c.mfld.inner.init_scale); }});
    e.push_back(real_entry("score_bandwidth", kProx, &EC::mfld, &MfldRunConfig::score_bandwidth));
    e.push_back({"track_beta", kProx,
                 [](EC& c, const std::string& v) { c.mfld.track_beta = as_bool("track_beta", v); },
                 [](const EC& c) { return std::string(c.mfld.track_beta ? "true" : "false"); }});
    // Reference cloud
    e.push_back(real_entry("reference_step_xi", kMfld, &EC::reference, &ReferenceConfig::step_xi));
    e.push_back(int_entry("reference_particles", kMfld, &EC::reference, &ReferenceConfig::particles));
    e.push_back(int_entry("reference_max_steps", kMfld, &EC::reference, &ReferenceConfig::max_steps));
    e.push_back(int_entry("reference_window", kMfld, &EC::reference, &ReferenceConfig::window));
    e.push_back(real_entry("reference_tol", kMfld, &EC::reference, &ReferenceConfig::tol));
    e.push_back({"cache_dir", kMfld, [](EC& c, const std::string& v) { c.cache_dir = v; },
                 [](const EC& c) { return quote(c.cache_dir); }});
    // Sweep
    e.push_back({"sweep_particles", bit(ExperimentKind::kSweep),
                 [](EC& c, const std::string& v) {
                   std::vector<Eigen::Index> list;
                   std::string_view rest = trim(v);
                   if (!rest.empty() && rest.front() == '[' && rest.back() == ']')
                     rest = trim(rest.substr(1, rest.size() - 2));
                   while (!rest.empty()) {
                     const auto comma = rest.find(',');
                     const std::string item(trim(rest.substr(0, comma)));
                     list.push_back(as_integer<Eigen::Index>("sweep_particles", item));
                     if (comma == std::string_view::npos) break;
                     rest = rest.substr(comma + 1);
                   }
                   c.sweep_particles = std::move(list);
                 },
                 [](const EC& c) {
                   std::string s = "[";
                   for (std::size_t i = 0; i < c.sweep_particles.size(); ++i)
                     s += (i ? ", " : "") + std::to_string(c.sweep_particles[i]);
                   return s + "]";
                 }});
    e.push_back({"output_dir", kAll, [](EC& c, const std::string& v) { c.output_dir = v; },
                 [](const EC& c) { return quote(c.output_dir); }});
    return e;
  }();
  return entries;
}

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : registry())
    if (e.key == key) return &e;
  return nullptr;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& reason)
    : std::runtime_error(field.empty() ? reason : field + ": " + reason), field_(std::move(field)) {}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kGaussian: return "gaussian";
    case ExperimentKind::kMfldProx: return "mfld-prox";
    case ExperimentKind::kMfldGd: return "mfld-gd";
    case ExperimentKind::kReference: return "reference";
    case ExperimentKind::kSweep: return "sweep";
    case ExperimentKind::kCompare: return "compare";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kGaussian, ExperimentKind::kMfldProx, ExperimentKind::kMfldGd,
                 ExperimentKind::kReference, ExperimentKind::kSweep, ExperimentKind::kCompare})
    if (to_string(k) == name) return k;
  throw ConfigError("kind", "unknown experiment kind '" + name + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  return cfg;
}

std::vector<std::string> allowed_keys(ExperimentKind kind) {
  std::vector<std::string> keys{"kind"};
  for (const Entry& e : registry())
    if (e.kinds & bit(kind)) keys.push_back(e.key);
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = unquote(trim(value));
  if (key == "kind") {
    if (parse_kind(v) != cfg.kind)
      throw ConfigError("kind", "config is for '" + v + "' but subcommand is '" +
                                    to_string(cfg.kind) + "'");
    return;
  }
  const Entry* e = find_entry(key);
  if (!e || !(e->kinds & bit(cfg.kind)))
    throw ConfigError(key, "unknown key for experiment '" + to_string(cfg.kind) + "'");
  e->set(cfg, v);
}

ExperimentConfig parse_config_text(ExperimentKind kind, const std::string& text) {
  ExperimentConfig cfg = default_config(kind);
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    // '#' outside quotes starts a comment
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '"') quoted = !quoted;
      if (body[i] == '#' && !quoted) {
        body = body.substr(0, i);
        break;
      }
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    apply_setting(cfg, key, std::string(body.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(ExperimentKind kind, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(kind, ss.str());
}

void validate(const ExperimentConfig& cfg) {
  auto check = [](bool ok, const char* field, const char* reason) {
    if (!ok) throw ConfigError(field, reason);
  };
  if (cfg.kind == ExperimentKind::kGaussian) {
    check(cfg.gaussian.step_xi > 0, "step_xi", "must be > 0");
    check(cfg.gaussian.iterations >= 1, "iterations", "must be >= 1");
    check(cfg.gaussian.init.valid(), "init_variance", "must be > 0");
    check(std::isfinite(cfg.gaussian.init.mean), "init_mean", "must be finite");
    check(cfg.gaussian.mu > 0, "mu", "must be > 0");
    check(cfg.histogram_particles >= 1, "histogram_particles", "must be >= 1");
  } else {
    const MfldRunConfig& m = cfg.mfld;
    check(m.dim >= 1, "dim", "must be >= 1");
    check(m.samples >= 1, "samples", "must be >= 1");
    check(m.spec.lambda >= 0, "lambda", "must be >= 0");
    check(m.spec.tau >= 0, "tau", "must be >= 0");
    check(m.step_xi > 0, "step_xi", "must be > 0");
    check(m.particles >= 2, "particles", "must be >= 2");
    check(m.outer_iterations >= 0, "outer_iterations", "must be >= 0");
    check(cfg.repetitions >= 1, "repetitions", "must be >= 1");
    check(m.inner.lr > 0, "inner_lr", "must be > 0");
    check(m.inner.iters >= 1, "inner_iters", "must be >= 1");
    check(m.inner.batch >= 0, "inner_batch", "must be >= 0");
    check(m.inner.blocks >= 1, "flow_blocks", "must be >= 1");
    check(m.inner.hidden >= 1, "flow_hidden", "must be >= 1");
    check(m.inner.init_scale >= 0, "flow_init_scale", "must be >= 0");
    check(m.score_bandwidth > 0, "score_bandwidth", "must be > 0");
    check(cfg.reference.step_xi > 0, "reference_step_xi", "must be > 0");
    check(cfg.reference.particles >= 2, "reference_particles", "must be >= 2");
    check(cfg.reference.max_steps >= 1, "reference_max_steps", "must be >= 1");
    check(cfg.reference.window >= 1, "reference_window", "must be >= 1");
    check(cfg.reference.tol >= 0, "reference_tol", "must be >= 0");
    check(!cfg.sweep_particles.empty(), "sweep_particles", "must not be empty");
    for (Eigen::Index p : cfg.sweep_particles) check(p >= 2, "sweep_particles", "entries must be >= 2");
  }
  check(!cfg.output_dir.empty(), "output_dir", "must not be empty");
}

std::string resolved_text(const ExperimentConfig& cfg) {
  std::string out = "kind = " + quote(to_string(cfg.kind)) + "\n";
  if (cfg.kind != ExperimentKind::kGaussian) {
    out +=
        "# loss: l(f, y) = (f - y)^2 / 2\n"
        "# entropy columns: estimate of int rho log rho (negative differential entropy)\n";
  }
  for (const Entry& e : registry())
    if (e.kinds & bit(cfg.kind)) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

}  // namespace wprox::harness
