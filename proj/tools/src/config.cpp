#include "denoise_lab/tools/config.hpp"

#include "denoise_lab/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace denoise_lab::tools {

namespace {

const char* const kExperimentNames[] = {"demo1d", "demo2d", "sweep", "ma",
                                        "moments", "scorematch", "verify"};

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config field '" + field + "' has the wrong type");
  }
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!map.IsMap()) throw ConfigError("config field '" + where + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError("unknown config field '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

Vector vector_field(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError("config field '" + field + "' must be a list");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], field);
  }
  return v;
}

Matrix matrix_field(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() == 0) {
    throw ConfigError("config field '" + field + "' must be a list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(node.size());
  Matrix m(rows, rows);
  for (std::size_t i = 0; i < node.size(); ++i) {
    const Vector row = vector_field(node[i], field);
    if (row.size() != rows) throw ConfigError("config field '" + field + "' must be square");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

std::size_t count_field(const YAML::Node& node, const std::string& field) {
  const auto v = scalar<long long>(node, field);
  if (v < 0) throw ConfigError("config field '" + field + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

SignalSpec parse_signal(const YAML::Node& node) {
  SignalSpec s;
  if (node.IsScalar()) {
    s.kind = node.as<std::string>();
  } else {
    reject_unknown(node, {"kind", "dim", "components"}, "signal");
    if (node["kind"]) s.kind = scalar<std::string>(node["kind"], "signal.kind");
    if (node["dim"]) s.dim = scalar<int>(node["dim"], "signal.dim");
    if (node["components"]) {
      const auto& list = node["components"];
      if (!list.IsSequence()) throw ConfigError("config field 'signal.components' must be a list");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "signal.components[" + std::to_string(k) + "]";
        reject_unknown(list[k], {"weight", "mean", "cov"}, where);
        if (!list[k]["mean"] || !list[k]["cov"]) {
          throw ConfigError("config field '" + where + "' needs mean and cov");
        }
        models::GaussianComponent c;
        c.weight = list[k]["weight"] ? scalar<double>(list[k]["weight"], where + ".weight") : 1.0;
        c.mean = vector_field(list[k]["mean"], where + ".mean");
        c.covariance = matrix_field(list[k]["cov"], where + ".cov");
        s.components.push_back(std::move(c));
      }
      if (!s.components.empty()) s.dim = static_cast<int>(s.components.front().mean.size());
    }
  }
  if (s.kind == "gauss" || s.kind == "mixture2" || s.kind == "square" || s.kind == "torus") {
    s.dim = 2;
  }
  return s;
}

}  // namespace

std::string to_string(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

Experiment experiment_from_string(const std::string& name) {
  for (int i = 0; i < 7; ++i) {
    if (name == kExperimentNames[i]) return static_cast<Experiment>(i);
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds = {"normal", "mixture", "gauss",
                                              "mixture2", "square", "torus"};
  if (!kinds.count(signal.kind)) throw ConfigError("config field 'signal.kind': unknown '" + signal.kind + "'");
  if (signal.kind == "mixture" && signal.components.empty()) {
    throw ConfigError("config field 'signal.components' is required for kind mixture");
  }
  if (signal.dim < 1 || signal.dim > 3) throw ConfigError("config field 'signal.dim' must be 1..3");
  if (experiment == Experiment::Demo1d && signal.dim != 1) {
    throw ConfigError("config field 'signal.dim' must be 1 for demo1d");
  }
  if (experiment == Experiment::Demo2d && signal.dim != 2) {
    throw ConfigError("config field 'signal.dim' must be 2 for demo2d");
  }
  if (noise != "gaussian" && noise != "uniform") {
    throw ConfigError("config field 'noise' must be gaussian or uniform");
  }
  const bool single_eta = experiment == Experiment::Demo1d || experiment == Experiment::Demo2d ||
                          experiment == Experiment::Scorematch;
  if (single_eta && !(eta > 0.0)) throw ConfigError("config field 'eta' must be positive");
  for (double e : etas) {
    if (!(e >= 0.0)) throw ConfigError("config field 'etas' must be nonnegative");
  }
  if (experiment == Experiment::Sweep && etas.empty()) throw ConfigError("config field 'etas' is empty");
  if ((experiment == Experiment::Ma || experiment == Experiment::Moments) && etas.size() < 4) {
    throw ConfigError("config field 'etas' needs at least four values for slope fits");
  }
  if (second_moment != "auto" && second_moment != "closed_form" && second_moment != "monte_carlo") {
    throw ConfigError("config field 'second_moment' must be auto, closed_form or monte_carlo");
  }
  if (n_test == 0) throw ConfigError("config field 'n_test' must be positive");
  if (n_train == 0) throw ConfigError("config field 'n_train' must be positive");
  if (n_mc == 0) throw ConfigError("config field 'n_mc' must be positive");
  if (ma_points < 2) throw ConfigError("config field 'ma_points' must be at least 2");
  if (signal.dim > 1 && n_test > 5000) {
    throw ConfigError("config field 'n_test' must be at most 5000 in more than one dimension");
  }
  if (out_dir.empty()) throw ConfigError("config field 'out_dir' is empty");
  if (bump.center.size() != signal.dim) {
    throw ConfigError("config field 'bump.center' must match the signal dimension");
  }
  if (!(bump.radius > 0.0)) throw ConfigError("config field 'bump.radius' must be positive");
  try {
    train.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config field 'train': ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& yaml_text, std::optional<Experiment> subcommand) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  reject_unknown(root,
                 {"experiment", "signal", "noise", "eta", "etas", "n_train", "n_test", "n_mc",
                  "second_moment", "ma_points", "seed", "out_dir", "train", "bump"},
                 "");
  ExperimentConfig cfg;
  if (root["experiment"]) {
    cfg.experiment = experiment_from_string(scalar<std::string>(root["experiment"], "experiment"));
    if (subcommand && *subcommand != cfg.experiment) {
      throw ConfigError("config field 'experiment' is '" + to_string(cfg.experiment) +
                        "' but the subcommand is '" + to_string(*subcommand) + "'");
    }
  } else if (subcommand) {
    cfg.experiment = *subcommand;
  }
  if (root["signal"]) {
    cfg.signal = parse_signal(root["signal"]);
  } else if (cfg.experiment == Experiment::Demo2d || cfg.experiment == Experiment::Scorematch) {
    cfg.signal = parse_signal(YAML::Load("gauss"));
  }
  if (root["noise"]) cfg.noise = scalar<std::string>(root["noise"], "noise");
  if (root["eta"]) cfg.eta = scalar<double>(root["eta"], "eta");
  if (root["etas"]) {
    const Vector v = vector_field(root["etas"], "etas");
    cfg.etas.assign(v.data(), v.data() + v.size());
  }
  if (root["n_train"]) cfg.n_train = count_field(root["n_train"], "n_train");
  if (root["n_test"]) cfg.n_test = count_field(root["n_test"], "n_test");
  if (root["n_mc"]) cfg.n_mc = count_field(root["n_mc"], "n_mc");
  if (root["second_moment"]) {
    cfg.second_moment = scalar<std::string>(root["second_moment"], "second_moment");
  }
  if (root["ma_points"]) cfg.ma_points = count_field(root["ma_points"], "ma_points");
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["out_dir"]) cfg.out_dir = scalar<std::string>(root["out_dir"], "out_dir");
  if (const auto t = root["train"]) {
    reject_unknown(t, {"lr", "epochs", "batch_size", "width", "blocks"}, "train");
    if (t["lr"]) cfg.train.lr = scalar<double>(t["lr"], "train.lr");
    if (t["epochs"]) cfg.train.epochs = scalar<int>(t["epochs"], "train.epochs");
    if (t["batch_size"]) cfg.train.batch_size = scalar<int>(t["batch_size"], "train.batch_size");
    if (t["width"]) cfg.train.width = scalar<int>(t["width"], "train.width");
    if (t["blocks"]) cfg.train.blocks = scalar<int>(t["blocks"], "train.blocks");
  }
  cfg.bump.center = Vector::Zero(cfg.signal.dim);
  cfg.bump.radius = 2.0;
  if (const auto b = root["bump"]) {
    reject_unknown(b, {"center", "radius", "amplitude"}, "bump");
    if (b["center"]) cfg.bump.center = vector_field(b["center"], "bump.center");
    if (b["radius"]) cfg.bump.radius = scalar<double>(b["radius"], "bump.radius");
    if (b["amplitude"]) cfg.bump.amplitude = scalar<double>(b["amplitude"], "bump.amplitude");
  }
  if (cfg.bump.center.size() != cfg.signal.dim) {
    throw ConfigError("config field 'bump.center' must match the signal dimension");
  }
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<Experiment> subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), subcommand);
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.eta && !o.eta->empty()) {
    cfg.eta = o.eta->front();
    cfg.etas = *o.eta;
  }
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.train.seed = *o.seed;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  cfg.validate();
}

std::string canonical(const ExperimentConfig& cfg) {
  using metrics::format_double;
  std::ostringstream out;
  auto vec = [&](const Vector& v) {
    out << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
    out << ']';
  };
  out << "experiment=" << to_string(cfg.experiment) << '\n';
  out << "signal.kind=" << cfg.signal.kind << "\nsignal.dim=" << cfg.signal.dim << '\n';
  for (const auto& c : cfg.signal.components) {
    out << "component weight=" << format_double(c.weight) << " mean=";
    vec(c.mean);
    out << " cov=";
    vec(c.covariance.reshaped());
    out << '\n';
  }
  out << "noise=" << cfg.noise << "\neta=" << format_double(cfg.eta) << "\netas=";
  vec(Eigen::Map<const Vector>(cfg.etas.data(), static_cast<Eigen::Index>(cfg.etas.size())));
  out << "\nn_train=" << cfg.n_train << "\nn_test=" << cfg.n_test << "\nn_mc=" << cfg.n_mc
      << "\nsecond_moment=" << cfg.second_moment
      << "\nma_points=" << cfg.ma_points << "\nseed=" << cfg.seed << '\n';
  out << "train lr=" << format_double(cfg.train.lr) << " epochs=" << cfg.train.epochs
      << " batch_size=" << cfg.train.batch_size << " width=" << cfg.train.width
      << " blocks=" << cfg.train.blocks << '\n';
  out << "bump center=";
  vec(cfg.bump.center);
  out << " radius=" << format_double(cfg.bump.radius)
      << " amplitude=" << format_double(cfg.bump.amplitude) << '\n';
  return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

models::NoiseModel noise_model(const ExperimentConfig& cfg, int dim) {
  return cfg.noise == "uniform" ? models::NoiseModel::uniform(dim)
                                : models::NoiseModel::gaussian(dim);
}

}  // namespace denoise_lab::tools
