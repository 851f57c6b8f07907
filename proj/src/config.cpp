#include "kmfl/config.hpp"

#include <fstream>

#include "kmfl/error.hpp"
#include "kmfl/idx.hpp"
#include "kmfl/network.hpp"

namespace kmfl {
namespace {

using nlohmann::json;

template <typename T>
void read(const json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

Scheme parse_scheme(const std::string& name) {
  if (name == "semi_implicit") return Scheme::kSemiImplicitEuler;
  if (name == "euler_maruyama") return Scheme::kEulerMaruyama;
  throw Error(ErrorKind::kConfig, "unknown scheme '" + name + "'");
}

AffineDrift parse_drift(const json& section) {
  AffineDrift out;
  read(section, "rate", out.rate);
  read(section, "mean_coupling", out.mean_coupling);
  read(section, "offset", out.offset);
  return out;
}

ExperimentConfig parse_unchecked(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kConfig, "config root must be an object");
  ExperimentConfig c;
  c.source = doc;

  std::uint64_t seed = 0;
  read(doc, "seed", seed);
  c.dynamics.seed = seed;
  read(doc, "output_dir", c.output_dir);
  read(doc, "repetitions", c.repetitions);
  read(doc, "tail_window", c.tail_window);
  read(doc, "record_every", c.record_every);
  read(doc, "threads", c.threads);
  if (doc.contains("N")) {
    const auto& n = doc.at("N");
    c.n_list = n.is_array() ? n.get<std::vector<Index>>() : std::vector<Index>{n.get<Index>()};
  }

  if (doc.contains("dynamics")) {
    const auto& d = doc.at("dynamics");
    read(d, "alpha", c.dynamics.alpha);
    read(d, "gamma", c.dynamics.gamma);
    read(d, "sigma", c.dynamics.sigma);
    read(d, "lambda", c.dynamics.lambda);
    read(d, "dt", c.dynamics.dt);
    read(d, "T", c.dynamics.horizon);
    if (d.contains("scheme")) c.dynamics.scheme = parse_scheme(d.at("scheme").get<std::string>());
  }
  if (doc.contains("init")) {
    read(doc.at("init"), "m0x_std", c.init.m0x_std);
    read(doc.at("init"), "m0v_std", c.init.m0v_std);
  }
  if (doc.contains("functional")) {
    const auto& f = doc.at("functional");
    read(f, "kind", c.functional.kind);
    read(f, "L", c.functional.threshold);
    read(f, "kappa", c.functional.kappa);
    read(f, "eps", c.functional.eps);
    read(f, "dimension", c.functional.dimension);
    if (f.contains("dataset")) {
      const auto& ds = f.at("dataset");
      auto& spec = c.functional.dataset;
      read(ds, "source", spec.source);
      read(ds, "K", spec.k);
      read(ds, "d_in", spec.d_in);
      read(ds, "images", spec.images);
      read(ds, "labels", spec.labels);
      read(ds, "class_a", spec.class_a);
      read(ds, "class_b", spec.class_b);
      spec.seed = seed;
      read(ds, "seed", spec.seed);
    } else {
      c.functional.dataset.seed = seed;
    }
  }
  if (doc.contains("oracle")) {
    const auto& o = doc.at("oracle");
    read(o, "kappa", c.oracle.kappa);
    read(o, "eps", c.oracle.eps);
    read(o, "dimension", c.oracle.dimension);
    read(o, "checkpoints", c.oracle.checkpoints);
    read(o, "subsample", c.oracle.subsample);
    read(o, "init_mean", c.oracle.init_mean);
    read(o, "init_cov", c.oracle.init_cov);
    read(o, "mean_tolerance_factor", c.oracle.mean_tolerance_factor);
    read(o, "cov_tolerance_factor", c.oracle.cov_tolerance_factor);
  }
  if (doc.contains("coupling")) {
    const auto& k = doc.at("coupling");
    auto& spec = c.coupling;
    read(k, "N", spec.n);
    read(k, "dimension", spec.dimension);
    read(k, "T", spec.horizon);
    read(k, "dt", spec.dt);
    read(k, "sigma", spec.sigma);
    if (k.contains("drift")) spec.drift = parse_drift(k.at("drift"));
    if (k.contains("drift_prime")) spec.drift_prime = parse_drift(k.at("drift_prime"));
    read(k, "M_m", spec.lip_measure);
    read(k, "M_z", spec.lip_space);
    read(k, "delta", spec.delta);
    read(k, "init_std", spec.init_std);
    read(k, "init_shift", spec.init_shift);
    read(k, "record_every", spec.record_every);
  }
  if (doc.contains("mnist")) {
    const auto& m = doc.at("mnist");
    read(m, "images", c.mnist.images);
    read(m, "labels", c.mnist.labels);
    read(m, "class_a", c.mnist.class_a);
    read(m, "class_b", c.mnist.class_b);
    read(m, "max_k", c.mnist.max_k);
  }
  return c;
}

}  // namespace

const char* version() { return KMFL_VERSION; }

GaussianMoments OracleSpec::initial_law() const {
  const Index n = 2 * dimension;
  GaussianMoments law{Vector::Zero(n), DenseMatrix::Identity(n, n), 0.0};
  if (init_mean.empty()) {
    law.mean.head(dimension).setConstant(1.0);
    law.mean.tail(dimension).setConstant(-0.5);
  } else {
    if (static_cast<Index>(init_mean.size()) != n) {
      throw Error(ErrorKind::kConfig, "oracle.init_mean must have length 2*dimension");
    }
    for (Index j = 0; j < n; ++j) law.mean(j) = init_mean[static_cast<std::size_t>(j)];
  }
  if (!init_cov.empty()) {
    if (static_cast<Index>(init_cov.size()) != n) {
      throw Error(ErrorKind::kConfig, "oracle.init_cov must be 2d x 2d");
    }
    for (Index i = 0; i < n; ++i) {
      const auto& row = init_cov[static_cast<std::size_t>(i)];
      if (static_cast<Index>(row.size()) != n) {
        throw Error(ErrorKind::kConfig, "oracle.init_cov must be 2d x 2d");
      }
      for (Index j = 0; j < n; ++j) law.cov(i, j) = row[static_cast<std::size_t>(j)];
    }
  }
  try {
    law.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("oracle initial law: ") + e.what());
  }
  return law;
}

void ExperimentConfig::validate() const {
  try {
    dynamics.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("dynamics: ") + e.what());
  }
  if (n_list.empty()) throw Error(ErrorKind::kConfig, "N list is empty");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) throw Error(ErrorKind::kConfig, "N values must be >= 1");
    if (k > 0 && n_list[k] <= n_list[k - 1]) {
      throw Error(ErrorKind::kConfig, "N list must be strictly increasing");
    }
  }
  if (repetitions < 1) throw Error(ErrorKind::kConfig, "repetitions must be >= 1");
  if (record_every < 1) throw Error(ErrorKind::kConfig, "record_every must be >= 1");
  if (!(init.m0x_std >= 0.0) || !(init.m0v_std >= 0.0)) {
    throw Error(ErrorKind::kConfig, "initial standard deviations must be nonnegative");
  }
  const auto& kind = functional.kind;
  if (kind != "two_layer_net" && kind != "curie_weiss" && kind != "zero") {
    throw Error(ErrorKind::kConfig, "unknown functional kind '" + kind + "'");
  }
  if (kind == "two_layer_net") {
    if (!(functional.threshold > 0.0)) throw Error(ErrorKind::kConfig, "L must be positive");
    const auto& src = functional.dataset.source;
    if (src != "synthetic" && src != "mnist") {
      throw Error(ErrorKind::kConfig, "unknown dataset source '" + src + "'");
    }
    if (src == "mnist" && (functional.dataset.images.empty() || functional.dataset.labels.empty())) {
      throw Error(ErrorKind::kConfig, "mnist dataset needs images and labels paths");
    }
  }
  if (functional.dimension < 1) throw Error(ErrorKind::kConfig, "dimension must be >= 1");
  if (oracle.checkpoints < 1 || oracle.subsample < 1 || oracle.dimension < 1) {
    throw Error(ErrorKind::kConfig, "oracle checkpoints, subsample and dimension must be >= 1");
  }
  if (coupling.n < 1 || coupling.dimension < 1 || !(coupling.dt > 0.0) ||
      !(coupling.horizon >= coupling.dt) || coupling.record_every < 1) {
    throw Error(ErrorKind::kConfig, "invalid coupling section");
  }
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig c;
  try {
    c = parse_unchecked(doc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

Dataset load_mnist_binary(const std::string& images, const std::string& labels, int class_a,
                          int class_b, std::size_t max_k, std::uint64_t seed) {
  const auto image_bytes = read_maybe_gzip(images);
  const auto label_bytes = read_maybe_gzip(labels);
  return filter_binary_classes(parse_idx_images(image_bytes), parse_idx_labels(label_bytes),
                               class_a, class_b, max_k, seed);
}

std::shared_ptr<const MeanFieldFunctional> make_functional(const FunctionalSpec& spec) {
  if (spec.kind == "curie_weiss") {
    return std::make_shared<CurieWeissQuadratic>(spec.kappa, spec.eps, spec.dimension);
  }
  if (spec.kind == "zero") return std::make_shared<ZeroFunctional>(spec.dimension);
  if (spec.kind != "two_layer_net") {
    throw Error(ErrorKind::kConfig, "unknown functional kind '" + spec.kind + "'");
  }
  const auto& ds = spec.dataset;
  auto data = std::make_shared<Dataset>(
      ds.source == "mnist"
          ? load_mnist_binary(ds.images, ds.labels, ds.class_a, ds.class_b, ds.k, ds.seed)
          : synthetic_dataset(ds.k, ds.d_in, ds.seed));
  return std::make_shared<TwoLayerNetFunctional>(std::move(data), spec.threshold);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const ExperimentConfig& config, const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = version();
  manifest["seed"] = config.dynamics.seed;
  manifest["config"] = config.source;
  manifest["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace kmfl
