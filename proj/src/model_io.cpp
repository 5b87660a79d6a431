#include "cyclecast/model_io.hpp"

#include "cyclecast/error.hpp"

namespace cyclecast {

namespace {

using json = nlohmann::ordered_json;

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(Errc::CorruptFile, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

json classifier_json(const Classifier& c) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        json out;
        if constexpr (std::is_same_v<M, MlrModel>) {
          out["weights"] = to_json(m.weights);
          out["bias"] = to_json(m.bias);
          out["l2"] = m.l2;
        } else if constexpr (std::is_same_v<M, SvmModel>) {
          out["weights"] = to_json(m.weights);
          out["bias"] = to_json(m.bias);
          out["temperature"] = m.temperature;
        } else {
          out["dropout_rate"] = m.dropout_rate;
          out["rng_seed"] = m.rng_seed;
          json layers = json::array();
          for (const auto& layer : m.layers) {
            layers.push_back({{"weights", to_json(layer.weights)}, {"bias", to_json(layer.bias)}});
          }
          out["layers"] = std::move(layers);
        }
        return out;
      },
      c);
}

void check_shape(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Eigen::Index rows) {
  if (w.rows() != rows || b.size() != rows) throw Error(Errc::CorruptFile, "weight shape");
}

Classifier classifier_from(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::Mlr: {
      MlrModel m;
      m.weights = matrix_from(j.at("weights"));
      m.bias = vector_from(j.at("bias"));
      m.l2 = j.at("l2").get<double>();
      check_shape(m.weights, m.bias, kNumPhases);
      return m;
    }
    case ModelKind::Svm: {
      SvmModel m;
      m.weights = matrix_from(j.at("weights"));
      m.bias = vector_from(j.at("bias"));
      m.temperature = j.at("temperature").get<double>();
      check_shape(m.weights, m.bias, kNumPhases);
      if (!(m.temperature > 0.0)) throw Error(Errc::CorruptFile, "temperature must be positive");
      return m;
    }
    case ModelKind::Mlp: {
      MlpModel m;
      m.dropout_rate = j.at("dropout_rate").get<double>();
      m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
      for (const auto& layer : j.at("layers")) {
        DenseLayer d{matrix_from(layer.at("weights")), vector_from(layer.at("bias"))};
        check_shape(d.weights, d.bias, d.weights.rows());
        if (!m.layers.empty() && m.layers.back().weights.rows() != d.weights.cols()) {
          throw Error(Errc::CorruptFile, "layer shapes do not chain");
        }
        m.layers.push_back(std::move(d));
      }
      if (m.layers.size() < 2 || m.layers.back().weights.rows() != kNumPhases) {
        throw Error(Errc::CorruptFile, "MLP needs hidden layers and a 4-way output");
      }
      return m;
    }
    case ModelKind::Rbbcp: break;
  }
  throw Error(Errc::CorruptFile, "rbbcp has no classifier");
}

}  // namespace

PhaseDistribution ModelFile::predict(std::span<const double> raw_features) const {
  if (!classifier || !scaler) throw Error(Errc::ConfigError, "model has no trained classifier");
  Eigen::VectorXd x = scaler->transform_row(raw_features);
  return predict_proba(*classifier, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

std::string serialize_model(const ModelFile& model) {
  json doc;
  doc["schema"] = kModelSchema;
  doc["version"] = kModelSchemaVersion;
  doc["kind"] = to_string(model.kind);
  doc["region"] = to_string(model.region);
  doc["window"] = model.window;
  doc["feature_names"] = model.feature_names;
  doc["rbbcp"] = {{"window", model.rbbcp.window},
                  {"zero_slope", model.rbbcp.zero_slope == ZeroSlopeRule::Down ? "down" : "up"}};
  if (model.scaler) {
    doc["scaler"] = {{"mean", to_json(model.scaler->mean)}, {"scale", to_json(model.scaler->scale)}};
  }
  if (model.classifier) doc["classifier"] = classifier_json(*model.classifier);
  doc["training"] = model.training;
  return doc.dump(1) + "\n";
}

ModelFile parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, e.what());
  }
  try {
    if (!doc.is_object() || doc.value("schema", "") != kModelSchema) {
      throw Error(Errc::CorruptFile, "not a cyclecast model file");
    }
    const int version = doc.at("version").get<int>();
    if (version > kModelSchemaVersion) {
      throw Error(Errc::VersionMismatch, "model schema version " + std::to_string(version) +
                                             " is newer than supported " +
                                             std::to_string(kModelSchemaVersion));
    }
    if (version < 1) throw Error(Errc::VersionMismatch, "unknown schema version");
    ModelFile m;
    m.kind = parse_model_kind(doc.at("kind").get<std::string>());
    m.region = parse_region(doc.at("region").get<std::string>());
    m.window = doc.at("window").get<std::size_t>();
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.rbbcp.window = doc.at("rbbcp").at("window").get<std::size_t>();
    m.rbbcp.zero_slope = doc.at("rbbcp").at("zero_slope") == "up" ? ZeroSlopeRule::Up : ZeroSlopeRule::Down;
    if (doc.contains("scaler")) {
      FeatureScaler s{vector_from(doc["scaler"].at("mean")), vector_from(doc["scaler"].at("scale"))};
      if (s.mean.size() != s.scale.size()) throw Error(Errc::CorruptFile, "scaler shape");
      m.scaler = std::move(s);
    }
    if (m.kind != ModelKind::Rbbcp) {
      m.classifier = classifier_from(m.kind, doc.at("classifier"));
      if (input_dim(*m.classifier) != m.feature_names.size()) {
        throw Error(Errc::CorruptFile, "classifier width does not match feature names");
      }
    }
    if (doc.contains("training")) m.training = doc["training"];
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_file_atomic(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::IoError, e.what());
  }
  return parse_model(text);
}

}  // namespace cyclecast
