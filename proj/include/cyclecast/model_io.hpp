#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclecast/dataset.hpp"
#include "cyclecast/features.hpp"
#include "cyclecast/models.hpp"
#include "cyclecast/rbbcp.hpp"

namespace cyclecast {

inline constexpr std::string_view kModelSchema = "cyclecast.model";
inline constexpr int kModelSchemaVersion = 1;

// Everything needed to reproduce predictions: the classifier (absent for
// rbbcp), the feature scaler it was trained with, and the feature layout.
struct ModelFile {
  ModelKind kind = ModelKind::Mlr;
  Region region = Region::US;
  std::size_t window = 12;
  std::vector<std::string> feature_names;
  std::optional<FeatureScaler> scaler;
  std::optional<Classifier> classifier;
  RbbcpConfig rbbcp;
  nlohmann::ordered_json training = nlohmann::ordered_json::object();

  // Scales `raw_features` and runs the classifier. Not valid for rbbcp.
  PhaseDistribution predict(std::span<const double> raw_features) const;
};

std::string serialize_model(const ModelFile& model);
// Throws CorruptFile or VersionMismatch.
ModelFile parse_model(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace cyclecast
