#pragma once

// JSON persistence of model weights.
//
// Document layout (schema_version 1):
//   { "schema_version": 1,
//     "config": { keypoints, neighbors, channels, ... },
//     "extractor": { "layers": [layer...], "elus": [elu...] },
//     "layers": [layer...], "elus": [elu...] }
// A layer lists its dense weights per degree and one radial network per
// kernel that owns one; Mirror kernels are re-linked on load. Every array
// is { "shape": [rows, cols], "data": [row-major values] }.

#include <filesystem>
#include <string>

#include "bitr/assembly.hpp"

namespace bitr {

inline constexpr int kModelSchemaVersion = 1;

std::string model_to_json(const BitrModel& model);
// Throws ParseError on malformed JSON or a layout that does not match the
// header's config, and InvalidArgument when swap-tied weights differ.
BitrModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const BitrModel& model);
BitrModel load_model(const std::filesystem::path& path);

}  // namespace bitr
