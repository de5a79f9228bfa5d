#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "framelab/classifier.hpp"
#include "framelab/sampler.hpp"

namespace framelab {

/// {T, D, C, label, smoothness, seed, frames, salient_mask}. Doubles are
/// written in shortest round-trip form, so loading is bit-exact.
nlohmann::json video_to_json(const SyntheticVideo& video);
SyntheticVideo video_from_json(const nlohmann::json& doc);

/// {D, D_in, D_h, C, seed, view_noise, projection, parameters}; each tensor
/// is {shape: [rows, cols], values: [...]} in row-major order.
nlohmann::json model_to_json(const SamplerModel& model);
SamplerModel model_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace framelab
