#include "framelab/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace framelab {

using nlohmann::json;

namespace {

json tensor_to_json(const Matrix& m) {
  return json{{"shape", {m.rows(), m.cols()}}, {"values", m.data()}};
}

Matrix tensor_from_json(const json& doc, std::string_view name) {
  const auto& shape = doc.at("shape");
  if (!shape.is_array() || shape.size() != 2) {
    throw std::invalid_argument("tensor " + std::string(name) + ": shape must be [rows, cols]");
  }
  Matrix m(shape[0].get<std::size_t>(), shape[1].get<std::size_t>());
  auto values = doc.at("values").get<std::vector<double>>();
  if (values.size() != m.data().size()) {
    throw std::invalid_argument("tensor " + std::string(name) + ": " + std::to_string(values.size()) +
                                " values for declared shape");
  }
  m.data() = std::move(values);
  return m;
}

}  // namespace

json video_to_json(const SyntheticVideo& video) {
  json frames = json::array();
  for (std::size_t t = 0; t < video.frame_count(); ++t) {
    const auto row = video.frame(t);
    frames.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json mask = json::array();
  for (bool b : video.salient_mask) mask.push_back(b);
  return json{{"T", video.frame_count()}, {"D", video.dim()},     {"C", video.classes},
              {"label", video.label},     {"smoothness", video.smoothness},
              {"seed", video.seed},       {"frames", frames},      {"salient_mask", mask}};
}

SyntheticVideo video_from_json(const json& doc) {
  SyntheticVideo video;
  const auto T = doc.at("T").get<std::size_t>();
  const auto D = doc.at("D").get<std::size_t>();
  video.classes = doc.at("C").get<std::size_t>();
  video.label = doc.at("label").get<std::size_t>();
  video.smoothness = doc.at("smoothness").get<double>();
  video.seed = doc.at("seed").get<std::uint64_t>();
  const auto& frames = doc.at("frames");
  if (T < 1 || D < 1 || frames.size() != T) throw std::invalid_argument("video: frames do not match T");
  if (video.label >= video.classes) throw std::invalid_argument("video: label out of range");
  video.frames = Matrix(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    if (frames[t].size() != D) throw std::invalid_argument("video: frame width does not match D");
    for (std::size_t d = 0; d < D; ++d) video.frames(t, d) = frames[t][d].get<double>();
  }
  video.salient_mask = doc.at("salient_mask").get<std::vector<bool>>();
  if (video.salient_mask.size() != T) throw std::invalid_argument("video: salient_mask does not match T");
  if (std::find(video.salient_mask.begin(), video.salient_mask.end(), true) == video.salient_mask.end()) {
    throw std::invalid_argument("video: salient_mask has no salient frame");
  }
  return video;
}

json model_to_json(const SamplerModel& model) {
  json params = json::object();
  const auto tensors = model.params.tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    params[std::string(SamplerParameters::kNames[k])] = tensor_to_json(*tensors[k]);
  }
  return json{{"D", model.feature_dim},
              {"D_in", model.view_dim},
              {"D_h", model.hidden_dim},
              {"C", model.classes},
              {"seed", model.seed},
              {"view_noise", model.view_noise},
              {"projection", tensor_to_json(model.projection)},
              {"parameters", params}};
}

SamplerModel model_from_json(const json& doc) {
  SamplerModel model;
  model.feature_dim = doc.at("D").get<std::size_t>();
  model.view_dim = doc.at("D_in").get<std::size_t>();
  model.hidden_dim = doc.at("D_h").get<std::size_t>();
  model.classes = doc.at("C").get<std::size_t>();
  model.seed = doc.at("seed").get<std::uint64_t>();
  model.view_noise = doc.at("view_noise").get<double>();
  model.projection = tensor_from_json(doc.at("projection"), "projection");
  const auto& params = doc.at("parameters");
  auto tensors = model.params.tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const std::string name(SamplerParameters::kNames[k]);
    *tensors[k] = tensor_from_json(params.at(name), name);
  }
  model.validate();
  return model;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

}  // namespace framelab
