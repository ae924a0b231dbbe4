#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "posebench/dataset.hpp"

namespace posebench {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw ValidationError("JSON parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

Pose pose_from_flat(const std::vector<double> &r, const std::vector<double> &t,
                    const std::string &context) {
  if (r.size() != 9) {
    throw ValidationError(context + ": rotation needs 9 values, got " +
                          std::to_string(r.size()));
  }
  if (t.size() != 3) {
    throw ValidationError(context + ": translation needs 3 values, got " +
                          std::to_string(t.size()));
  }
  Pose pose;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      pose.rotation(row, col) = r[row * 3 + col];
    }
    pose.translation(row) = t[row];
  }
  pose.validate(context);
  return pose;
}

// Trailing integer in a file stem, e.g. "obj_000012" -> 12.
std::optional<int> trailing_id(const std::string &stem) {
  size_t end = stem.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) {
    --end;
  }
  if (end == stem.size()) return std::nullopt;
  return std::stoi(stem.substr(end));
}

std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, sep)) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_double(const std::string &text, const std::string &context) {
  double value;
  const auto *begin = text.data();
  const auto *end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    throw ValidationError(context + ": cannot parse number '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw ValidationError(context + ": non-finite value '" + text + "'");
  }
  return value;
}

std::vector<double> parse_float_list(const std::string &text,
                                     const std::string &context) {
  std::vector<double> values;
  std::istringstream ss(text);
  std::string token;
  while (ss >> token) {
    values.push_back(parse_double(token, context));
  }
  return values;
}

// 17 significant digits round-trips IEEE doubles exactly.
std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ModelSet load_models(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("model directory does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".ply") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw IoError("no models found in " + dir.string());
  }

  ModelSet models;
  for (const auto &file : files) {
    const auto id = trailing_id(file.stem().string());
    if (!id) {
      throw ValidationError("model filename carries no trailing object id: " +
                    file.string());
    }
    if (models.contains(*id)) {
      throw ValidationError("duplicate object id " + std::to_string(*id) +
                            " declared by " + file.string());
    }
    auto vertices = load_ply_vertices(file);
    if (vertices.empty()) {
      throw ValidationError("model has no vertices: " + file.string());
    }
    models.emplace(*id, make_model(*id, std::move(vertices)));
  }
  return models;
}

std::vector<GtAnnotation> load_ground_truth(const std::filesystem::path &path,
                                            int scene_id,
                                            const ModelSet *models,
                                            bool strict) {
  const json j = read_json_file(path);
  if (!j.is_object()) {
    throw ValidationError(path.string() + ": scene GT root must be an object");
  }

  std::vector<GtAnnotation> annotations;
  size_t skipped = 0;
  for (const auto &[key, instances] : j.items()) {
    int image_id;
    try {
      image_id = std::stoi(key);
    } catch (const std::exception &) {
      throw ValidationError(path.string() + ": image key '" + key +
                            "' is not an integer");
    }
    if (!instances.is_array()) {
      throw ValidationError(path.string() + ": image " + key +
                            " entry must be an array");
    }
    for (size_t inst_idx = 0; inst_idx < instances.size(); ++inst_idx) {
      const auto &inst = instances[inst_idx];
      const std::string context = path.string() + " image " + key +
                                  " instance " + std::to_string(inst_idx);
      GtAnnotation ann;
      ann.scene_id = scene_id;
      ann.image_id = image_id;
      ann.object_id = inst.at("obj_id").get<int>();
      ann.pose = pose_from_flat(inst.at("cam_R_m2c").get<std::vector<double>>(),
                                inst.at("cam_t_m2c").get<std::vector<double>>(),
                                context);
      ann.visibility = inst.value("visib_fract", 1.0);
      if (ann.visibility < 0.0 || ann.visibility > 1.0) {
        throw ValidationError(context + ": visibility " +
                              std::to_string(ann.visibility) +
                              " outside [0,1]");
      }
      if (models && !models->contains(ann.object_id)) {
        if (strict) {
          throw ValidationError(context + ": unknown object id " +
                                std::to_string(ann.object_id));
        }
        ++skipped;
        continue;
      }
      annotations.push_back(ann);
    }
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped
              << " annotations with unknown object ids in " << path.string()
              << "\n";
  }
  return annotations;
}

std::vector<Estimate> load_estimates(const std::filesystem::path &path,
                                     const ModelSet *models, bool strict) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": empty estimate file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split(line, ',');
  int col_scene = -1, col_im = -1, col_obj = -1, col_score = -1, col_r = -1,
      col_t = -1, col_time = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const auto &name = header[i];
    const int idx = static_cast<int>(i);
    if (name == "scene_id") col_scene = idx;
    else if (name == "im_id") col_im = idx;
    else if (name == "obj_id") col_obj = idx;
    else if (name == "score") col_score = idx;
    else if (name == "R") col_r = idx;
    else if (name == "t") col_t = idx;
    else if (name == "time") col_time = idx;
  }
  if (col_scene < 0 || col_im < 0 || col_obj < 0 || col_r < 0 || col_t < 0) {
    throw ValidationError(path.string() +
                  ": header must declare scene_id,im_id,obj_id,R,t");
  }

  std::vector<Estimate> estimates;
  size_t skipped = 0;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string context = path.string() + " row " + std::to_string(row);
    if (fields.size() != header.size()) {
      throw ValidationError(context + ": expected " + std::to_string(header.size()) +
                    " columns, got " + std::to_string(fields.size()));
    }
    Estimate est;
    est.scene_id =
        static_cast<int>(parse_double(fields[col_scene], context + " scene_id"));
    est.image_id =
        static_cast<int>(parse_double(fields[col_im], context + " im_id"));
    est.object_id =
        static_cast<int>(parse_double(fields[col_obj], context + " obj_id"));
    est.pose = pose_from_flat(parse_float_list(fields[col_r], context + " R"),
                              parse_float_list(fields[col_t], context + " t"),
                              context);
    if (col_score >= 0) {
      est.confidence = parse_double(fields[col_score], context + " score");
      if (est.confidence < 0.0 || est.confidence > 1.0) {
        throw ValidationError(context + ": score " +
                              std::to_string(est.confidence) +
                              " outside [0,1]");
      }
    }
    if (col_time >= 0) {
      est.inference_time = parse_double(fields[col_time], context + " time");
    }
    if (models && !models->contains(est.object_id)) {
      if (strict) {
        throw ValidationError(context + ": unknown object id " +
                              std::to_string(est.object_id));
      }
      ++skipped;
      continue;
    }
    estimates.push_back(est);
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped
              << " estimates with unknown object ids in " << path.string()
              << "\n";
  }
  return estimates;
}

void write_ground_truth(const std::filesystem::path &path,
                        const std::vector<GtAnnotation> &annotations) {
  json root = json::object();
  for (const auto &ann : annotations) {
    json inst;
    inst["obj_id"] = ann.object_id;
    std::vector<double> r(9);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        r[row * 3 + col] = ann.pose.rotation(row, col);
      }
    }
    inst["cam_R_m2c"] = r;
    inst["cam_t_m2c"] = std::vector<double>{ann.pose.translation.x(),
                                            ann.pose.translation.y(),
                                            ann.pose.translation.z()};
    inst["visib_fract"] = ann.visibility;
    root[std::to_string(ann.image_id)].push_back(inst);
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << root.dump(2) << "\n";
}

void write_estimates(const std::filesystem::path &path,
                     const std::vector<Estimate> &estimates) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << "scene_id,im_id,obj_id,score,R,t,time\n";
  for (const auto &est : estimates) {
    out << est.scene_id << ',' << est.image_id << ',' << est.object_id << ','
        << fmt_double(est.confidence) << ',';
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        if (row + col > 0) out << ' ';
        out << fmt_double(est.pose.rotation(row, col));
      }
    }
    out << ',';
    for (int k = 0; k < 3; ++k) {
      if (k > 0) out << ' ';
      out << fmt_double(est.pose.translation(k));
    }
    out << ',' << fmt_double(est.inference_time) << '\n';
  }
}

DatasetManifest load_manifest(const std::filesystem::path &path) {
  const json j = read_json_file(path);
  DatasetManifest manifest;
  manifest.name = j.at("name").get<std::string>();
  manifest.models_dir = j.at("models").get<std::string>();
  const auto base = path.parent_path();
  auto resolve = [&base](const std::filesystem::path &p) {
    return p.is_absolute() ? p : base / p;
  };
  manifest.models_dir = resolve(manifest.models_dir);
  if (!std::filesystem::exists(manifest.models_dir)) {
    throw ValidationError(path.string() + ": models directory not found: " +
                          manifest.models_dir.string());
  }
  for (const auto &[split_name, entries] : j.at("splits").items()) {
    DatasetSplit split;
    for (const auto &entry : entries) {
      const int scene_id = entry.at("scene_id").get<int>();
      const auto gt = resolve(entry.at("gt").get<std::string>());
      if (!std::filesystem::exists(gt)) {
        throw ValidationError(path.string() + ": GT file not found: " +
                              gt.string());
      }
      split.scenes.emplace_back(scene_id, gt);
    }
    manifest.splits.emplace(split_name, std::move(split));
  }
  return manifest;
}

}  // namespace posebench
