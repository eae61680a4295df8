// Copyright 2026 The advdenoise Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "advdenoise/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string lower_extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

ImageTensor decode_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw DecodeError(path + ": " + img.message);
  }
  // RGBA keeps alpha separate so it can be dropped without compositing.
  img.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DecodeError(path + ": " + msg);
  }
  ImageTensor out(img.width, img.height);
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.data[p * 3 + c] = static_cast<float>(buf[p * 4 + c]) / 255.0f;
    }
  }
  return out;
}

void encode_png(const std::vector<std::uint8_t>& bytes, std::size_t w,
                std::size_t h, const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError(path + ": " + img.message);
  }
}

// Reads the next whitespace-delimited PPM header token, skipping comments.
std::string ppm_token(const std::vector<char>& buf, std::size_t& pos,
                      const std::string& path) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
  if (start == pos) throw DecodeError(path + ": truncated PPM header");
  return std::string(buf.data() + start, pos - start);
}

std::size_t ppm_number(const std::vector<char>& buf, std::size_t& pos,
                       const std::string& path, const char* what) {
  const std::string tok = ppm_token(buf, pos, path);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(),
                                  [](unsigned char c) { return std::isdigit(c); })) {
    throw DecodeError(path + ": bad PPM " + what + " '" + tok + "'");
  }
  return static_cast<std::size_t>(std::stoull(tok));
}

ImageTensor decode_ppm(const std::string& path) {
  const std::vector<char> buf = read_file(path);
  std::size_t pos = 0;
  if (ppm_token(buf, pos, path) != "P6") {
    throw DecodeError(path + ": only binary PPM (P6) is supported");
  }
  const std::size_t w = ppm_number(buf, pos, path, "width");
  const std::size_t h = ppm_number(buf, pos, path, "height");
  const std::size_t maxval = ppm_number(buf, pos, path, "maxval");
  if (w == 0 || h == 0) throw DecodeError(path + ": zero PPM dimension");
  if (maxval != 255) {
    throw DecodeError(path + ": unsupported PPM maxval " + std::to_string(maxval));
  }
  ++pos;  // single whitespace byte before the raster
  if (buf.size() < pos || buf.size() - pos < w * h * 3) {
    throw DecodeError(path + ": truncated PPM raster");
  }
  ImageTensor out(w, h);
  for (std::size_t i = 0; i < w * h * 3; ++i) {
    out.data[i] = static_cast<float>(static_cast<unsigned char>(buf[pos + i])) / 255.0f;
  }
  return out;
}

// --- JSON field helpers with positional diagnostics ---

const json& field(const json& rec, const char* name, const std::string& where) {
  auto it = rec.find(name);
  if (it == rec.end()) {
    throw ParseError(where + ": missing required field '" + name + "'");
  }
  return *it;
}

std::int64_t int_field(const json& rec, const char* name, const std::string& where) {
  const json& v = field(rec, name, where);
  if (!v.is_number_integer()) {
    throw ParseError(where + ": field '" + name + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

double number_field(const json& rec, const char* name, const std::string& where) {
  const json& v = field(rec, name, where);
  if (!v.is_number()) throw ParseError(where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

BBox bbox_field(const json& rec, const std::string& where) {
  const json& v = field(rec, "bbox", where);
  if (!v.is_array() || v.size() != 4 ||
      !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
    throw ParseError(where + ": field 'bbox' must be [x, y, w, h]");
  }
  return BBox{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
              v[3].get<double>()};
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::string at_index(const std::string& source, const char* array, std::size_t i) {
  return source + ": " + array + "[" + std::to_string(i) + "]";
}

}  // namespace

// ----------------------------------------------------------------------------

ImageTensor load_image(const std::string& path) {
  if (!fs::exists(path)) throw IoError("image not found: " + path);
  const std::string ext = lower_extension(path);
  if (ext == ".png") return decode_png(path);
  if (ext == ".ppm" || ext == ".pnm") return decode_ppm(path);
  throw DecodeError(path + ": unsupported image format '" + ext + "'");
}

std::uint8_t quantize(float v) {
  const double q = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

void save_image(const ImageTensor& image, const std::string& path) {
  if (image.empty()) throw ParameterError("cannot save an empty image: " + path);
  std::vector<std::uint8_t> bytes(image.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (std::isnan(image.data[i])) {
      throw ParameterError(path + ": image contains NaN");
    }
    bytes[i] = quantize(image.data[i]);
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    encode_png(bytes, image.width, image.height, path);
  } else if (ext == ".ppm") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path);
  } else {
    throw IoError(path + ": unsupported output format '" + ext + "'");
  }
}

ImageTensor resize_bilinear(const ImageTensor& image, std::size_t out_width,
                            std::size_t out_height) {
  if (out_width == 0 || out_height == 0) {
    throw ParameterError("resize target must be at least 1x1");
  }
  if (image.empty()) throw ParameterError("cannot resize an empty image");
  if (out_width == image.width && out_height == image.height) return image;

  const double sx = static_cast<double>(image.width) / static_cast<double>(out_width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(out_height);
  auto sample = [](double src, std::size_t len, std::size_t& i0, std::size_t& i1,
                   double& frac) {
    src = std::clamp(src, 0.0, static_cast<double>(len - 1));
    const double f = std::floor(src);
    i0 = static_cast<std::size_t>(f);
    i1 = std::min(i0 + 1, len - 1);
    frac = src - f;
  };

  ImageTensor out(out_width, out_height);
  for (std::size_t y = 0; y < out_height; ++y) {
    std::size_t y0, y1;
    double fy;
    sample((static_cast<double>(y) + 0.5) * sy - 0.5, image.height, y0, y1, fy);
    for (std::size_t x = 0; x < out_width; ++x) {
      std::size_t x0, x1;
      double fx;
      sample((static_cast<double>(x) + 0.5) * sx - 0.5, image.width, x0, x1, fx);
      for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - fx) + image.at(x1, y0, c) * fx;
        const double bot = image.at(x0, y1, c) * (1.0 - fx) + image.at(x1, y1, c) * fx;
        out.at(x, y, c) = static_cast<float>(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

// ----------------------------------------------------------------------------

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    default: return "all";
  }
}

DatasetManifest load_manifest(const std::string& path, bool check_files) {
  std::istringstream in(read_text(path));
  const fs::path base = fs::path(path).parent_path();
  DatasetManifest m;
  std::set<std::int64_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    const json rec = parse_json(line, where);
    ManifestEntry e;
    e.id = int_field(rec, "id", where);
    const json& p = field(rec, "path", where);
    if (!p.is_string()) throw ParseError(where + ": field 'path' must be a string");
    e.path = p.get<std::string>();
    e.width = static_cast<std::size_t>(int_field(rec, "width", where));
    e.height = static_cast<std::size_t>(int_field(rec, "height", where));
    if (!ids.insert(e.id).second) {
      throw ParseError(where + ": duplicate image id " + std::to_string(e.id));
    }
    if (check_files) {
      const fs::path full = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
      if (!fs::exists(full)) throw IoError(where + ": missing file " + full.string());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ostringstream os;
  for (const ManifestEntry& e : manifest.entries) {
    json rec = {{"id", e.id}, {"path", e.path}, {"width", e.width}, {"height", e.height}};
    os << rec.dump() << "\n";
  }
  write_text(path, os.str());
}

std::pair<DatasetManifest, DatasetManifest> split_dataset(
    const DatasetManifest& manifest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ParameterError("split fraction must be in (0, 1), got " +
                         std::to_string(fraction));
  }
  if (manifest.entries.empty()) throw ConfigError("cannot split an empty manifest");
  std::vector<std::size_t> order(manifest.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(order.size())));
  DatasetManifest train{{}, Split::kTrain}, val{{}, Split::kVal};
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : val).entries.push_back(manifest.entries[order[k]]);
  }
  return {std::move(train), std::move(val)};
}

// ----------------------------------------------------------------------------

std::vector<GroundTruthBox> AnnotationSet::boxes_for(std::int64_t image_id) const {
  std::vector<GroundTruthBox> out;
  for (const auto& b : boxes) {
    if (b.image_id == image_id) out.push_back(b);
  }
  return out;
}

AnnotationSet parse_annotations(const std::string& json_text, const std::string& source) {
  const json root = parse_json(json_text, source);
  if (!root.is_object()) throw ParseError(source + ": expected a JSON object");
  AnnotationSet set;
  std::map<std::int64_t, std::size_t> image_index;

  const json& images = field(root, "images", source);
  if (!images.is_array()) throw ParseError(source + ": 'images' must be an array");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = at_index(source, "images", i);
    const json& rec = images[i];
    ImageInfo info;
    info.id = int_field(rec, "id", where);
    if (auto it = rec.find("file_name"); it != rec.end() && it->is_string()) {
      info.file_name = it->get<std::string>();
    }
    if (rec.contains("width")) info.width = static_cast<std::size_t>(int_field(rec, "width", where));
    if (rec.contains("height")) info.height = static_cast<std::size_t>(int_field(rec, "height", where));
    if (!image_index.emplace(info.id, set.images.size()).second) {
      throw ParseError(where + ": duplicate image id " + std::to_string(info.id));
    }
    set.images.push_back(std::move(info));
  }

  if (auto it = root.find("categories"); it != root.end()) {
    if (!it->is_array()) throw ParseError(source + ": 'categories' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = at_index(source, "categories", i);
      const json& rec = (*it)[i];
      Category c;
      c.id = int_field(rec, "id", where);
      const json& name = field(rec, "name", where);
      if (!name.is_string()) throw ParseError(where + ": field 'name' must be a string");
      c.name = name.get<std::string>();
      set.categories.push_back(std::move(c));
    }
  }

  const json& anns = field(root, "annotations", source);
  if (!anns.is_array()) throw ParseError(source + ": 'annotations' must be an array");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = at_index(source, "annotations", i);
    const json& rec = anns[i];
    GroundTruthBox gt;
    gt.image_id = int_field(rec, "image_id", where);
    gt.category_id = int_field(rec, "category_id", where);
    gt.bbox = bbox_field(rec, where);
    auto img = image_index.find(gt.image_id);
    if (img == image_index.end()) {
      throw ParseError(where + ": image_id " + std::to_string(gt.image_id) +
                       " is not listed in 'images'");
    }
    if (auto c = rec.find("iscrowd"); c != rec.end() && c->is_number() && c->get<double>() != 0) {
      ++set.skipped_crowd;
      set.warnings.push_back(where + ": crowd annotation skipped");
      continue;
    }
    const ImageInfo& info = set.images[img->second];
    if (info.width > 0 && info.height > 0) {
      const double x0 = std::clamp(gt.bbox.x, 0.0, static_cast<double>(info.width));
      const double y0 = std::clamp(gt.bbox.y, 0.0, static_cast<double>(info.height));
      const double x1 = std::clamp(gt.bbox.x + gt.bbox.w, 0.0, static_cast<double>(info.width));
      const double y1 = std::clamp(gt.bbox.y + gt.bbox.h, 0.0, static_cast<double>(info.height));
      gt.bbox = BBox{x0, y0, x1 - x0, y1 - y0};
    }
    if (!(gt.bbox.w > 0.0) || !(gt.bbox.h > 0.0)) {
      set.warnings.push_back(where + ": empty box skipped");
      continue;
    }
    set.boxes.push_back(gt);
  }
  return set;
}

AnnotationSet load_annotations(const std::string& path) {
  return parse_annotations(read_text(path), path);
}

void save_annotations(const AnnotationSet& set, const std::string& path) {
  json images = json::array(), anns = json::array(), cats = json::array();
  for (const ImageInfo& i : set.images) {
    json rec = {{"id", i.id}, {"file_name", i.file_name}};
    if (i.width > 0) rec["width"] = i.width;
    if (i.height > 0) rec["height"] = i.height;
    images.push_back(rec);
  }
  std::int64_t next_id = 1;
  for (const GroundTruthBox& b : set.boxes) {
    anns.push_back({{"id", next_id++},
                    {"image_id", b.image_id},
                    {"category_id", b.category_id},
                    {"bbox", {b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h}},
                    {"area", b.bbox.w * b.bbox.h},
                    {"iscrowd", 0}});
  }
  for (const Category& c : set.categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  json root = {{"images", images}, {"annotations", anns}, {"categories", cats}};
  write_text(path, root.dump(1) + "\n");
}

std::vector<DetectionBox> parse_detections(const std::string& json_text,
                                           const std::string& source) {
  const json root = parse_json(json_text, source);
  if (!root.is_array()) throw ParseError(source + ": expected a JSON array of detections");
  std::vector<DetectionBox> dets;
  dets.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string where = source + ": [" + std::to_string(i) + "]";
    const json& rec = root[i];
    if (!rec.is_object()) throw ParseError(where + ": expected an object");
    DetectionBox d;
    d.image_id = int_field(rec, "image_id", where);
    d.category_id = int_field(rec, "category_id", where);
    d.bbox = bbox_field(rec, where);
    d.score = number_field(rec, "score", where);
    if (!(d.bbox.w > 0.0) || !(d.bbox.h > 0.0)) {
      throw ParseError(where + ": bbox width and height must be positive");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw ParseError(where + ": score must be in [0, 1]");
    }
    dets.push_back(d);
  }
  return dets;
}

std::vector<DetectionBox> load_detections(const std::string& path) {
  return parse_detections(read_text(path), path);
}

void save_detections(std::span<const DetectionBox> dets, const std::string& path) {
  json arr = json::array();
  for (const DetectionBox& d : dets) {
    arr.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                   {"score", d.score}});
  }
  write_text(path, arr.dump(1) + "\n");
}

AnnotationSet filter_images_by_category(const AnnotationSet& set,
                                        std::span<const std::int64_t> category_ids) {
  const std::set<std::int64_t> wanted(category_ids.begin(), category_ids.end());
  std::set<std::int64_t> keep;
  for (const auto& b : set.boxes) {
    if (wanted.count(b.category_id)) keep.insert(b.image_id);
  }
  AnnotationSet out;
  out.categories = set.categories;
  out.skipped_crowd = set.skipped_crowd;
  out.warnings = set.warnings;
  for (const auto& i : set.images) {
    if (keep.count(i.id)) out.images.push_back(i);
  }
  for (const auto& b : set.boxes) {
    if (keep.count(b.image_id)) out.boxes.push_back(b);
  }
  return out;
}

}  // namespace advdenoise
