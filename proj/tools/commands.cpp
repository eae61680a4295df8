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

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "advdenoise/attack.hpp"
#include "advdenoise/dataset_io.hpp"
#include "advdenoise/detection_eval.hpp"
#include "advdenoise/errors.hpp"
#include "advdenoise/random.hpp"

namespace advdenoise::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Stream tags for deriving per-stage seeds from the single global seed.
enum SeedStream : std::uint64_t {
  kSceneStream = 1,
  kSplitStream = 2,
  kAttackStream = 3,
  kTrainStream = 4,
  kModelStream = 5,
};

void log_info(const std::string& msg) { std::cerr << "[advdenoise] " << msg << "\n"; }
void log_warn(const std::string& msg) { std::cerr << "[advdenoise] warning: " << msg << "\n"; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes its
// own result slot, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

ordered_json perlin_json(const PerlinConfig& p) {
  return {{"max_norm", p.max_norm}, {"period", p.period}, {"freq_sine", p.freq_sine},
          {"octaves", p.octaves}, {"seed", p.seed}};
}

const char* loss_scale_name(LossScale s) {
  return s == LossScale::kBatchMean ? "batch_mean" : "element_mean";
}

const char* pairs_name(TrainingPairs p) {
  return p == TrainingPairs::kAttackedToClean ? "attacked" : "clean";
}

ordered_json train_json(const TrainConfig& t) {
  return {{"input_width", t.input_width},
          {"input_height", t.input_height},
          {"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"seed", t.seed},
          {"loss_scale", loss_scale_name(t.loss_scale)},
          {"pairs", pairs_name(t.pairs)}};
}

ordered_json config_json(const PipelineConfig& c) {
  return {{"dataset_root", c.dataset_root},
          {"output_dir", c.output_dir},
          {"checkpoint", c.checkpoint},
          {"seed", c.seed},
          {"threads", c.threads},
          {"skip_train", c.skip_train},
          {"perlin", perlin_json(c.perlin)},
          {"train", train_json(c.train)},
          {"scenes",
           {{"count", c.scenes.count},
            {"size", c.scenes.size},
            {"min_objects", c.scenes.min_objects},
            {"max_objects", c.scenes.max_objects},
            {"train_fraction", c.scenes.train_fraction}}}};
}

void write_provenance(const fs::path& dir, const ordered_json& resolved) {
  write_text(dir / "resolved_config.json", resolved.dump(2) + "\n");
}

// Typed overlay of one JSON key onto a field.
template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

struct LoadedImage {
  std::string rel;
  ImageTensor image;
  std::string error;
};

std::vector<LoadedImage> load_tree(const std::string& root, std::size_t threads) {
  const auto rels = list_images(root);
  std::vector<LoadedImage> out(rels.size());
  parallel_for(rels.size(), threads, [&](std::size_t i) {
    out[i].rel = rels[i];
    try {
      out[i].image = load_image((fs::path(root) / rels[i]).string());
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

// --- scene sets -------------------------------------------------------------

struct SceneSet {
  std::vector<SyntheticScene> scenes;
  std::vector<std::int64_t> ids;
};

SceneSet make_scenes(const SceneSetConfig& cfg, std::uint64_t seed,
                     const SceneConfig& scene_config) {
  if (cfg.count == 0) throw ConfigError("scene count must be positive");
  if (cfg.max_objects < cfg.min_objects) throw ConfigError("max_objects < min_objects");
  SceneSet set;
  SplitMix64 counts(derive_seed(seed, 0));
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    const std::size_t n =
        cfg.min_objects + counts.below(cfg.max_objects - cfg.min_objects + 1);
    set.scenes.push_back(generate_scene(cfg.size, cfg.size, n,
                                        derive_seed(seed, static_cast<std::uint64_t>(id)),
                                        id, scene_config));
    set.ids.push_back(id);
  }
  return set;
}

std::string scene_file(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04lld.png", static_cast<long long>(id));
  return buf;
}

AnnotationSet scene_annotations(const SceneSet& set, std::span<const std::size_t> which,
                                const std::string& prefix) {
  AnnotationSet ann;
  ann.categories = {{kBoxCategory, "box"}, {kDiskCategory, "disk"}};
  for (std::size_t k : which) {
    const SyntheticScene& s = set.scenes[k];
    ann.images.push_back(ImageInfo{set.ids[k], prefix + scene_file(set.ids[k]),
                                   s.image.width, s.image.height});
    ann.boxes.insert(ann.boxes.end(), s.gts.begin(), s.gts.end());
  }
  return ann;
}

std::vector<DetectionBox> detect_tree(const std::vector<LoadedImage>& images,
                                      const std::map<std::string, std::int64_t>& ids,
                                      const DetectorConfig& detector, std::size_t threads,
                                      std::vector<std::string>& warnings) {
  std::vector<std::vector<DetectionBox>> per_image(images.size());
  std::vector<std::int64_t> resolved(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string& rel = images[i].rel;
    auto it = ids.find(rel);
    if (it == ids.end()) it = ids.find(fs::path(rel).filename().string());
    if (it != ids.end()) {
      resolved[i] = it->second;
    } else {
      resolved[i] = static_cast<std::int64_t>(path_id(rel) >> 1);
      warnings.push_back("no annotation entry for " + rel + "; using id " +
                         std::to_string(resolved[i]));
    }
  }
  parallel_for(images.size(), threads, [&](std::size_t i) {
    if (images[i].error.empty()) {
      per_image[i] = detect_blobs(images[i].image, resolved[i], detector);
    }
  });
  std::vector<DetectionBox> all;
  for (auto& v : per_image) all.insert(all.end(), v.begin(), v.end());
  return all;
}

std::map<std::string, std::int64_t> file_ids(const AnnotationSet& ann) {
  std::map<std::string, std::int64_t> ids;
  std::map<std::string, int> base_count;
  for (const auto& i : ann.images) ++base_count[fs::path(i.file_name).filename().string()];
  for (const auto& i : ann.images) {
    ids[i.file_name] = i.id;
    const std::string base = fs::path(i.file_name).filename().string();
    if (base_count[base] == 1) ids.emplace(base, i.id);
  }
  return ids;
}

ordered_json eval_json(const std::vector<std::pair<std::string, EvalReport>>& rows,
                       const std::vector<std::string>& sources) {
  ordered_json conditions = ordered_json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    conditions.push_back({{"condition", rows[i].first},
                          {"detections", sources[i]},
                          {"report", ordered_json::parse(report_to_json(rows[i].second))}});
  }
  return {{"conditions", conditions}};
}

std::vector<std::pair<std::string, EvalReport>> evaluate_files(
    const AnnotationSet& gt, const std::vector<std::string>& det_files,
    const std::vector<std::string>& names) {
  EvalOptions opts;
  for (const auto& i : gt.images) opts.image_ids.insert(i.id);
  std::vector<std::pair<std::string, EvalReport>> rows;
  for (std::size_t i = 0; i < det_files.size(); ++i) {
    const auto dets = load_detections(det_files[i]);
    EvalReport r = coco_map(dets, gt.boxes, opts);
    for (const auto& w : r.warnings) log_warn(names[i] + ": " + w);
    rows.emplace_back(names[i], std::move(r));
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------

PipelineConfig desk_scale_config() {
  PipelineConfig c;
  c.train.input_width = 64;
  c.train.input_height = 64;
  c.train.epochs = 20;
  return c;
}

void apply_config_json(PipelineConfig& c, const std::string& json_text,
                       const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  reject_unknown(root,
                 {"dataset_root", "output_dir", "checkpoint", "seed", "threads",
                  "skip_train", "perlin", "train", "scenes"},
                 source);
  take(root, "dataset_root", c.dataset_root, source);
  take(root, "output_dir", c.output_dir, source);
  take(root, "checkpoint", c.checkpoint, source);
  take(root, "seed", c.seed, source);
  take(root, "threads", c.threads, source);
  take(root, "skip_train", c.skip_train, source);
  if (auto it = root.find("perlin"); it != root.end()) {
    const std::string where = source + ".perlin";
    reject_unknown(*it, {"max_norm", "period", "freq_sine", "octaves", "seed"}, where);
    take(*it, "max_norm", c.perlin.max_norm, where);
    take(*it, "period", c.perlin.period, where);
    take(*it, "freq_sine", c.perlin.freq_sine, where);
    take(*it, "octaves", c.perlin.octaves, where);
    take(*it, "seed", c.perlin.seed, where);
  }
  if (auto it = root.find("train"); it != root.end()) {
    const std::string where = source + ".train";
    reject_unknown(*it,
                   {"input_width", "input_height", "learning_rate", "batch_size", "epochs",
                    "seed", "loss_scale", "pairs"},
                   where);
    take(*it, "input_width", c.train.input_width, where);
    take(*it, "input_height", c.train.input_height, where);
    take(*it, "learning_rate", c.train.learning_rate, where);
    take(*it, "batch_size", c.train.batch_size, where);
    take(*it, "epochs", c.train.epochs, where);
    take(*it, "seed", c.train.seed, where);
    std::string scale = loss_scale_name(c.train.loss_scale);
    take(*it, "loss_scale", scale, where);
    if (scale == "element_mean") c.train.loss_scale = LossScale::kElementMean;
    else if (scale == "batch_mean") c.train.loss_scale = LossScale::kBatchMean;
    else throw ConfigError(where + ".loss_scale: expected element_mean or batch_mean");
    std::string pairs = pairs_name(c.train.pairs);
    take(*it, "pairs", pairs, where);
    if (pairs == "clean") c.train.pairs = TrainingPairs::kCleanToClean;
    else if (pairs == "attacked") c.train.pairs = TrainingPairs::kAttackedToClean;
    else throw ConfigError(where + ".pairs: expected clean or attacked");
  }
  if (auto it = root.find("scenes"); it != root.end()) {
    const std::string where = source + ".scenes";
    reject_unknown(*it, {"count", "size", "min_objects", "max_objects", "train_fraction"},
                   where);
    take(*it, "count", c.scenes.count, where);
    take(*it, "size", c.scenes.size, where);
    take(*it, "min_objects", c.scenes.min_objects, where);
    take(*it, "max_objects", c.scenes.max_objects, where);
    take(*it, "train_fraction", c.scenes.train_fraction, where);
  }
}

void apply_config_file(PipelineConfig& config, const std::string& path) {
  apply_config_json(config, read_text(path), path);
}

std::string config_to_json(const PipelineConfig& config) {
  return config_json(config).dump(2);
}

void write_resolved_config(const PipelineConfig& config, const std::string& dir) {
  write_provenance(dir, config_json(config));
}

std::uint64_t path_id(const std::string& relative_path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : relative_path) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> list_images(const std::string& root) {
  std::vector<std::string> out;
  if (!fs::is_directory(root)) throw ConfigError("not a directory: " + root);
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png" || ext == ".ppm") {
      out.push_back(fs::relative(entry.path(), root).generic_string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& o) {
  const fs::path out(o.output_dir);
  const SceneSet set = make_scenes(o.scenes, o.seed, o.scene);
  std::vector<std::size_t> all(set.scenes.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  DatasetManifest manifest;
  for (std::size_t k : all) {
    const std::string rel = "images/" + scene_file(set.ids[k]);
    ensure_dir(out / "images");
    save_image(set.scenes[k].image, (out / rel).string());
    manifest.entries.push_back(
        {set.ids[k], rel, set.scenes[k].image.width, set.scenes[k].image.height});
  }
  save_annotations(scene_annotations(set, all, "images/"), (out / "annotations.json").string());
  save_manifest(manifest, (out / "manifest.jsonl").string());
  write_provenance(out, {{"command", "synth"},
                         {"seed", o.seed},
                         {"count", o.scenes.count},
                         {"size", o.scenes.size},
                         {"min_objects", o.scenes.min_objects},
                         {"max_objects", o.scenes.max_objects}});
  log_info("wrote " + std::to_string(set.scenes.size()) + " scenes to " + out.string());
  return 0;
}

int cmd_attack(const AttackOptionsCli& o) {
  o.perlin.validate();
  const auto rels = list_images(o.input_dir);
  const fs::path out(o.output_dir);
  ensure_dir(out);
  ordered_json resolved = {{"command", "attack"},
                           {"input_dir", o.input_dir},
                           {"perlin", perlin_json(o.perlin)},
                           {"per_channel", o.attack.per_channel},
                           {"fixed_field", o.attack.fixed_field}};
  write_provenance(out, resolved);
  if (rels.empty()) {
    log_warn("no images found under " + o.input_dir);
    return 0;
  }

  std::vector<std::string> errors(rels.size());
  std::vector<std::uint64_t> seeds(rels.size());
  parallel_for(rels.size(), o.threads, [&](std::size_t i) {
    const std::uint64_t id = path_id(rels[i]);
    seeds[i] = image_noise_seed(o.perlin.seed, id, o.attack);
    try {
      const ImageTensor img = load_image((fs::path(o.input_dir) / rels[i]).string());
      const std::uint64_t ids[1] = {id};
      auto r = attack_batch(std::span<const ImageTensor>(&img, 1), ids, o.perlin, o.attack);
      if (!r[0].image) throw std::runtime_error(r[0].error);
      const fs::path dst = out / rels[i];
      ensure_dir(dst.parent_path());
      save_image(*r[0].image, dst.string());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  ordered_json items = ordered_json::array();
  int failures = 0;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    ordered_json rec = {{"path", rels[i]}, {"id", path_id(rels[i])}, {"noise_seed", seeds[i]}};
    if (!errors[i].empty()) {
      ++failures;
      rec["error"] = errors[i];
      log_warn(rels[i] + ": " + errors[i]);
    }
    items.push_back(rec);
  }
  write_text(out / "attack_manifest.json",
             ordered_json({{"global_seed", o.perlin.seed},
                           {"perlin", perlin_json(o.perlin)},
                           {"images", items}})
                     .dump(2) +
                 "\n");
  log_info("attacked " + std::to_string(rels.size() - failures) + "/" +
           std::to_string(rels.size()) + " images into " + out.string());
  return failures == 0 ? 0 : 1;
}

int cmd_train(const TrainOptions& o) {
  const TrainConfig& tc = o.config.train;
  tc.validate();
  const fs::path out(o.output_dir);

  auto prepare = [&](const std::string& dir) {
    std::vector<LoadedImage> loaded = load_tree(dir, o.config.threads);
    for (const auto& l : loaded) {
      if (!l.error.empty()) throw ConfigError("loading " + l.rel + ": " + l.error);
    }
    return loaded;
  };
  auto fit = [&](const ImageTensor& img) {
    return resize_bilinear(img, tc.input_width, tc.input_height);
  };

  std::vector<ImageTensor> train_images;
  for (auto& l : prepare(o.train_dir)) train_images.push_back(fit(l.image));
  if (train_images.empty()) throw ConfigError("no training images under " + o.train_dir);

  std::vector<ImagePair> val;
  if (!o.val_clean_dir.empty() || !o.val_adv_dir.empty()) {
    if (o.val_clean_dir.empty() || o.val_adv_dir.empty()) {
      throw ConfigError("validation needs both --val-clean and --val-adv");
    }
    std::map<std::string, ImageTensor> clean;
    for (auto& l : prepare(o.val_clean_dir)) clean[l.rel] = fit(l.image);
    for (auto& l : prepare(o.val_adv_dir)) {
      auto it = clean.find(l.rel);
      if (it == clean.end()) throw ConfigError("no clean counterpart for " + l.rel);
      val.push_back({fit(l.image), it->second});
    }
  }

  AutoencoderModel model = o.resume.empty() ? build_model(o.model_seed)
                                            : load_checkpoint(o.resume);
  if (model.epoch >= tc.epochs) {
    log_warn("checkpoint already has " + std::to_string(model.epoch) +
             " epochs; nothing to train");
  }

  ensure_dir(out);
  ordered_json resolved = config_json(o.config);
  resolved["command"] = "train";
  resolved["train_dir"] = o.train_dir;
  resolved["val_clean_dir"] = o.val_clean_dir;
  resolved["val_adv_dir"] = o.val_adv_dir;
  resolved["resume"] = o.resume;
  resolved["model_seed"] = o.model_seed;
  write_provenance(out, resolved);

  const fs::path csv_path = out / "train_log.csv";
  const bool append = !o.resume.empty() && fs::exists(csv_path);
  std::ofstream csv(csv_path, append ? std::ios::app : std::ios::trunc);
  if (!csv) throw IoError("cannot open " + csv_path.string());
  if (!append) csv << "epoch,train_loss,val_loss,seconds\n";

  train(model, train_images, val, tc,
        [&](const EpochRecord& r, const AutoencoderModel& m, bool improved) {
          char line[160];
          std::snprintf(line, sizeof(line), "%u,%.9g,%.9g,%.3f\n", static_cast<unsigned>(r.epoch), r.train_loss,
                        r.val_loss, r.seconds);
          csv << line << std::flush;
          log_info("epoch " + std::to_string(r.epoch) + "/" + std::to_string(tc.epochs) +
                   " train " + std::to_string(r.train_loss) + " val " +
                   std::to_string(r.val_loss));
          if (improved) save_checkpoint(m, (out / "best_val.adnz").string());
          if (o.save_every_epoch) {
            char name[32];
            std::snprintf(name, sizeof(name), "epoch_%03u.adnz", static_cast<unsigned>(r.epoch));
            save_checkpoint(m, (out / name).string());
          }
        });
  save_checkpoint(model, (out / "final.adnz").string());
  return 0;
}

int cmd_denoise(const DenoiseOptions& o) {
  if (o.checkpoint.empty() || !fs::exists(o.checkpoint)) {
    throw ConfigError("checkpoint not found: " + o.checkpoint);
  }
  const AutoencoderModel model = load_checkpoint(o.checkpoint);
  const auto rels = list_images(o.input_dir);
  const fs::path out(o.output_dir);
  ensure_dir(out);
  write_provenance(out, {{"command", "denoise"},
                         {"checkpoint", o.checkpoint},
                         {"input_dir", o.input_dir},
                         {"model_epoch", model.epoch}});
  if (rels.empty()) {
    log_warn("no images found under " + o.input_dir);
    return 0;
  }
  std::vector<std::string> errors(rels.size());
  parallel_for(rels.size(), o.threads, [&](std::size_t i) {
    try {
      const ImageTensor img = load_image((fs::path(o.input_dir) / rels[i]).string());
      const fs::path dst = out / rels[i];
      ensure_dir(dst.parent_path());
      save_image(denoise_image(model.net, img), dst.string());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  int failures = 0;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    if (!errors[i].empty()) {
      ++failures;
      log_warn(rels[i] + ": " + errors[i]);
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_detect(const DetectOptions& o) {
  const AnnotationSet ann = load_annotations(o.annotations);
  const auto images = load_tree(o.input_dir, o.threads);
  std::vector<std::string> warnings;
  const auto dets = detect_tree(images, file_ids(ann), o.detector, o.threads, warnings);
  int failures = 0;
  for (const auto& l : images) {
    if (!l.error.empty()) {
      ++failures;
      log_warn(l.rel + ": " + l.error);
    }
  }
  for (const auto& w : warnings) log_warn(w);
  const fs::path out(o.output);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  save_detections(dets, out.string());
  log_info("wrote " + std::to_string(dets.size()) + " detections to " + out.string());
  return failures == 0 ? 0 : 1;
}

int cmd_eval(const EvalOptionsCli& o) {
  if (o.detections.empty()) throw ConfigError("eval needs at least one detections file");
  std::vector<std::string> names = o.names;
  if (names.empty()) {
    if (o.detections.size() == 3) {
      names = {"Normal", "Adversarial", "Autoencoder"};
    } else {
      for (const auto& d : o.detections) names.push_back(fs::path(d).stem().string());
    }
  }
  if (names.size() != o.detections.size()) {
    throw ConfigError("got " + std::to_string(names.size()) + " names for " +
                      std::to_string(o.detections.size()) + " detection files");
  }
  const AnnotationSet gt = load_annotations(o.gt);
  for (const auto& w : gt.warnings) log_warn(w);
  const auto rows = evaluate_files(gt, o.detections, names);
  const std::string table = format_condition_table(rows);
  std::cout << table;
  if (!o.output_dir.empty()) {
    const fs::path out(o.output_dir);
    ensure_dir(out);
    write_text(out / "eval_report.json", eval_json(rows, o.detections).dump(2) + "\n");
    write_text(out / "table.txt", table);
    write_provenance(out, {{"command", "eval"}, {"gt", o.gt}, {"detections", o.detections},
                           {"names", names}});
  }
  return 0;
}

int cmd_report(const std::string& path) {
  json root;
  try {
    root = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::vector<std::pair<std::string, EvalReport>> rows;
  const json& conds = root.at("conditions");
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const json& c = conds[i];
    EvalReport r;
    try {
      r.map = c.at("report").at("map").get<double>();
      r.map50 = c.at("report").at("map50").get<double>();
      r.map75 = c.at("report").at("map75").get<double>();
      rows.emplace_back(c.at("condition").get<std::string>(), r);
    } catch (const json::exception& e) {
      throw ParseError(path + ": conditions[" + std::to_string(i) + "]: " + e.what());
    }
  }
  std::cout << format_condition_table(rows);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_pipeline(const PipelineConfig& config, PipelineOutcome* outcome_out) {
  const fs::path out(config.output_dir);
  auto stage = [&](const char* name, auto&& body) {
    log_info("stage " + std::string(name));
    try {
      body();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("pipeline stage '") + name + "': " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("pipeline stage '") + name + "' failed: " + e.what());
    }
  };

  PipelineConfig resolved = config;
  resolved.perlin.seed = derive_seed(config.seed, kAttackStream);
  resolved.train.seed = derive_seed(config.seed, kTrainStream);
  if (resolved.scenes.size != resolved.train.input_width ||
      resolved.scenes.size != resolved.train.input_height) {
    throw ConfigError("scene size " + std::to_string(resolved.scenes.size) +
                      " must equal the training input size");
  }
  ensure_dir(out);
  write_resolved_config(resolved, out.string());

  SceneSet scenes;
  std::vector<std::size_t> train_idx, test_idx;
  stage("synth", [&] {
    scenes = make_scenes(resolved.scenes, derive_seed(config.seed, kSceneStream), SceneConfig{});
    std::vector<std::size_t> all(scenes.scenes.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    ensure_dir(out / "scenes");
    for (std::size_t k : all) {
      save_image(scenes.scenes[k].image, (out / "scenes" / scene_file(scenes.ids[k])).string());
    }
    save_annotations(scene_annotations(scenes, all, ""), (out / "scenes/annotations.json").string());
  });

  stage("split", [&] {
    DatasetManifest m;
    for (std::size_t k = 0; k < scenes.ids.size(); ++k) {
      m.entries.push_back({scenes.ids[k], "scenes/" + scene_file(scenes.ids[k]),
                           resolved.scenes.size, resolved.scenes.size});
    }
    auto [train_m, test_m] =
        split_dataset(m, resolved.scenes.train_fraction, derive_seed(config.seed, kSplitStream));
    save_manifest(train_m, (out / "train.jsonl").string());
    save_manifest(test_m, (out / "test.jsonl").string());
    for (const auto& e : train_m.entries) train_idx.push_back(static_cast<std::size_t>(e.id - 1));
    for (const auto& e : test_m.entries) test_idx.push_back(static_cast<std::size_t>(e.id - 1));
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    if (train_idx.empty() || test_idx.empty()) throw ConfigError("split produced an empty side");
  });

  const fs::path test_dir = out / "test";
  stage("attack", [&] {
    ensure_dir(test_dir / "clean");
    ensure_dir(test_dir / "attacked");
    save_annotations(scene_annotations(scenes, test_idx, ""),
                     (test_dir / "annotations.json").string());
    std::vector<ImageTensor> clean;
    std::vector<std::uint64_t> ids;
    for (std::size_t k : test_idx) {
      clean.push_back(scenes.scenes[k].image);
      ids.push_back(static_cast<std::uint64_t>(scenes.ids[k]));
    }
    std::vector<AttackResult> results(clean.size());
    parallel_for(clean.size(), resolved.threads, [&](std::size_t i) {
      results[i] = attack_batch(std::span<const ImageTensor>(&clean[i], 1),
                                std::span<const std::uint64_t>(&ids[i], 1), resolved.perlin)[0];
    });
    ordered_json items = ordered_json::array();
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (!results[i].image) throw std::runtime_error(results[i].error);
      const std::string name = scene_file(static_cast<std::int64_t>(ids[i]));
      save_image(clean[i], (test_dir / "clean" / name).string());
      save_image(*results[i].image, (test_dir / "attacked" / name).string());
      items.push_back({{"path", name}, {"id", ids[i]}, {"noise_seed", results[i].noise_seed}});
    }
    write_text(test_dir / "attacked" / "attack_manifest.json",
               ordered_json({{"global_seed", resolved.perlin.seed},
                             {"perlin", perlin_json(resolved.perlin)},
                             {"images", items}})
                       .dump(2) +
                   "\n");
  });

  // Everything downstream reads the files back, as an external detector would.
  auto reload = [&](const fs::path& dir) {
    std::vector<ImageTensor> imgs;
    for (std::size_t k : test_idx) {
      imgs.push_back(load_image((dir / scene_file(scenes.ids[k])).string()));
    }
    return imgs;
  };

  const fs::path ckpt_dir = out / "checkpoints";
  AutoencoderModel model;
  stage("train", [&] {
    const std::string existing =
        config.checkpoint.empty() ? (ckpt_dir / "final.adnz").string() : config.checkpoint;
    if (config.skip_train) {
      if (!fs::exists(existing)) throw ConfigError("--skip-train but no checkpoint at " + existing);
      model = load_checkpoint(existing);
      log_info("skipping training; loaded " + existing);
      return;
    }
    std::vector<ImageTensor> train_images;
    for (std::size_t k : train_idx) {
      train_images.push_back(load_image((out / "scenes" / scene_file(scenes.ids[k])).string()));
    }
    const auto clean = reload(test_dir / "clean");
    const auto attacked = reload(test_dir / "attacked");
    std::vector<ImagePair> val;
    for (std::size_t i = 0; i < clean.size(); ++i) val.push_back({attacked[i], clean[i]});

    ensure_dir(ckpt_dir);
    std::ofstream csv(out / "train_log.csv", std::ios::trunc);
    csv << "epoch,train_loss,val_loss,seconds\n";
    model = build_model(derive_seed(config.seed, kModelStream));
    train(model, train_images, val, resolved.train,
          [&](const EpochRecord& r, const AutoencoderModel& m, bool improved) {
            char line[160];
            std::snprintf(line, sizeof(line), "%u,%.9g,%.9g,%.3f\n", static_cast<unsigned>(r.epoch), r.train_loss,
                          r.val_loss, r.seconds);
            csv << line << std::flush;
            log_info("epoch " + std::to_string(r.epoch) + " train " +
                     std::to_string(r.train_loss) + " val " + std::to_string(r.val_loss));
            if (improved) save_checkpoint(m, (ckpt_dir / "best_val.adnz").string());
          });
    save_checkpoint(model, (ckpt_dir / "final.adnz").string());
  });

  stage("denoise", [&] {
    const auto attacked = reload(test_dir / "attacked");
    std::vector<ImageTensor> denoised(attacked.size());
    parallel_for(attacked.size(), resolved.threads,
                 [&](std::size_t i) { denoised[i] = denoise_image(model.net, attacked[i]); });
    ensure_dir(test_dir / "denoised");
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      save_image(denoised[i], (test_dir / "denoised" / scene_file(scenes.ids[test_idx[i]])).string());
    }
  });

  const std::vector<std::pair<std::string, std::string>> conditions = {
      {"Normal", "clean"}, {"Adversarial", "attacked"}, {"Autoencoder", "denoised"}};
  std::vector<std::string> det_files;
  stage("detect", [&] {
    const AnnotationSet gt = load_annotations((test_dir / "annotations.json").string());
    const auto ids = file_ids(gt);
    ensure_dir(out / "detections");
    for (const auto& [name, sub] : conditions) {
      const auto images = load_tree((test_dir / sub).string(), resolved.threads);
      std::vector<std::string> warnings;
      const auto dets = detect_tree(images, ids, DetectorConfig{}, resolved.threads, warnings);
      for (const auto& w : warnings) log_warn(w);
      const fs::path file = out / "detections" / (sub + ".json");
      save_detections(dets, file.string());
      det_files.push_back(file.string());
    }
  });

  PipelineOutcome outcome;
  stage("eval", [&] {
    const AnnotationSet gt = load_annotations((test_dir / "annotations.json").string());
    std::vector<std::string> names;
    for (const auto& c : conditions) names.push_back(c.first);
    const auto rows = evaluate_files(gt, det_files, names);
    std::vector<std::string> rel_sources;
    for (const auto& f : det_files) rel_sources.push_back(fs::relative(f, out).generic_string());
    write_text(out / "eval_report.json", eval_json(rows, rel_sources).dump(2) + "\n");
    const std::string table = format_condition_table(rows);
    write_text(out / "report.txt", table);
    std::cout << table;

    const auto clean = reload(test_dir / "clean");
    const auto attacked = reload(test_dir / "attacked");
    const auto denoised = reload(test_dir / "denoised");
    for (std::size_t i = 0; i < clean.size(); ++i) {
      outcome.mse_attacked += image_mse(attacked[i], clean[i]);
      outcome.mse_denoised += image_mse(denoised[i], clean[i]);
    }
    outcome.mse_attacked /= static_cast<double>(clean.size());
    outcome.mse_denoised /= static_cast<double>(clean.size());
    outcome.map50_clean = rows[0].second.map50;
    outcome.map50_attacked = rows[1].second.map50;
    outcome.map50_denoised = rows[2].second.map50;
    outcome.attack_degrades = outcome.map50_attacked <= 0.8 * outcome.map50_clean;
    outcome.defense_recovers = outcome.map50_denoised >= outcome.map50_attacked + 0.02;
    outcome.mse_improves = outcome.mse_denoised < outcome.mse_attacked;

    ordered_json summary = {
        {"map50", {{"normal", outcome.map50_clean},
                   {"adversarial", outcome.map50_attacked},
                   {"autoencoder", outcome.map50_denoised}}},
        {"mse", {{"adversarial", outcome.mse_attacked}, {"autoencoder", outcome.mse_denoised}}},
        {"checks", {{"attack_degrades_map50_by_20pct", outcome.attack_degrades},
                    {"defense_recovers_map50_by_0.02", outcome.defense_recovers},
                    {"denoised_mse_below_attacked", outcome.mse_improves}}},
        {"passed", outcome.passed()}};
    write_text(out / "pipeline_report.json", summary.dump(2) + "\n");
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "attack degrades mAP@50 >= 20%%: %s\ndefense recovers mAP@50 >= 0.02: %s\n"
                  "MSE(denoised) %.6f < MSE(attacked) %.6f: %s\n",
                  outcome.attack_degrades ? "yes" : "no", outcome.defense_recovers ? "yes" : "no",
                  outcome.mse_denoised, outcome.mse_attacked, outcome.mse_improves ? "yes" : "no");
    std::cout << buf;
  });

  if (outcome_out) *outcome_out = outcome;
  return outcome.passed() ? 0 : 3;
}

}  // namespace advdenoise::cli
