// Command-line front end for the site-recognition pipeline: data ingestion,
// synthetic benchmarks, purification, training, evaluation protocols, and a
// registry server/client. Every subcommand is reproducible from (config,
// seed) and writes its reports under --out.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "siterec/catalog.hpp"
#include "siterec/classifier.hpp"
#include "siterec/context.hpp"
#include "siterec/eval.hpp"
#include "siterec/geo.hpp"
#include "siterec/purify.hpp"
#include "siterec/registry.hpp"
#include "siterec/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace siterec;

namespace {

struct CommonArgs {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string config_path;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--seed", args.seed, "Master RNG seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out", args.out_dir, "Output directory");
}

json load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return json::object();
  std::ifstream in(args.config_path);
  if (!in) throw InvalidConfig("cannot open config '" + args.config_path + "'");
  json j;
  in >> j;
  if (!j.is_object()) throw InvalidConfig("config root must be a JSON object");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write '" + path.string() + "'");
  out << text;
}

void write_report(const fs::path& dir, const std::string& name,
                  const json& report) {
  write_text(dir / name, report.dump(2) + "\n");
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// ------------------------------------------------------- config sections

SynthConfig synth_from_json(const json& root, const CommonArgs& args) {
  const json j = root.value("synth", json::object());
  SynthConfig cfg;
  cfg.num_sites = j.value("num_sites", cfg.num_sites);
  cfg.images_per_site = j.value("images_per_site", cfg.images_per_site);
  cfg.dimension = j.value("dimension", cfg.dimension);
  cfg.prototype_concentration =
      j.value("prototype_concentration", cfg.prototype_concentration);
  cfg.inlier_noise = j.value("inlier_noise", cfg.inlier_noise);
  cfg.outlier_fraction = j.value("outlier_fraction", cfg.outlier_fraction);
  cfg.chaotic_class_fraction =
      j.value("chaotic_class_fraction", cfg.chaotic_class_fraction);
  if (j.contains("geo_bbox")) {
    const json& b = j.at("geo_bbox");
    cfg.geo_bbox = LatLonBounds{b.at("lat_min"), b.at("lat_max"),
                                b.at("lon_min"), b.at("lon_max")};
  }
  cfg.seed = j.value("seed", cfg.seed);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

json synth_to_json(const SynthConfig& cfg) {
  return {{"num_sites", cfg.num_sites},
          {"images_per_site", cfg.images_per_site},
          {"dimension", cfg.dimension},
          {"prototype_concentration", cfg.prototype_concentration},
          {"inlier_noise", cfg.inlier_noise},
          {"outlier_fraction", cfg.outlier_fraction},
          {"chaotic_class_fraction", cfg.chaotic_class_fraction},
          {"geo_bbox",
           {{"lat_min", cfg.geo_bbox.lat_min},
            {"lat_max", cfg.geo_bbox.lat_max},
            {"lon_min", cfg.geo_bbox.lon_min},
            {"lon_max", cfg.geo_bbox.lon_max}}},
          {"seed", cfg.seed}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig cfg;
  cfg.lr = j.value("lr", cfg.lr);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.shuffle = j.value("shuffle", cfg.shuffle);
  return cfg;
}

json train_to_json(const TrainConfig& cfg) {
  return {{"lr", cfg.lr},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"seed", cfg.seed},
          {"shuffle", cfg.shuffle}};
}

PurifyConfig purify_from_json(const json& j) {
  PurifyConfig cfg;
  cfg.jsd_threshold = j.value("jsd_threshold", cfg.jsd_threshold);
  cfg.kld_threshold = j.value("kld_threshold", cfg.kld_threshold);
  cfg.min_images_after = j.value("min_images_after", cfg.min_images_after);
  return cfg;
}

json purify_to_json(const PurifyConfig& cfg) {
  return {{"jsd_threshold", cfg.jsd_threshold},
          {"kld_threshold", cfg.kld_threshold},
          {"min_images_after", cfg.min_images_after}};
}

ProtocolConfig protocol_from_json(const json& root, const CommonArgs& args) {
  const json j = root.value("protocol", json::object());
  ProtocolConfig cfg;
  cfg.cv_iterations = j.value("cv_iterations", cfg.cv_iterations);
  cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
  cfg.train = train_from_json(j.value("train", json::object()));
  cfg.purify = purify_from_json(j.value("purify", json::object()));
  cfg.seed = j.value("seed", cfg.seed);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

json protocol_to_json(const ProtocolConfig& cfg) {
  return {{"cv_iterations", cfg.cv_iterations},
          {"train_fraction", cfg.train_fraction},
          {"train", train_to_json(cfg.train)},
          {"purify", purify_to_json(cfg.purify)},
          {"seed", cfg.seed}};
}

ContextConfig context_from_json(const json& j) {
  ContextConfig cfg;
  cfg.radius_m = j.value("radius_m", cfg.radius_m);
  cfg.half_angle_deg = j.value("half_angle_deg", cfg.half_angle_deg);
  cfg.enable_location = j.value("enable_location", cfg.enable_location);
  cfg.enable_orientation =
      j.value("enable_orientation", cfg.enable_orientation);
  cfg.enable_attention = j.value("enable_attention", cfg.enable_attention);
  return cfg;
}

json context_to_json(const ContextConfig& cfg) {
  return {{"radius_m", cfg.radius_m},
          {"half_angle_deg", cfg.half_angle_deg},
          {"enable_location", cfg.enable_location},
          {"enable_orientation", cfg.enable_orientation},
          {"enable_attention", cfg.enable_attention}};
}

WildConfig wild_from_json(const json& root, const CommonArgs& args) {
  const json j = root.value("wild", json::object());
  WildConfig cfg;
  cfg.n_queries = j.value("n_queries", cfg.n_queries);
  cfg.gps_sigma_m = j.value("gps_sigma_m", cfg.gps_sigma_m);
  cfg.compass_sigma_deg = j.value("compass_sigma_deg", cfg.compass_sigma_deg);
  cfg.view_distance_m = j.value("view_distance_m", cfg.view_distance_m);
  cfg.query_noise = j.value("query_noise", cfg.query_noise);
  cfg.attention_noise = j.value("attention_noise", cfg.attention_noise);
  cfg.context = context_from_json(j.value("context", json::object()));
  cfg.seed = j.value("seed", cfg.seed);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

json wild_to_json(const WildConfig& cfg) {
  return {{"n_queries", cfg.n_queries},
          {"gps_sigma_m", cfg.gps_sigma_m},
          {"compass_sigma_deg", cfg.compass_sigma_deg},
          {"view_distance_m", cfg.view_distance_m},
          {"query_noise", cfg.query_noise},
          {"attention_noise", cfg.attention_noise},
          {"context", context_to_json(cfg.context)},
          {"seed", cfg.seed}};
}

// --------------------------------------------------------------- file IO

CatalogFormat catalog_format(const std::string& s) {
  if (s == "csv") return CatalogFormat::csv;
  if (s == "jsonl") return CatalogFormat::jsonl;
  throw InvalidConfig("unknown catalog format '" + s + "'");
}

FeatureFormat feature_format(const std::string& s) {
  if (s == "jsonl") return FeatureFormat::jsonl;
  if (s == "binary") return FeatureFormat::packed_binary;
  throw InvalidConfig("unknown feature format '" + s + "'");
}

SiteCatalog load_catalog(const std::string& path, const std::string& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open catalog '" + path + "'");
  return parse_catalog(in, catalog_format(format));
}

FeatureDataset load_features(const std::string& path,
                             const std::string& format,
                             const ParseOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open features '" + path + "'");
  return parse_features(in, feature_format(format), opts);
}

void save_catalog(const fs::path& path, const SiteCatalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  write_catalog(out, catalog, CatalogFormat::csv);
}

void save_features(const fs::path& path, const FeatureDataset& dataset,
                   FeatureFormat format) {
  std::ofstream out(path, std::ios::binary);
  write_features(out, dataset, format);
}

json cv_to_json(const CvResult& r) {
  return {{"mean", r.mean},
          {"stddev", r.stddev},
          {"per_iteration", r.per_iteration}};
}

// ------------------------------------------------------------ subcommands

int cmd_ingest(const CommonArgs& args, const std::string& catalog_path,
               const std::string& catalog_fmt, const std::string& features_path,
               const std::string& features_fmt,
               std::size_t max_images_per_site) {
  const SiteCatalog catalog = load_catalog(catalog_path, catalog_fmt);
  ParseOptions opts;
  opts.catalog = &catalog;
  opts.max_images_per_site = max_images_per_site;
  const FeatureDataset dataset =
      load_features(features_path, features_fmt, opts);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  save_catalog(out / "catalog.csv", catalog);
  save_features(out / "features.jsonl", dataset, FeatureFormat::jsonl);

  const LatLonBounds b = catalog.bounds();
  json report{
      {"command", "ingest"},
      {"config",
       {{"catalog", catalog_path},
        {"catalog_format", catalog_fmt},
        {"features", features_path},
        {"features_format", features_fmt},
        {"max_images_per_site", max_images_per_site}}},
      {"sites", catalog.size()},
      {"images", dataset.images.size()},
      {"dimension", dataset.dimension},
      {"bounds",
       {{"lat_min", b.lat_min},
        {"lat_max", b.lat_max},
        {"lon_min", b.lon_min},
        {"lon_max", b.lon_max}}}};
  write_report(out, "ingest_report.json", report);
  std::cout << "ingested " << catalog.size() << " sites, "
            << dataset.images.size() << " images\n";
  return 0;
}

int cmd_generate(const CommonArgs& args) {
  const SynthConfig cfg = synth_from_json(load_config(args), args);
  const SynthOutput synth = generate_synthetic(cfg);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  save_catalog(out / "catalog.csv", synth.catalog);
  save_features(out / "features.jsonl", synth.dataset, FeatureFormat::jsonl);

  json truth{{"chaotic_sites", synth.truth.chaotic_sites},
             {"outlier_images", synth.truth.outlier_images}};
  write_report(out, "truth.json", truth);

  json report{{"command", "generate"},
              {"config", {{"synth", synth_to_json(cfg)}}},
              {"sites", synth.catalog.size()},
              {"images", synth.dataset.images.size()},
              {"chaotic_sites", synth.truth.chaotic_sites.size()},
              {"outlier_images", synth.truth.outlier_images.size()}};
  write_report(out, "generate_report.json", report);
  std::cout << "generated " << synth.catalog.size() << " sites, "
            << synth.dataset.images.size() << " images\n";
  return 0;
}

int cmd_tile(const CommonArgs& args, const std::string& catalog_path,
             const std::string& catalog_fmt, double size_m, double overlap_m) {
  const SiteCatalog catalog = load_catalog(catalog_path, catalog_fmt);
  const Tiling tiling = tile_area(catalog.bounds(), size_m, overlap_m);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  write_text(out / "tiling.json", tiling_to_json(tiling));

  json regions = json::array();
  for (const auto& r : tiling.regions) {
    regions.push_back(
        {{"region_id", r.region_id},
         {"sites", sites_in_region(catalog, r).size()}});
  }
  json report{{"command", "tile"},
              {"config",
               {{"catalog", catalog_path},
                {"region_size_m", size_m},
                {"overlap_m", overlap_m}}},
              {"regions", regions}};
  write_report(out, "tile_report.json", report);
  std::cout << "tiled into " << tiling.regions.size() << " regions\n";
  return 0;
}

int cmd_purify(const CommonArgs& args, const std::string& features_path,
               const std::string& features_fmt) {
  const json root = load_config(args);
  const PurifyConfig cfg =
      purify_from_json(root.value("purify", json::object()));
  const FeatureDataset dataset = load_features(features_path, features_fmt);
  const PurifiedDataset purified = purify_dataset(dataset, cfg);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  save_features(out / "purified.jsonl", purified.dataset,
                FeatureFormat::jsonl);
  {
    std::ofstream csv(out / "cohesion.csv", std::ios::binary);
    write_cohesion_csv(csv, purified.cohesion);
  }
  {
    std::ofstream csv(out / "denoise.csv", std::ios::binary);
    write_denoise_csv(csv, purified.denoise);
  }
  json report{
      {"command", "purify"},
      {"config", {{"purify", purify_to_json(cfg)}, {"features", features_path}}},
      {"images_in", dataset.images.size()},
      {"images_out", purified.dataset.images.size()},
      {"classes_removed_fraction", purified.stats.classes_removed_fraction},
      {"images_removed_fraction", purified.stats.images_removed_fraction}};
  write_report(out, "purify_report.json", report);
  std::cout << "kept " << purified.dataset.images.size() << " of "
            << dataset.images.size() << " images\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& features_path,
              const std::string& features_fmt, const std::string& region_id) {
  const json root = load_config(args);
  TrainConfig cfg = train_from_json(root.value("train", json::object()));
  if (args.seed_set) cfg.seed = args.seed;
  const FeatureDataset dataset = load_features(features_path, features_fmt);
  const RegionModel model = train_region_model(dataset, cfg, region_id);
  const auto blob = serialize_model(model);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  std::ofstream bin(out / "model.grm", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
  bin.close();

  json report{{"command", "train"},
              {"config", {{"train", train_to_json(cfg)},
                          {"features", features_path},
                          {"region_id", region_id}}},
              {"sites", model.site_ids.size()},
              {"dimension", dataset.dimension},
              {"train_size", model.meta.train_size},
              {"content_hash", sha256_hex(blob.data(), blob.size())},
              {"train_accuracy", evaluate_top1(model, dataset)}};
  write_report(out, "train_report.json", report);
  std::cout << "trained " << region_id << " over " << model.site_ids.size()
            << " sites\n";
  return 0;
}

// Source-quality comparison: a curated low-noise preset vs a mixed
// high-noise preset of the same synthetic world, plus the purify on/off
// comparison on a planted-outlier dataset.
int cmd_eval(const CommonArgs& args) {
  const json root = load_config(args);
  SynthConfig base = synth_from_json(root, args);
  const ProtocolConfig protocol = protocol_from_json(root, args);

  SynthConfig curated = base;
  curated.outlier_fraction = 0.0;
  curated.chaotic_class_fraction = 0.0;
  SynthConfig mixed = base;
  if (mixed.outlier_fraction == 0.0) mixed.outlier_fraction = 0.2;
  if (mixed.chaotic_class_fraction == 0.0) mixed.chaotic_class_fraction = 0.1;

  const SynthOutput curated_out = generate_synthetic(curated);
  const SynthOutput mixed_out = generate_synthetic(mixed);

  const CvResult curated_cv =
      monte_carlo_cv(curated_out.dataset, protocol, false);
  const CvResult mixed_cv = monte_carlo_cv(mixed_out.dataset, protocol, false);
  const CvResult raw_cv = mixed_cv;
  const CvResult purified_cv =
      monte_carlo_cv(mixed_out.dataset, protocol, true);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "fig5_sources.csv", std::ios::binary);
    write_cv_csv(csv, "curated", curated_cv, "mixed", mixed_cv);
  }
  {
    std::ofstream csv(out / "fig6_filter.csv", std::ios::binary);
    write_cv_csv(csv, "unfiltered", raw_cv, "filtered", purified_cv);
  }
  json report{{"command", "eval"},
              {"config",
               {{"synth", synth_to_json(base)},
                {"protocol", protocol_to_json(protocol)}}},
              {"curated", cv_to_json(curated_cv)},
              {"mixed", cv_to_json(mixed_cv)},
              {"unfiltered", cv_to_json(raw_cv)},
              {"filtered", cv_to_json(purified_cv)}};
  write_report(out, "eval_report.json", report);
  std::cout << "curated " << curated_cv.mean << ", mixed " << mixed_cv.mean
            << ", filtered " << purified_cv.mean << "\n";
  return 0;
}

int cmd_sweep_images(const CommonArgs& args) {
  const json root = load_config(args);
  const SynthConfig synth_cfg = synth_from_json(root, args);
  const ProtocolConfig protocol = protocol_from_json(root, args);
  std::vector<std::size_t> m_values =
      root.value("m_values", std::vector<std::size_t>{5, 10, 20, 40, 70, 80});

  const SynthOutput synth = generate_synthetic(synth_cfg);
  const auto points =
      sweep_images_per_class(synth.dataset, m_values, protocol, false);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "fig7_images.csv", std::ios::binary);
    write_image_sweep_csv(csv, points);
  }
  json rows = json::array();
  for (const auto& p : points) {
    rows.push_back({{"m", p.m}, {"result", cv_to_json(p.result)}});
  }
  json report{{"command", "sweep-images"},
              {"config",
               {{"synth", synth_to_json(synth_cfg)},
                {"protocol", protocol_to_json(protocol)},
                {"m_values", m_values}}},
              {"points", rows}};
  write_report(out, "sweep_images_report.json", report);
  std::cout << "swept " << points.size() << " image counts\n";
  return 0;
}

int cmd_sweep_area(const CommonArgs& args) {
  const json root = load_config(args);
  const SynthConfig synth_cfg = synth_from_json(root, args);
  const ProtocolConfig protocol = protocol_from_json(root, args);
  std::vector<double> sizes =
      root.value("sizes_m", std::vector<double>{1000, 1414, 2000, 2828, 4000});
  const double overlap_m = root.value("overlap_m", 100.0);

  const SynthOutput synth = generate_synthetic(synth_cfg);
  const auto points = sweep_area_size(synth.catalog, synth.dataset, sizes,
                                      overlap_m, protocol, false);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "fig8_area.csv", std::ios::binary);
    write_area_sweep_csv(csv, points);
  }
  json rows = json::array();
  for (const auto& p : points) {
    rows.push_back({{"size_m", p.size_m},
                    {"mean_accuracy", p.mean_accuracy},
                    {"regions_used", p.regions_used},
                    {"regions_skipped", p.regions_skipped},
                    {"mean_sites_per_region", p.mean_sites_per_region}});
  }
  json report{{"command", "sweep-area"},
              {"config",
               {{"synth", synth_to_json(synth_cfg)},
                {"protocol", protocol_to_json(protocol)},
                {"sizes_m", sizes},
                {"overlap_m", overlap_m}}},
              {"points", rows}};
  write_report(out, "sweep_area_report.json", report);
  std::cout << "swept " << points.size() << " region sizes\n";
  return 0;
}

int cmd_confusion(const CommonArgs& args) {
  const json root = load_config(args);
  const SynthConfig synth_cfg = synth_from_json(root, args);
  TrainConfig train_cfg = train_from_json(root.value("train", json::object()));
  if (args.seed_set) train_cfg.seed = args.seed;

  const SynthOutput synth = generate_synthetic(synth_cfg);
  const RegionModel model =
      train_region_model(synth.dataset, train_cfg, "all");
  const ConfusionReport rep =
      confusion_by_category(model, synth.dataset, synth.catalog);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "table1_confusion.csv", std::ios::binary);
    write_confusion_csv(csv, rep);
  }
  json report{{"command", "confusion"},
              {"config",
               {{"synth", synth_to_json(synth_cfg)},
                {"train", train_to_json(train_cfg)}}},
              {"categories", rep.categories},
              {"same_category_correct", rep.same_category_correct}};
  write_report(out, "confusion_report.json", report);
  std::cout << "confusion over " << rep.categories.size() << " categories\n";
  return 0;
}

int cmd_wild(const CommonArgs& args) {
  const json root = load_config(args);
  const SynthConfig synth_cfg = synth_from_json(root, args);
  TrainConfig train_cfg = train_from_json(root.value("train", json::object()));
  const WildConfig wild_cfg = wild_from_json(root, args);

  const SynthOutput synth = generate_synthetic(synth_cfg);
  const RegionModel model =
      train_region_model(synth.dataset, train_cfg, "all");
  const auto cells = simulate_wild(synth.catalog, model, synth.truth,
                                   synth_cfg.prototype_concentration,
                                   wild_cfg);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "fig10_context.csv", std::ios::binary);
    write_wild_csv(csv, cells);
  }
  json rows = json::array();
  for (const auto& c : cells) {
    rows.push_back({{"location", c.location},
                    {"orientation", c.orientation},
                    {"attention", c.attention},
                    {"correct", c.correct},
                    {"no_candidate", c.no_candidate},
                    {"accuracy", c.accuracy},
                    {"na", c.na}});
  }
  json report{{"command", "wild"},
              {"config",
               {{"synth", synth_to_json(synth_cfg)},
                {"train", train_to_json(train_cfg)},
                {"wild", wild_to_json(wild_cfg)}}},
              {"cells", rows}};
  write_report(out, "wild_report.json", report);
  std::cout << "simulated " << wild_cfg.n_queries << " wild queries over "
            << cells.size() << " ablation cells\n";
  return 0;
}

volatile std::sig_atomic_t g_interrupted = 0;

int cmd_serve(const std::string& tiling_path, const std::string& addr,
              std::uint16_t port) {
  std::ifstream in(tiling_path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open tiling '" + tiling_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Registry registry(tiling_from_json(buf.str()));
  RegistryServer server(registry, addr, port);
  std::cout << "serving " << registry.tiling().regions.size()
            << " regions on " << addr << ":" << server.port() << "\n";
  std::signal(SIGINT, [](int) { g_interrupted = 1; });
  std::signal(SIGTERM, [](int) { g_interrupted = 1; });
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  return 0;
}

int cmd_publish(const std::string& host, std::uint16_t port,
                const std::string& region_id, const std::string& model_path) {
  RegistryClient client(host, port);
  const auto m = client.publish(region_id, read_binary(model_path));
  json j{{"region_id", m.region_id},
         {"version", m.version},
         {"content_hash", m.content_hash},
         {"byte_size", m.byte_size}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fetch(const CommonArgs& args, const std::string& host,
              std::uint16_t port, const std::string& region_id,
              std::uint32_t version, bool version_set,
              const std::string& if_hash) {
  RegistryClient client(host, port);
  std::optional<std::uint32_t> v;
  if (version_set) v = version;
  std::optional<std::string> h;
  if (!if_hash.empty()) h = if_hash;
  const FetchResult res = client.fetch(region_id, v, h);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  json manifest{{"region_id", res.manifest.region_id},
                {"version", res.manifest.version},
                {"content_hash", res.manifest.content_hash},
                {"byte_size", res.manifest.byte_size},
                {"not_modified", res.not_modified}};
  write_report(out, "manifest.json", manifest);
  if (!res.not_modified) {
    std::ofstream bin(out / "model.grm", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(res.blob->data()),
              static_cast<std::streamsize>(res.blob->size()));
  }
  std::cout << (res.not_modified ? "not modified" : "fetched") << " version "
            << res.manifest.version << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-space site recognition pipeline"};
  app.require_subcommand(1);

  CommonArgs args;

  std::string catalog_path, features_path, region_id, tiling_path, model_path;
  std::string catalog_fmt = "csv";
  std::string features_fmt = "jsonl";
  std::string host = "127.0.0.1";
  std::string addr = "0.0.0.0";
  std::string if_hash;
  std::size_t max_images = 0;
  double size_m = 1000.0, overlap_m = 200.0;
  std::uint16_t port = 7070;
  std::uint32_t version = 0;
  bool version_set = false;

  auto* ingest = app.add_subcommand("ingest", "Validate catalog and features");
  add_common(ingest, args);
  ingest->add_option("--catalog", catalog_path)->required();
  ingest->add_option("--catalog-format", catalog_fmt)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  ingest->add_option("--features", features_path)->required();
  ingest->add_option("--features-format", features_fmt)
      ->check(CLI::IsMember({"jsonl", "binary"}));
  ingest->add_option("--max-images-per-site", max_images);

  auto* generate = app.add_subcommand("generate", "Generate synthetic data");
  add_common(generate, args);

  auto* tile = app.add_subcommand("tile", "Tile catalog bounds into regions");
  add_common(tile, args);
  tile->add_option("--catalog", catalog_path)->required();
  tile->add_option("--catalog-format", catalog_fmt)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  tile->add_option("--size-m", size_m);
  tile->add_option("--overlap-m", overlap_m);

  auto* purify = app.add_subcommand("purify", "Two-stage dataset filtering");
  add_common(purify, args);
  purify->add_option("--features", features_path)->required();
  purify->add_option("--features-format", features_fmt)
      ->check(CLI::IsMember({"jsonl", "binary"}));

  auto* train = app.add_subcommand("train", "Train a region model");
  add_common(train, args);
  train->add_option("--features", features_path)->required();
  train->add_option("--features-format", features_fmt)
      ->check(CLI::IsMember({"jsonl", "binary"}));
  train->add_option("--region-id", region_id)->required();

  auto* eval = app.add_subcommand("eval", "Source and filter comparisons");
  add_common(eval, args);

  auto* sweep_images = app.add_subcommand("sweep-images",
                                          "Accuracy vs images per class");
  add_common(sweep_images, args);

  auto* sweep_area = app.add_subcommand("sweep-area",
                                        "Accuracy vs region size");
  add_common(sweep_area, args);

  auto* confusion = app.add_subcommand("confusion",
                                       "Category confusion matrix");
  add_common(confusion, args);

  auto* wild = app.add_subcommand("wild", "Mobile-context ablation");
  add_common(wild, args);

  auto* serve = app.add_subcommand("serve", "Run the model registry server");
  add_common(serve, args);
  serve->add_option("--tiling", tiling_path)->required();
  serve->add_option("--addr", addr);
  serve->add_option("--port", port);

  auto* publish = app.add_subcommand("publish", "Publish a model blob");
  add_common(publish, args);
  publish->add_option("--host", host);
  publish->add_option("--port", port);
  publish->add_option("--region-id", region_id)->required();
  publish->add_option("--model", model_path)->required();

  auto* fetch = app.add_subcommand("fetch", "Fetch a model blob");
  add_common(fetch, args);
  fetch->add_option("--host", host);
  fetch->add_option("--port", port);
  fetch->add_option("--region-id", region_id)->required();
  fetch->add_option("--version", version)
      ->each([&version_set](const std::string&) { version_set = true; });
  fetch->add_option("--if-hash", if_hash);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      return cmd_ingest(args, catalog_path, catalog_fmt, features_path,
                        features_fmt, max_images);
    }
    if (generate->parsed()) return cmd_generate(args);
    if (tile->parsed()) {
      return cmd_tile(args, catalog_path, catalog_fmt, size_m, overlap_m);
    }
    if (purify->parsed()) return cmd_purify(args, features_path, features_fmt);
    if (train->parsed()) {
      return cmd_train(args, features_path, features_fmt, region_id);
    }
    if (eval->parsed()) return cmd_eval(args);
    if (sweep_images->parsed()) return cmd_sweep_images(args);
    if (sweep_area->parsed()) return cmd_sweep_area(args);
    if (confusion->parsed()) return cmd_confusion(args);
    if (wild->parsed()) return cmd_wild(args);
    if (serve->parsed()) return cmd_serve(tiling_path, addr, port);
    if (publish->parsed()) return cmd_publish(host, port, region_id, model_path);
    if (fetch->parsed()) {
      return cmd_fetch(args, host, port, region_id, version, version_set,
                       if_hash);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
