#include "siterec/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace siterec {

namespace {

constexpr char kFeatureMagic[4] = {'G', 'F', 'D', '1'};

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw MalformedRow("line " + std::to_string(line_no) +
                       ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

double parse_double(const std::string& s, std::size_t line_no,
                    const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw MalformedRow("line " + std::to_string(line_no) + ": bad " +
                       std::string(what) + " '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no,
                        const char* what) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw MalformedRow("line " + std::to_string(line_no) + ": bad " +
                       std::string(what) + " '" + s + "'");
  }
}

void check_record(const SiteRecord& rec, std::size_t line_no) {
  if (!valid_point(rec.location)) {
    throw CoordinateOutOfRange("line " + std::to_string(line_no) + ": (" +
                               std::to_string(rec.location.lat) + ", " +
                               std::to_string(rec.location.lon) + ")");
  }
  if (rec.site_id.empty()) {
    throw MalformedRow("line " + std::to_string(line_no) + ": empty site_id");
  }
  if (rec.category.empty()) {
    throw MalformedRow("line " + std::to_string(line_no) +
                       ": empty category");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw MalformedRow("truncated binary feature stream");
  }
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw MalformedRow("truncated binary feature stream");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) {
    throw MalformedRow("truncated binary feature stream");
  }
  return s;
}

}  // namespace

const SiteRecord* SiteCatalog::find(const std::string& site_id) const {
  for (const auto& r : records) {
    if (r.site_id == site_id) return &r;
  }
  return nullptr;
}

LatLonBounds SiteCatalog::bounds() const {
  if (records.empty()) throw Error("bounds() on empty catalog");
  LatLonBounds b{90.0, -90.0, 180.0, -180.0};
  for (const auto& r : records) {
    b.lat_min = std::min(b.lat_min, r.location.lat);
    b.lat_max = std::max(b.lat_max, r.location.lat);
    b.lon_min = std::min(b.lon_min, r.location.lon);
    b.lon_max = std::max(b.lon_max, r.location.lon);
  }
  return b;
}

void FeatureDistribution::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw NotNormalized("negative or non-finite entry");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
    throw NotNormalized("sum " + std::to_string(sum) + " outside tolerance");
  }
}

std::string to_string(ImageSource s) {
  switch (s) {
    case ImageSource::flickr: return "flickr";
    case ImageSource::google: return "google";
    case ImageSource::synthetic: return "synthetic";
    case ImageSource::user: return "user";
  }
  return "synthetic";
}

ImageSource image_source_from_string(const std::string& s) {
  if (s == "flickr") return ImageSource::flickr;
  if (s == "google") return ImageSource::google;
  if (s == "synthetic") return ImageSource::synthetic;
  if (s == "user") return ImageSource::user;
  throw MalformedRow("unknown image source '" + s + "'");
}

std::vector<std::pair<std::string, std::vector<std::size_t>>>
FeatureDataset::by_site() const {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto [it, inserted] = index.try_emplace(images[i].site_id, groups.size());
    if (inserted) groups.emplace_back(images[i].site_id,
                                      std::vector<std::size_t>{});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

SiteCatalog parse_catalog(std::istream& in, CatalogFormat format) {
  SiteCatalog catalog;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;

  auto add = [&](SiteRecord rec) {
    check_record(rec, line_no);
    if (!seen.insert(rec.site_id).second) {
      throw DuplicateSiteId("line " + std::to_string(line_no) + ": '" +
                            rec.site_id + "'");
    }
    catalog.records.push_back(std::move(rec));
  };

  if (format == CatalogFormat::csv) {
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!header_seen) {
        header_seen = true;  // mandatory header row
        if (line.rfind("site_id,", 0) != 0) {
          throw MalformedRow("line 1: expected header "
                             "site_id,title,lat,lon,category,pageviews");
        }
        continue;
      }
      auto f = split_csv_line(line, line_no);
      if (f.size() != 6) {
        throw MalformedRow("line " + std::to_string(line_no) + ": expected 6 "
                           "fields, got " + std::to_string(f.size()));
      }
      SiteRecord rec;
      rec.site_id = f[0];
      rec.title = f[1];
      rec.location.lat = parse_double(f[2], line_no, "latitude");
      rec.location.lon = parse_double(f[3], line_no, "longitude");
      rec.category = f[4];
      rec.pageviews = parse_u64(f[5], line_no, "pageviews");
      add(std::move(rec));
    }
  } else {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRow("line " + std::to_string(line_no) + ": " +
                           e.what());
      }
      SiteRecord rec;
      try {
        rec.site_id = j.at("site_id").get<std::string>();
        rec.title = j.at("title").get<std::string>();
        rec.location.lat = j.at("lat").get<double>();
        rec.location.lon = j.at("lon").get<double>();
        rec.category = j.at("category").get<std::string>();
        rec.pageviews = j.at("pageviews").get<std::uint64_t>();
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRow("line " + std::to_string(line_no) + ": " +
                           e.what());
      }
      add(std::move(rec));
    }
  }
  return catalog;
}

void write_catalog(std::ostream& out, const SiteCatalog& catalog,
                   CatalogFormat format) {
  if (format == CatalogFormat::csv) {
    out << "site_id,title,lat,lon,category,pageviews\n";
    for (const auto& r : catalog.records) {
      out << csv_escape(r.site_id) << ',' << csv_escape(r.title) << ','
          << fmt_double(r.location.lat) << ',' << fmt_double(r.location.lon)
          << ',' << csv_escape(r.category) << ',' << r.pageviews << '\n';
    }
  } else {
    for (const auto& r : catalog.records) {
      nlohmann::json j{{"site_id", r.site_id}, {"title", r.title},
                       {"lat", r.location.lat}, {"lon", r.location.lon},
                       {"category", r.category}, {"pageviews", r.pageviews}};
      out << j.dump() << '\n';
    }
  }
}

FeatureDataset parse_features(std::istream& in, FeatureFormat format,
                              const ParseOptions& opts) {
  FeatureDataset ds;
  std::unordered_map<std::string, std::size_t> per_site;

  auto add = [&](ImageFeatureRecord rec) {
    if (rec.feature.dim() != ds.dimension) {
      throw DimensionMismatch("image '" + rec.image_id + "': dimension " +
                              std::to_string(rec.feature.dim()) +
                              " != " + std::to_string(ds.dimension));
    }
    rec.feature.validate();
    if (opts.catalog && !opts.catalog->contains(rec.site_id)) {
      throw UnknownSiteId("image '" + rec.image_id + "': site '" +
                          rec.site_id + "' not in catalog");
    }
    if (opts.max_images_per_site > 0 &&
        per_site[rec.site_id] >= opts.max_images_per_site) {
      return;
    }
    ++per_site[rec.site_id];
    ds.images.push_back(std::move(rec));
  };

  if (format == FeatureFormat::jsonl) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRow("line " + std::to_string(line_no) + ": " +
                           e.what());
      }
      if (!header_seen) {
        if (!j.contains("dimension")) {
          throw MalformedRow("line 1: missing header {\"dimension\": D}");
        }
        ds.dimension = j.at("dimension").get<std::size_t>();
        header_seen = true;
        continue;
      }
      ImageFeatureRecord rec;
      try {
        rec.image_id = j.at("image_id").get<std::string>();
        rec.site_id = j.at("site_id").get<std::string>();
        rec.source = image_source_from_string(j.at("source"));
        rec.feature.probs = j.at("probs").get<std::vector<double>>();
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRow("line " + std::to_string(line_no) + ": " +
                           e.what());
      }
      add(std::move(rec));
    }
    if (!header_seen && in.eof()) ds.dimension = 0;
  } else {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0) {
      throw MalformedRow("bad feature magic, expected GFD1");
    }
    ds.dimension = get_u32(in);
    const std::uint64_t count = get_u64(in);
    for (std::uint64_t k = 0; k < count; ++k) {
      ImageFeatureRecord rec;
      rec.image_id = get_string(in);
      rec.site_id = get_string(in);
      rec.source = image_source_from_string(get_string(in));
      std::vector<float> raw(ds.dimension);
      if (!in.read(reinterpret_cast<char*>(raw.data()),
                   static_cast<std::streamsize>(raw.size() * 4))) {
        throw MalformedRow("truncated binary feature stream");
      }
      rec.feature.probs.assign(raw.begin(), raw.end());
      add(std::move(rec));
    }
  }
  return ds;
}

void write_features(std::ostream& out, const FeatureDataset& dataset,
                    FeatureFormat format) {
  if (format == FeatureFormat::jsonl) {
    out << nlohmann::json{{"dimension", dataset.dimension}}.dump() << '\n';
    for (const auto& img : dataset.images) {
      nlohmann::json j{{"image_id", img.image_id},
                       {"site_id", img.site_id},
                       {"source", to_string(img.source)},
                       {"probs", img.feature.probs}};
      out << j.dump() << '\n';
    }
  } else {
    out.write(kFeatureMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(dataset.dimension));
    put_u64(out, dataset.images.size());
    for (const auto& img : dataset.images) {
      put_string(out, img.image_id);
      put_string(out, img.site_id);
      put_string(out, to_string(img.source));
      std::vector<float> raw(img.feature.probs.begin(),
                             img.feature.probs.end());
      out.write(reinterpret_cast<const char*>(raw.data()),
                static_cast<std::streamsize>(raw.size() * 4));
    }
  }
}

SiteCatalog sites_in_region(const SiteCatalog& catalog, const Region& region) {
  SiteCatalog out;
  for (const auto& r : catalog.records) {
    if (region.bbox.contains(r.location)) out.records.push_back(r);
  }
  return out;
}

}  // namespace siterec
