// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/data.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace ulite {

// ---------------------------------------------------------------------------
// Files

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// PNG

Image8 read_png(const std::string& path) {
  if (!fs::exists(path)) throw LoadError("file not found: '" + path + "'");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw LoadError("cannot decode PNG '" + path + "': " + img.message);
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw LoadError("zero-sized image '" + path + "'");
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out;
  out.width = img.width;
  out.height = img.height;
  out.channels = color ? 3 : 1;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw LoadError("cannot decode PNG '" + path + "': " + msg);
  }
  return out;
}

void write_png(const std::string& path, const Image8& im) {
  if (im.channels != 1 && im.channels != 3) throw InvalidInputError("write_png: 1 or 3 channels required");
  if (im.pixels.size() != im.width * im.height * im.channels) throw InvalidInputError("write_png: bad pixel buffer");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(im.width);
  img.height = static_cast<png_uint_32>(im.height);
  img.format = im.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, im.pixels.data(), 0, nullptr))
    throw IoError("PNG encode failed for '" + path + "': " + img.message);
  std::string buf(size, '\0');
  if (!png_image_write_to_memory(&img, buf.data(), &size, 0, im.pixels.data(), 0, nullptr))
    throw IoError("PNG encode failed for '" + path + "': " + img.message);
  buf.resize(size);
  write_file_atomic(path, buf);
}

// ---------------------------------------------------------------------------
// Resampling

Tensor resize_bilinear(const Tensor& x, std::size_t height, std::size_t width) {
  const Shape s = x.shape();
  Tensor out({s.n, s.c, height, width});
  const double sy = static_cast<double>(s.h) / static_cast<double>(height);
  const double sx = static_cast<double>(s.w) / static_cast<double>(width);
  auto coord = [](std::size_t dst, double scale, std::size_t extent, std::size_t& i0, std::size_t& i1, double& t) {
    double src = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(extent - 1));
    i0 = static_cast<std::size_t>(std::floor(src));
    i1 = std::min(i0 + 1, extent - 1);
    t = src - static_cast<double>(i0);
  };
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const float* in = x.raw() + nc * s.plane();
    float* o = out.raw() + nc * height * width;
    for (std::size_t h = 0; h < height; ++h) {
      std::size_t y0, y1;
      double ty;
      coord(h, sy, s.h, y0, y1, ty);
      for (std::size_t w = 0; w < width; ++w) {
        std::size_t x0, x1;
        double tx;
        coord(w, sx, s.w, x0, x1, tx);
        const double top = in[y0 * s.w + x0] * (1.0 - tx) + in[y0 * s.w + x1] * tx;
        const double bot = in[y1 * s.w + x0] * (1.0 - tx) + in[y1 * s.w + x1] * tx;
        o[h * width + w] = static_cast<float>(std::clamp(top * (1.0 - ty) + bot * ty, 0.0, 1.0));
      }
    }
  }
  return out;
}

Tensor resize_nearest(const Tensor& x, std::size_t height, std::size_t width) {
  const Shape s = x.shape();
  Tensor out({s.n, s.c, height, width});
  auto src = [](std::size_t dst, std::size_t in, std::size_t outn) {
    return std::min(in - 1, (2 * dst + 1) * in / (2 * outn));
  };
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const float* in = x.raw() + nc * s.plane();
    float* o = out.raw() + nc * height * width;
    for (std::size_t h = 0; h < height; ++h) {
      const std::size_t sh = src(h, s.h, height);
      for (std::size_t w = 0; w < width; ++w) o[h * width + w] = in[sh * s.w + src(w, s.w, width)];
    }
  }
  return out;
}

namespace {

Tensor planes_from(const Image8& im, std::size_t channels_out) {
  Tensor t({1, channels_out, im.height, im.width});
  for (std::size_t c = 0; c < channels_out; ++c) {
    const std::size_t src_c = im.channels == 1 ? 0 : c;
    float* p = t.plane(0, c);
    for (std::size_t i = 0; i < im.width * im.height; ++i) p[i] = static_cast<float>(im.pixels[i * im.channels + src_c]);
  }
  return t;
}

}  // namespace

Tensor load_image(const std::string& path, std::size_t size) {
  const Image8 img = read_png(path);
  Tensor image = planes_from(img, 3);
  for (auto& v : image.data()) v /= 255.0f;
  return (img.height == size && img.width == size) ? image : resize_bilinear(image, size, size);
}

SamplePair load_pair(const std::string& image_path, const std::string& mask_path, std::size_t size, std::string id) {
  const Image8 msk = read_png(mask_path);
  SamplePair pair;
  pair.id = id.empty() ? fs::path(image_path).stem().string() : std::move(id);
  pair.image = load_image(image_path, size);

  Tensor mask = planes_from(msk, 1);
  if (msk.height != size || msk.width != size) mask = resize_nearest(mask, size, size);
  for (auto& v : mask.data()) v = v >= 128.0f ? 1.0f : 0.0f;
  pair.mask = std::move(mask);
  return pair;
}

Image8 tensor_to_image(const Tensor& x, std::size_t n) {
  const Shape s = x.shape();
  if (s.c != 1 && s.c != 3) throw InvalidInputError("tensor_to_image: 1 or 3 channels required");
  Image8 im{s.w, s.h, s.c, std::vector<std::uint8_t>(s.plane() * s.c)};
  for (std::size_t c = 0; c < s.c; ++c) {
    const float* p = x.plane(n, c);
    for (std::size_t i = 0; i < s.plane(); ++i)
      im.pixels[i * s.c + c] = static_cast<std::uint8_t>(std::lround(std::clamp(p[i], 0.0f, 1.0f) * 255.0f));
  }
  return im;
}

Image8 mask_to_image(const Tensor& mask, std::size_t n) {
  const Shape s = mask.shape();
  Image8 im{s.w, s.h, 1, std::vector<std::uint8_t>(s.plane())};
  const float* p = mask.plane(n, 0);
  for (std::size_t i = 0; i < s.plane(); ++i) im.pixels[i] = p[i] >= 0.5f ? 255 : 0;
  return im;
}

// ---------------------------------------------------------------------------
// Manifests

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    default: return "";
  }
}

Split parse_split(const std::string& s) {
  if (s.empty()) return Split::unassigned;
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw InvalidInputError("unknown split '" + s + "'");
}

namespace {

std::string resolve(const std::string& root, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(root) / path).string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& s : out)
    if (!s.empty() && s.back() == '\r') s.pop_back();
  return out;
}

}  // namespace

std::string DatasetManifest::image_path(const ManifestEntry& e) const { return resolve(root, e.image); }
std::string DatasetManifest::mask_path(const ManifestEntry& e) const { return resolve(root, e.mask); }

std::vector<ManifestEntry> DatasetManifest::select(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(e);
  return out;
}

DatasetManifest read_manifest_csv(const std::string& path, const std::string& root) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  DatasetManifest m;
  m.root = root;
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"id", "image", "mask", "split"})
    throw InvalidInputError("manifest '" + path + "' must start with header id,image,mask,split");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 4 && cols.size() != 3)
      throw InvalidInputError("manifest '" + path + "' line " + std::to_string(line_no) + ": expected 4 columns");
    m.entries.push_back({cols[0], cols[1], cols[2], cols.size() == 4 ? parse_split(cols[3]) : Split::unassigned});
  }
  return m;
}

void write_manifest_csv(const std::string& path, const DatasetManifest& manifest) {
  std::ostringstream os;
  os << "id,image,mask,split\n";
  for (const auto& e : manifest.entries) os << e.id << ',' << e.image << ',' << e.mask << ',' << to_string(e.split) << '\n';
  write_file_atomic(path, os.str());
}

DatasetManifest scan_dataset(const std::string& root) {
  const fs::path manifest = fs::path(root) / "manifest.csv";
  if (fs::exists(manifest)) return read_manifest_csv(manifest.string(), root);
  const fs::path images = fs::path(root) / "images", masks = fs::path(root) / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks))
    throw IoError("dataset root '" + root + "' needs images/ and masks/ directories or a manifest.csv");
  DatasetManifest m;
  m.root = root;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(images))
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const fs::path mask = masks / (stem + ".png");
    if (!fs::exists(mask)) throw IoError("image '" + f.string() + "' has no mask '" + mask.string() + "'");
    m.entries.push_back({stem, "images/" + f.filename().string(), "masks/" + stem + ".png", Split::unassigned});
  }
  return m;
}

DatasetManifest make_splits(const DatasetManifest& manifest, SplitRatios r, std::uint64_t seed) {
  if (manifest.entries.empty()) throw InvalidInputError("make_splits: empty manifest");
  if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9)
    throw InvalidInputError("make_splits: ratios must be non-negative and sum to 1");
  const std::size_t n = manifest.entries.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  // The epsilon absorbs representation error in products such as 0.1 * 10.
  const auto n_val = static_cast<std::size_t>(std::floor(r.val * static_cast<double>(n) + 1e-9));
  const auto n_test = std::min(n - n_val, static_cast<std::size_t>(std::floor(r.test * static_cast<double>(n) + 1e-9)));
  DatasetManifest out = manifest;
  for (std::size_t k = 0; k < n; ++k) {
    Split s = Split::train;
    if (k < n_val) s = Split::val;
    else if (k < n_val + n_test) s = Split::test;
    out.entries[order[k]].split = s;
  }
  return out;
}

std::vector<SamplePair> load_samples(const DatasetManifest& manifest, const std::vector<ManifestEntry>& entries,
                                     std::size_t size) {
  std::vector<SamplePair> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(load_pair(manifest.image_path(e), manifest.mask_path(e), size, e.id));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

std::vector<SamplePair> synth_dataset(std::size_t count, std::uint64_t seed, std::size_t size) {
  if (count == 0) throw InvalidInputError("synth_dataset: count must be >= 1");
  if (size < 8) throw InvalidInputError("synth_dataset: size must be >= 8");
  const Rng base(seed);
  std::vector<SamplePair> out;
  const double S = static_cast<double>(size);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = base.fork(k);
    SamplePair p;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04zu", k);
    p.id = id;
    p.image = Tensor({1, 3, size, size});
    p.mask = Tensor({1, 1, size, size});
    float bg[3];
    for (float& b : bg) b = static_cast<float>(rng.uniform(0.10, 0.35));
    for (std::size_t c = 0; c < 3; ++c) std::fill_n(p.image.plane(0, c), size * size, bg[c]);

    const auto ellipses = 1 + rng.below(3);
    for (std::uint64_t e = 0; e < ellipses; ++e) {
      const double cy = rng.uniform(0.3, 0.7) * S, cx = rng.uniform(0.3, 0.7) * S;
      const double ay = rng.uniform(0.08, 0.22) * S, ax = rng.uniform(0.08, 0.22) * S;
      const double theta = rng.uniform(0.0, std::numbers::pi);
      float fg[3];
      for (float& f : fg) f = static_cast<float>(rng.uniform(0.55, 0.90));
      const double ct = std::cos(theta), st = std::sin(theta);
      for (std::size_t h = 0; h < size; ++h) {
        for (std::size_t w = 0; w < size; ++w) {
          const double dy = static_cast<double>(h) + 0.5 - cy, dx = static_cast<double>(w) + 0.5 - cx;
          const double u = (dx * ct + dy * st) / ax, v = (-dx * st + dy * ct) / ay;
          if (u * u + v * v <= 1.0) {
            p.mask.at(0, 0, h, w) = 1.0f;
            for (std::size_t c = 0; c < 3; ++c) p.image.at(0, c, h, w) = fg[c];
          }
        }
      }
    }
    for (auto& v : p.image.data()) v = std::clamp(v + static_cast<float>(0.05 * rng.normal()), 0.0f, 1.0f);
    out.push_back(std::move(p));
  }
  return out;
}

DatasetManifest write_dataset(const std::string& root, const std::vector<SamplePair>& pairs) {
  DatasetManifest m;
  m.root = root;
  for (const auto& p : pairs) {
    const std::string img = "images/" + p.id + ".png", msk = "masks/" + p.id + ".png";
    write_png(resolve(root, img), tensor_to_image(p.image));
    write_png(resolve(root, msk), mask_to_image(p.mask));
    m.entries.push_back({p.id, img, msk, Split::unassigned});
  }
  write_manifest_csv((fs::path(root) / "manifest.csv").string(), m);
  return m;
}

}  // namespace ulite
