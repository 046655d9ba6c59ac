#include "stormclass/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace stormclass {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw std::invalid_argument("bad integer");
  return v;
}

}  // namespace

std::string_view pixel_csv_header() {
  return "image_id,row,col,tb250_00,tb310_p25,tb380_m08,tb380_m18,tb380_m33,tb380_m62,tb380_m95,tb670_00,"
         "iwp,particle_size,cloud_top_height,label";
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("bad number '" + std::string(text) + "'");
  return v;
}

void write_pixels(std::ostream& out, std::span<const PixelRecord> pixels) {
  out << pixel_csv_header() << '\n';
  std::string line;
  for (const auto& p : pixels) {
    line.clear();
    line += std::to_string(p.image_id);
    line += ',';
    line += std::to_string(p.row);
    line += ',';
    line += std::to_string(p.col);
    for (int b = 0; b < kBandCount; ++b) {
      line += ',';
      line += format_double(p.radiance[b]);
    }
    for (int s = 0; s < 3; ++s) {
      line += ',';
      if (p.science) line += format_double(p.science->as_vector()[s]);
    }
    line += ',';
    if (p.label) line += class_name(*p.label);
    line += '\n';
    out << line;
  }
}

void write_pixels(const std::filesystem::path& path, std::span<const PixelRecord> pixels) {
  std::ostringstream os;
  write_pixels(os, pixels);
  write_text(path, os.str());
}

std::vector<PixelRecord> read_pixels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Schema, "pixel CSV is missing its header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != pixel_csv_header()) throw Error(ErrorKind::Schema, "unexpected pixel CSV header: " + line);
  std::vector<PixelRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    auto fail = [&](const std::string& why) {
      return Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 15) throw fail("expected 15 fields, found " + std::to_string(fields.size()));
    PixelRecord p;
    try {
      p.image_id = parse_int(fields[0]);
      p.row = parse_int(fields[1]);
      p.col = parse_int(fields[2]);
      for (int b = 0; b < kBandCount; ++b) p.radiance[b] = parse_double(fields[static_cast<std::size_t>(3 + b)]);
      const bool any = !fields[11].empty() || !fields[12].empty() || !fields[13].empty();
      if (any) {
        if (fields[11].empty() || fields[12].empty() || fields[13].empty())
          throw std::invalid_argument("science columns must be all present or all empty");
        p.science = ScienceVector{parse_double(fields[11]), parse_double(fields[12]), parse_double(fields[13])};
      }
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    if (!p.radiance.allFinite()) throw fail("radiance is not finite");
    if (!fields[14].empty()) {
      p.label = parse_class5(fields[14]);
      if (!p.label) throw fail("unknown label '" + std::string(fields[14]) + "'");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PixelRecord> read_pixels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return read_pixels(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<SceneGrid> to_scenes(std::span<const PixelRecord> pixels, Region region, double pixel_size_km) {
  std::map<int, std::vector<PixelRecord>> by_image;
  for (const auto& p : pixels) by_image[p.image_id].push_back(p);
  std::vector<SceneGrid> out;
  for (auto& [id, px] : by_image) {
    SceneGrid g;
    g.region = region;
    g.pixel_size_km = pixel_size_km;
    for (const auto& p : px) {
      g.height = std::max(g.height, p.row + 1);
      g.width = std::max(g.width, p.col + 1);
    }
    std::sort(px.begin(), px.end(), [](const PixelRecord& a, const PixelRecord& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    g.pixels = std::move(px);
    g.validate();
    out.push_back(std::move(g));
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

}  // namespace stormclass
