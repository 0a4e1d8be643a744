#include "pottsfit/image_io.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pottsfit {

namespace {

std::runtime_error file_error(const std::string& what, const std::string& path) {
  return std::runtime_error(what + ": " + path);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw file_error("cannot write", path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw file_error("cannot read", path);
  return in;
}

// PGM header: magic, then width height maxval separated by whitespace,
// with # comments allowed between tokens
int next_pgm_int(std::istream& in, const std::string& path) {
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      in.unget();
      break;
    }
  }
  int value;
  if (!(in >> value)) throw file_error("malformed pgm header", path);
  return value;
}

}  // namespace

void write_csv_image(const std::string& path, const IntensityImage& img) {
  auto out = open_out(path);
  char buf[32];
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", img.at(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw file_error("write failed", path);
}

IntensityImage read_csv_image(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.emplace_back();
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw file_error("malformed csv cell '" + cell + "'", path);
      }
      while (used < cell.size() && std::isspace((unsigned char)cell[used])) ++used;
      if (used != cell.size()) throw file_error("malformed csv cell '" + cell + "'", path);
      rows.back().push_back(v);
    }
    if (rows.back().size() != rows.front().size())
      throw file_error("ragged csv rows", path);
  }
  if (rows.empty() || rows.front().empty()) throw file_error("empty csv image", path);
  auto img = make_image(int(rows.front().size()), int(rows.size()));
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) img.v[std::size_t(r) * img.width + c] = rows[r][c];
  return img;
}

void write_label_pgm(const std::string& path, const LabelField& labels) {
  if (labels.num_labels > 254)
    throw std::invalid_argument("label map too large for 8-bit pgm output");
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << labels.width << ' ' << labels.height << '\n' << labels.num_labels << '\n';
  for (auto l : labels.v) out.put(char(l + 1));
  if (!out) throw file_error("write failed", path);
}

LabelField read_label_pgm(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  char m0 = 0, m1 = 0;
  in.get(m0).get(m1);
  if (m0 != 'P' || m1 != '5') throw file_error("not a binary pgm", path);
  int w = next_pgm_int(in, path);
  int h = next_pgm_int(in, path);
  int maxval = next_pgm_int(in, path);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 254)
    throw file_error("unsupported label pgm geometry", path);
  in.get();  // single whitespace after maxval
  auto labels = make_labels(w, h, maxval);
  std::vector<char> raw(labels.v.size());
  in.read(raw.data(), std::streamsize(raw.size()));
  if (in.gcount() != std::streamsize(raw.size())) throw file_error("truncated pgm", path);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    int v = (unsigned char)raw[i];
    if (v < 1 || v > maxval) throw file_error("pgm pixel outside label range", path);
    labels.v[i] = std::uint8_t(v - 1);
  }
  return labels;
}

void write_render_pgm(const std::string& path, const IntensityImage& img) {
  check_finite(img);
  double lo = img.v.front(), hi = img.v.front();
  for (double v : img.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span = hi > lo ? hi - lo : 1.0;
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << img.width << ' ' << img.height << '\n' << 65535 << '\n';
  for (double v : img.v) {
    auto q = std::uint16_t(std::lround((v - lo) / span * 65535.0));
    out.put(char(q >> 8)).put(char(q & 0xff));
  }
  if (!out) throw file_error("write failed", path);

  nlohmann::json side;
  side["min"] = lo;
  side["max"] = hi;
  side["maxval"] = 65535;
  side["orientation"] = "light-high";
  auto sout = open_out(path + ".json");
  sout << side.dump(2) << '\n';
  if (!sout) throw file_error("write failed", path + ".json");
}

IntensityImage read_render_pgm(const std::string& path) {
  nlohmann::json side;
  try {
    open_in(path + ".json") >> side;
  } catch (const nlohmann::json::exception&) {
    throw file_error("malformed sidecar", path + ".json");
  }
  double lo = side.at("min").get<double>();
  double hi = side.at("max").get<double>();

  auto in = open_in(path, std::ios::binary);
  char m0 = 0, m1 = 0;
  in.get(m0).get(m1);
  if (m0 != 'P' || m1 != '5') throw file_error("not a binary pgm", path);
  int w = next_pgm_int(in, path);
  int h = next_pgm_int(in, path);
  int maxval = next_pgm_int(in, path);
  if (w < 1 || h < 1 || maxval != 65535) throw file_error("unsupported render pgm", path);
  in.get();
  auto img = make_image(w, h);
  std::vector<char> raw(img.v.size() * 2);
  in.read(raw.data(), std::streamsize(raw.size()));
  if (in.gcount() != std::streamsize(raw.size())) throw file_error("truncated pgm", path);
  double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    unsigned q = (unsigned((unsigned char)raw[2 * i]) << 8) | (unsigned char)raw[2 * i + 1];
    img.v[i] = lo + q / 65535.0 * span;
  }
  return img;
}

}  // namespace pottsfit
