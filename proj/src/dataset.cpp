#include "genmeter/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace genmeter {

static constexpr char kMagic[5] = {'G', 'M', 'D', 'S', '1'};

void save_dataset_binary(const Dataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f.write(kMagic, sizeof(kMagic));
  uint8_t has_labels = ds.has_labels() ? 1 : 0;
  uint64_t rows = ds.size();
  uint32_t dim = static_cast<uint32_t>(ds.dim);
  f.write(reinterpret_cast<const char*>(&has_labels), 1);
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&dim), 4);
  for (double x : ds.data) {
    float v = static_cast<float>(x);
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  if (has_labels) {
    for (int l : ds.labels) {
      int32_t v = l;
      f.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  if (!f) throw io_error("write failed: " + path);
}

static Dataset load_binary(std::ifstream& f, const std::string& path) {
  uint8_t has_labels = 0;
  uint64_t rows = 0;
  uint32_t dim = 0;
  f.read(reinterpret_cast<char*>(&has_labels), 1);
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&dim), 4);
  if (!f || dim == 0) throw io_error("corrupt dataset header: " + path);
  Dataset ds(dim);
  ds.data.resize(rows * dim);
  for (double& x : ds.data) {
    float v = 0.0f;
    f.read(reinterpret_cast<char*>(&v), 4);
    x = static_cast<double>(v);
  }
  if (has_labels) {
    ds.labels.resize(rows);
    for (int& l : ds.labels) {
      int32_t v = 0;
      f.read(reinterpret_cast<char*>(&v), 4);
      l = v;
    }
  }
  if (!f) throw io_error("truncated dataset file: " + path);
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "dim=" << ds.dim;
  if (ds.has_labels()) f << ",labels";
  f << "\n";
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    auto row = ds.row(r);
    for (std::size_t c = 0; c < ds.dim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      if (c) f << ',';
      f << buf;
    }
    if (ds.has_labels()) f << ',' << ds.labels[r];
    f << "\n";
  }
  if (!f) throw io_error("write failed: " + path);
}

static Dataset load_csv(std::ifstream& f, const std::string& path) {
  std::string line;
  if (!std::getline(f, line)) throw parse_error("empty dataset file: " + path, 1);
  bool labels = false;
  std::size_t dim = 0;
  {
    std::string header = line;
    if (header.size() >= 7 && header.substr(header.size() - 7) == ",labels") {
      labels = true;
      header = header.substr(0, header.size() - 7);
    }
    if (header.rfind("dim=", 0) != 0) throw parse_error("expected header dim=<d>: " + path, 1);
    char* end = nullptr;
    long d = std::strtol(header.c_str() + 4, &end, 10);
    if (d <= 0 || *end != '\0') throw parse_error("bad dimension in header: " + path, 1);
    dim = static_cast<std::size_t>(d);
  }
  Dataset ds(dim);
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t expect = dim + (labels ? 1 : 0);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != expect)
      throw parse_error("expected " + std::to_string(expect) + " values, got " +
                            std::to_string(cells.size()) + ": " + path,
                        line_no);
    for (std::size_t c = 0; c < dim; ++c) {
      char* end = nullptr;
      double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw parse_error("bad number '" + cells[c] + "': " + path, line_no);
      if (!std::isfinite(v)) throw parse_error("non-finite entry: " + path, line_no);
      ds.data.push_back(v);
    }
    if (labels) {
      char* end = nullptr;
      long v = std::strtol(cells[dim].c_str(), &end, 10);
      if (end == cells[dim].c_str() || *end != '\0')
        throw parse_error("bad label '" + cells[dim] + "': " + path, line_no);
      ds.labels.push_back(static_cast<int>(v));
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  char magic[5] = {};
  f.read(magic, sizeof(magic));
  if (f && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0) return load_binary(f, path);
  f.close();
  std::ifstream text(path);
  if (!text) throw io_error("cannot open: " + path);
  return load_csv(text, path);
}

}  // namespace genmeter
