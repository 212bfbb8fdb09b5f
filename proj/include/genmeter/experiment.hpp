#pragma once

#include <map>
#include <string>
#include <vector>

#include "genmeter/samplers.hpp"

namespace genmeter {

// Flat key/value configuration with a named experiment kind. File form is
// "key = value" lines under [sections] (section names prefix the keys), with
// JSON accepted as an alternative.
struct ExperimentConfig {
  std::string kind;
  std::string out_dir = "out";
  std::string preset = "desk";  // desk | paper
  std::vector<uint64_t> seeds = {1};
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_num(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  void set(const std::string& key, const std::string& value) { params[key] = value; }

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

std::vector<double> parse_double_list(const std::string& s);
std::vector<std::size_t> parse_size_list(const std::string& s);
std::vector<uint64_t> parse_seed_list(const std::string& s);

// CSV writer with a per-row schema check against the header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  ~CsvWriter();
  void row(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

  static std::string num(double v);
  static std::string num(std::size_t v);
  static std::string num(long v);

 private:
  std::string path_;
  std::size_t columns_;
  std::string buffer_;
};

SyntheticSampler sampler_from_config(const ExperimentConfig& cfg, const std::string& prefix);

// Dispatches to the module runners; writes CSVs, a manifest and a gnuplot
// script into out_dir. Rerunning an identical config reproduces every output
// byte for byte.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace genmeter
