#pragma once

#include <string>
#include <vector>

namespace genmeter {

// Named scalar results with the configuration and seed that produced them.
struct MetricReport {
  struct Entry {
    std::string metric;
    double value = 0.0;
    std::string params;
    uint64_t seed = 0;
  };
  std::vector<Entry> entries;

  void add(std::string metric, double value, std::string params, uint64_t seed) {
    entries.push_back({std::move(metric), value, std::move(params), seed});
  }
  const Entry* find(const std::string& metric) const {
    for (const auto& e : entries)
      if (e.metric == metric) return &e;
    return nullptr;
  }
};

}  // namespace genmeter
