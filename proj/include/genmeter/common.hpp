#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genmeter {

// Error taxonomy. The CLI maps these onto exit codes (config 2,
// divergence 3, I/O and parsing 4).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : input_error {
  std::size_t line;
  parse_error(const std::string& msg, std::size_t line_no)
      : input_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct diverged_error : std::runtime_error {
  long iteration;
  diverged_error(const std::string& msg, long iter)
      : std::runtime_error(msg + " (iteration " + std::to_string(iter) + ")"), iteration(iter) {}
};

// Deterministic 64-bit PRNG (splitmix64). All randomness in the library
// flows through named substreams of a single user seed, so results are
// reproducible bit for bit and independent of thread scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double gaussian();

  // Uniform index in [0, n). Multiply-shift, no modulo bias worth caring about here.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Substream derivation: hash the stream name (FNV-1a) into the seed.
  static Rng substream(uint64_t seed, std::string_view name);
  static Rng substream(uint64_t seed, std::string_view name, uint64_t index);

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs independent jobs over a small thread pool. Callers keep results in
// per-job slots so the outcome does not depend on scheduling.
void run_parallel(std::vector<std::function<void()>> jobs, unsigned threads = 0);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

inline constexpr const char* kVersion = "0.1.0";

}  // namespace genmeter
