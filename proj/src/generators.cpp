#include "genmeter/generators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace genmeter {

std::vector<double> GeneratorModel::map_vec(std::span<const double> z) const {
  std::vector<double> out(data_dim());
  map(z, out);
  return out;
}

Matrix GeneratorModel::map_batch(const Matrix& zs) const {
  if (zs.cols != latent().dim) throw input_error("map_batch: latent dimension mismatch");
  Matrix out(zs.rows, data_dim());
  for (std::size_t r = 0; r < zs.rows; ++r) map(zs.row(r), out.row(r));
  return out;
}

std::vector<double> GeneratorModel::sample_latent(Rng& rng) const {
  const LatentSpec& spec = latent();
  std::vector<double> z(spec.dim);
  for (double& x : z)
    x = spec.prior == LatentSpec::Prior::uniform ? rng.uniform(-1.0, 1.0) : rng.gaussian();
  return z;
}

Matrix GeneratorModel::sample(std::size_t n, Rng& rng) const {
  Matrix zs(n, latent().dim);
  for (std::size_t r = 0; r < n; ++r) {
    auto z = sample_latent(rng);
    std::copy(z.begin(), z.end(), zs.row(r).begin());
  }
  return map_batch(zs);
}

Dataset GeneratorModel::sample_dataset(std::size_t n, uint64_t seed) const {
  Rng rng = Rng::substream(seed, "generator-sample");
  return Dataset::from_matrix(sample(n, rng));
}

// ---- NoisyMemorizer ----

NoisyMemorizer::NoisyMemorizer(Dataset memorized, double epsilon, NoiseKind kind,
                               NoiseBound bound)
    : memorized_(std::move(memorized)), epsilon_(epsilon), kind_(kind), bound_(bound) {
  if (memorized_.size() == 0) throw input_error("NoisyMemorizer: empty memorized set");
  if (epsilon_ < 0.0) throw input_error("NoisyMemorizer: epsilon must be >= 0");
  latent_.dim = 1 + memorized_.dim;
  latent_.prior =
      kind_ == NoiseKind::uniform ? LatentSpec::Prior::uniform : LatentSpec::Prior::gaussian;
  lo_.assign(memorized_.dim, 0.0);
  hi_.assign(memorized_.dim, 0.0);
  for (std::size_t c = 0; c < memorized_.dim; ++c) {
    double lo = memorized_.data[c], hi = lo;
    for (std::size_t r = 1; r < memorized_.size(); ++r) {
      lo = std::min(lo, memorized_.row(r)[c]);
      hi = std::max(hi, memorized_.row(r)[c]);
    }
    lo_[c] = lo;
    hi_[c] = hi;
  }
}

void NoisyMemorizer::map(std::span<const double> z, std::span<double> out) const {
  // Coordinate 0 selects the memorized point through the prior's CDF; the
  // remaining coordinates are the noise vector itself.
  double u;
  if (latent_.prior == LatentSpec::Prior::uniform) {
    u = 0.5 * (z[0] + 1.0);
  } else {
    u = 0.5 * (1.0 + std::erf(z[0] / std::sqrt(2.0)));
  }
  u = std::clamp(u, 0.0, 1.0);
  std::size_t n = memorized_.size();
  std::size_t idx = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
  auto base = memorized_.row(idx);
  for (std::size_t c = 0; c < memorized_.dim; ++c) {
    double v = base[c] + epsilon_ * z[1 + c];
    if (bound_ == NoiseBound::clip) {
      v = std::clamp(v, lo_[c], hi_[c]);
    } else if (bound_ == NoiseBound::reflect && hi_[c] > lo_[c]) {
      double period = 2.0 * (hi_[c] - lo_[c]);
      double t = std::fmod(v - lo_[c], period);
      if (t < 0.0) t += period;
      v = lo_[c] + (t <= hi_[c] - lo_[c] ? t : period - t);
    }
    out[c] = v;
  }
}

Dataset memorizer_sample(const NoisyMemorizer& gen, std::size_t n, uint64_t seed) {
  if (n < 1) throw input_error("memorizer_sample: n must be >= 1");
  return gen.sample_dataset(n, seed);
}

void save_memorizer(const NoisyMemorizer& gen, const std::string& spec_path,
                    const std::string& dataset_path) {
  save_dataset_binary(gen.memorized(), dataset_path);
  std::ofstream f(spec_path);
  if (!f) throw io_error("cannot open for writing: " + spec_path);
  f << "memorizer\n";
  f << "dataset = " << dataset_path << "\n";
  f << "epsilon = ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", gen.epsilon());
  f << buf << "\n";
  f << "noise_kind = " << (gen.noise_kind() == NoiseKind::uniform ? "uniform" : "gaussian")
    << "\n";
}

NoisyMemorizer load_memorizer(const std::string& spec_path) {
  std::ifstream f(spec_path);
  if (!f) throw io_error("cannot open: " + spec_path);
  std::string line;
  if (!std::getline(f, line) || line != "memorizer")
    throw parse_error("not a memorizer spec: " + spec_path, 1);
  std::string dataset_path, kind = "uniform";
  double epsilon = 0.0;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "dataset") dataset_path = value;
    else if (key == "epsilon") epsilon = std::strtod(value.c_str(), nullptr);
    else if (key == "noise_kind") kind = value;
  }
  if (dataset_path.empty()) throw parse_error("memorizer spec missing dataset: " + spec_path, line_no);
  return NoisyMemorizer(load_dataset(dataset_path), epsilon,
                        kind == "gaussian" ? NoiseKind::gaussian : NoiseKind::uniform);
}

// ---- LinearGenerator ----

LinearGenerator::LinearGenerator(Matrix a, std::vector<double> b, LatentSpec::Prior prior)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows != b_.size()) throw input_error("LinearGenerator: A rows must match b length");
  latent_.dim = a_.cols;
  latent_.prior = prior;
}

void LinearGenerator::map(std::span<const double> z, std::span<double> out) const {
  for (std::size_t r = 0; r < a_.rows; ++r) {
    double s = b_[r];
    const double* arow = a_.data.data() + r * a_.cols;
    for (std::size_t c = 0; c < a_.cols; ++c) s += arow[c] * z[c];
    out[r] = s;
  }
}

// ---- SigmoidStepGenerator ----

SigmoidStepGenerator::SigmoidStepGenerator(std::vector<double> x0, std::vector<double> x1,
                                           double sharpness)
    : x0_(std::move(x0)), x1_(std::move(x1)), sharpness_(sharpness) {
  if (x0_.size() != x1_.size()) throw input_error("SigmoidStepGenerator: anchor size mismatch");
  latent_.dim = 1;
  latent_.prior = LatentSpec::Prior::uniform;
}

void SigmoidStepGenerator::map(std::span<const double> z, std::span<double> out) const {
  double s = 1.0 / (1.0 + std::exp(-sharpness_ * z[0]));
  for (std::size_t c = 0; c < x0_.size(); ++c) out[c] = x0_[c] + (x1_[c] - x0_[c]) * s;
}

// ---- MlpGenerator ----

MlpGenerator::MlpGenerator(MlpNetwork net, LatentSpec latent)
    : net_(std::move(net)), latent_(latent) {
  if (net_.input_width() != latent_.dim)
    throw config_error("MlpGenerator: network input width does not match latent dim");
}

void MlpGenerator::map(std::span<const double> z, std::span<double> out) const {
  Matrix in = Matrix::from_row(z);
  Matrix o = forward(net_, in);
  for (std::size_t c = 0; c < o.cols; ++c) out[c] = o.data[c];
}

Matrix MlpGenerator::map_batch(const Matrix& zs) const {
  if (zs.cols != latent_.dim) throw input_error("map_batch: latent dimension mismatch");
  return forward(net_, zs);
}

// ---- helpers ----

std::vector<double> interpolate_latent(std::span<const double> z0, std::span<const double> z1,
                                       double t) {
  if (z0.size() != z1.size()) throw input_error("interpolate_latent: dimension mismatch");
  if (t < 0.0 || t > 1.0) throw input_error("interpolate_latent: t outside [0,1]");
  std::vector<double> z(z0.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - t) * z0[i] + t * z1[i];
  return z;
}

}  // namespace genmeter
