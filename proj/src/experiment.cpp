#include "genmeter/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "genmeter/adversarial.hpp"
#include "genmeter/gan_lab.hpp"
#include "genmeter/mdl_metric.hpp"
#include "genmeter/metrics_classical.hpp"
#include "genmeter/metrics_nnd.hpp"

namespace genmeter {

namespace fs = std::filesystem;

// ---- config ----

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double ExperimentConfig::get_num(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  char* end = nullptr;
  double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw config_error("config: bad number for " + key + ": " + it->second);
  return v;
}

long ExperimentConfig::get_int(const std::string& key, long fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  char* end = nullptr;
  long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw config_error("config: bad integer for " + key + ": " + it->second);
  return v;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"metrics",      "nnd_noise_grid", "adversarial",
                                                 "monotonicity", "train_gan",      "comp_sweep",
                                                 "dataset_gen"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw config_error("unknown experiment kind: " + kind);
  if (seeds.empty()) throw config_error("config: seeds must be nonempty");
  if (preset != "desk" && preset != "paper")
    throw config_error("config: preset must be desk or paper");
}

static std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
static std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw config_error(std::string("bad ") + what + " list entry: " + item);
    out.push_back(static_cast<T>(v));
  }
  if (out.empty()) throw config_error(std::string("empty ") + what + " list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) { return parse_list<double>(s, "real"); }
std::vector<std::size_t> parse_size_list(const std::string& s) {
  return parse_list<std::size_t>(s, "count");
}
std::vector<uint64_t> parse_seed_list(const std::string& s) {
  return parse_list<uint64_t>(s, "seed");
}

static void apply_top_level(ExperimentConfig& cfg, const std::string& key,
                            const std::string& value) {
  if (key == "kind")
    cfg.kind = value;
  else if (key == "out")
    cfg.out_dir = value;
  else if (key == "preset")
    cfg.preset = value;
  else if (key == "seeds")
    cfg.seeds = parse_seed_list(value);
  else
    cfg.params[key] = value;
}

static ExperimentConfig load_json_config(const std::string& path) {
  std::ifstream f(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config: invalid JSON in " + path + ": " + e.what());
  }
  ExperimentConfig cfg;
  auto to_string = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    std::ostringstream os;
    os << v;
    return os.str();
  };
  for (auto& [section, value] : j.items()) {
    if (value.is_object()) {
      for (auto& [key, inner] : value.items()) {
        std::string flat = section == "experiment" ? key : section + "." + key;
        if (section == "experiment")
          apply_top_level(cfg, key, to_string(inner));
        else
          cfg.params[flat] = to_string(inner);
      }
    } else {
      apply_top_level(cfg, section, to_string(value));
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") return load_json_config(path);
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config: " + path);
  ExperimentConfig cfg;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw parse_error("config: expected key = value: " + path, line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw parse_error("config: empty key: " + path, line_no);
    if (section.empty() || section == "experiment")
      apply_top_level(cfg, key, value);
    else
      cfg.params[section + "." + key] = value;
  }
  return cfg;
}

// ---- CSV ----

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()) {
  if (columns_ == 0) throw io_error("csv: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  std::ofstream f(path_);
  if (f) f << buffer_;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw io_error("csv schema violation in " + path_ + ": expected " + std::to_string(columns_) +
                   " cells, got " + std::to_string(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
std::string CsvWriter::num(std::size_t v) { return std::to_string(v); }
std::string CsvWriter::num(long v) { return std::to_string(v); }

// ---- samplers from config ----

SyntheticSampler sampler_from_config(const ExperimentConfig& cfg, const std::string& prefix) {
  std::string family = cfg.get(prefix, "two_moons");
  if (family == "two_moons")
    return SyntheticSampler::two_moons(cfg.get_num(prefix + ".noise", 0.05));
  if (family == "ring")
    return SyntheticSampler::ring(static_cast<std::size_t>(cfg.get_int(prefix + ".k", 8)),
                                  cfg.get_num(prefix + ".radius", 1.0),
                                  cfg.get_num(prefix + ".sigma", 0.05));
  if (family == "uniform_box")
    return SyntheticSampler::uniform_box(
        static_cast<std::size_t>(cfg.get_int(prefix + ".dim", 2)),
        cfg.get_num(prefix + ".halfwidth", 1.0));
  if (family == "gaussian_mixture") {
    std::string spec = cfg.get(prefix + ".means", "-1,-1|1,1");
    std::vector<std::vector<double>> rows;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, '|')) rows.push_back(parse_double_list(part));
    if (rows.empty()) throw config_error("gaussian_mixture: no means given");
    Matrix means(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size())
        throw config_error("gaussian_mixture: ragged means list");
      std::copy(rows[r].begin(), rows[r].end(), means.row(r).begin());
    }
    double sigma = cfg.get_num(prefix + ".sigma", 0.1);
    std::vector<double> sigmas(rows.size(), sigma);
    std::vector<double> weights(rows.size(), 1.0 / static_cast<double>(rows.size()));
    return SyntheticSampler::gaussian_mixture(std::move(means), std::move(sigmas),
                                              std::move(weights));
  }
  throw config_error("unknown sampler family: " + family);
}

// ---- shared runner plumbing ----

namespace {

NndConfig nnd_from_config(const ExperimentConfig& cfg) {
  NndConfig nnd = cfg.preset == "paper" ? paper_nnd_config() : desk_nnd_config();
  nnd.iterations = cfg.get_int("nnd.iterations", nnd.iterations);
  nnd.lr = cfg.get_num("nnd.lr", nnd.lr);
  nnd.batch_size = static_cast<std::size_t>(cfg.get_int("nnd.batch_size", (long)nnd.batch_size));
  nnd.gp_weight = cfg.get_num("nnd.gp_weight", nnd.gp_weight);
  nnd.eval_window = cfg.get_int("nnd.eval_window", nnd.eval_window);
  nnd.eval_batches =
      static_cast<std::size_t>(cfg.get_int("nnd.eval_batches", (long)nnd.eval_batches));
  if (cfg.has("nnd.hidden")) nnd.critic_hidden = parse_size_list(cfg.get("nnd.hidden"));
  return nnd;
}

unsigned threads_from_config(const ExperimentConfig& cfg) {
  return static_cast<unsigned>(cfg.get_int("threads", 0));
}

void write_manifest(const ExperimentConfig& cfg) {
  std::ofstream f(cfg.out_dir + "/manifest.txt");
  if (!f) throw io_error("cannot write manifest in " + cfg.out_dir);
  f << "version = " << kVersion << "\n";
  f << "kind = " << cfg.kind << "\n";
  f << "preset = " << cfg.preset << "\n";
  f << "out = " << cfg.out_dir << "\n";
  f << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) f << (i ? "," : "") << cfg.seeds[i];
  f << "\n";
  for (const auto& [k, v] : cfg.params) f << k << " = " << v << "\n";
}

void write_plot_script(const ExperimentConfig& cfg, const std::string& csv,
                       const std::string& title, const std::string& plot_body) {
  std::ofstream f(cfg.out_dir + "/plot.gp");
  if (!f) throw io_error("cannot write plot script in " + cfg.out_dir);
  f << "# gnuplot script; run from this directory\n";
  f << "set datafile separator \",\"\n";
  f << "set key outside\n";
  f << "set title \"" << title << "\"\n";
  f << "csv = \"" << csv << "\"\n";
  f << plot_body << "\n";
}

Dataset require_dataset(const ExperimentConfig& cfg, const std::string& key) {
  std::string path = cfg.get(key);
  if (path.empty()) throw config_error("experiment requires " + key + "=<dataset path>");
  return load_dataset(path);
}

// ---- experiment kinds ----

void run_metrics(const ExperimentConfig& cfg) {
  Dataset test = require_dataset(cfg, "test");
  Dataset train = cfg.has("train") ? load_dataset(cfg.get("train")) : test;

  EvalSuiteConfig suite;
  suite.nnd = nnd_from_config(cfg);
  suite.kmeans_k = static_cast<std::size_t>(cfg.get_int("eval.kmeans_k", 20));
  suite.beta = cfg.get_num("eval.beta", 8.0);
  suite.knn_k = static_cast<std::size_t>(cfg.get_int("eval.knn_k", 3));
  suite.sample_n = static_cast<std::size_t>(cfg.get_int("eval.sample_n", (long)test.size()));
  suite.comp_pairs = static_cast<std::size_t>(cfg.get_int("eval.comp_pairs", 1024));
  suite.comp_T = static_cast<std::size_t>(cfg.get_int("eval.comp_T", 128));
  suite.alpha = cfg.get_num("eval.alpha", 1.0);
  suite.nnd_fixed_m = static_cast<std::size_t>(cfg.get_int("eval.nnd_fixed_m", (long)test.size()));

  CsvWriter csv(cfg.out_dir + "/metrics.csv", {"metric_name", "value", "params", "seed"});
  for (uint64_t seed : cfg.seeds) {
    suite.seed = seed;
    MetricReport report;
    if (cfg.has("checkpoint")) {
      MlpNetwork net = load_network(cfg.get("checkpoint"));
      LatentSpec latent{net.input_width(), LatentSpec::Prior::uniform};
      MlpGenerator gen(std::move(net), latent);
      report = evaluate_checkpoint(gen, train, test, suite);
    } else {
      Dataset fake = require_dataset(cfg, "fake");
      NoisyMemorizer gen(fake, cfg.get_num("eval.epsilon", 0.0));
      report = evaluate_checkpoint(gen, train, test, suite);
    }
    for (const auto& e : report.entries)
      csv.row({e.metric, CsvWriter::num(e.value), e.params, CsvWriter::num(e.seed)});
  }
  write_plot_script(cfg, "metrics.csv", "metric suite",
                    "# one value per metric/seed\n"
                    "plot csv using 0:2:xtic(1) with points pt 7 title \"value\"");
}

void run_nnd_noise_grid(const ExperimentConfig& cfg) {
  SyntheticSampler sampler = cfg.has("sampler")
                                 ? sampler_from_config(cfg, "sampler")
                                 : SyntheticSampler::uniform_box(8);
  std::size_t n_train = static_cast<std::size_t>(cfg.get_int("n_train", 4000));
  std::size_t n_test = static_cast<std::size_t>(cfg.get_int("n_test", 1000));
  auto [train, test] = split_disjoint(sampler, n_train, n_test, cfg.seeds.front());

  std::vector<double> epsilons = parse_double_list(cfg.get("epsilons", "0,0.1,0.5,1"));
  std::vector<std::size_t> sizes;
  for (const std::string& tok : {cfg.get("sizes", "100,1000,full")}) {
    std::stringstream ss(tok);
    std::string item;
    while (std::getline(ss, item, ','))
      sizes.push_back(item == "full" ? n_train : static_cast<std::size_t>(std::stoul(item)));
  }
  std::size_t fixed_m = static_cast<std::size_t>(cfg.get_int("fixed_m", (long)n_train));

  NndConfig nnd = nnd_from_config(cfg);
  std::string bound_name = cfg.get("noise_bound", "reflect");
  NoiseBound bound = bound_name == "clip"      ? NoiseBound::clip
                     : bound_name == "reflect" ? NoiseBound::reflect
                     : bound_name == "none"    ? NoiseBound::none
                                               : throw config_error("bad noise_bound: " + bound_name);
  auto grid = nnd_noise_grid(nnd, train, test, epsilons, sizes, cfg.seeds, fixed_m,
                             NoiseKind::uniform, bound, threads_from_config(cfg));

  CsvWriter csv(cfg.out_dir + "/nnd_grid.csv",
                {"epsilon", "subset_size", "protocol", "seed", "nnd_estimate"});
  for (const auto& pt : grid)
    csv.row({CsvWriter::num(pt.epsilon), CsvWriter::num(pt.subset_size),
             pt.fixed_protocol ? "fixed" : "streaming", CsvWriter::num(pt.seed),
             CsvWriter::num(pt.estimate)});

  // per-(protocol, size) mean over seeds for each epsilon, plus the ordering
  // verdict and the Spearman sign of the mean sequence against epsilon
  CsvWriter summary(cfg.out_dir + "/nnd_grid_summary.csv",
                    {"protocol", "subset_size", "epsilon", "mean_estimate", "ordering",
                     "spearman"});
  for (bool fixed : {false, true}) {
    for (std::size_t size : sizes) {
      std::vector<double> means;
      for (double eps : epsilons) {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& pt : grid)
          if (pt.fixed_protocol == fixed && pt.subset_size == size && pt.epsilon == eps) {
            acc += pt.estimate;
            ++count;
          }
        means.push_back(acc / static_cast<double>(count));
      }
      bool increasing = true, decreasing = true;
      for (std::size_t i = 1; i < means.size(); ++i) {
        if (!(means[i] > means[i - 1])) increasing = false;
        if (!(means[i] < means[i - 1])) decreasing = false;
      }
      std::string ordering = increasing ? "increasing" : decreasing ? "decreasing" : "mixed";
      double rho;
      {
        std::vector<double> rank(means.size());
        for (std::size_t i = 0; i < means.size(); ++i) {
          rank[i] = 1.0;
          for (std::size_t j = 0; j < means.size(); ++j)
            if (means[j] < means[i]) rank[i] += 1.0;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < means.size(); ++i)
          d2 += (rank[i] - (i + 1)) * (rank[i] - (i + 1));
        double n = static_cast<double>(means.size());
        rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
      }
      for (std::size_t i = 0; i < epsilons.size(); ++i)
        summary.row({fixed ? "fixed" : "streaming", CsvWriter::num(size),
                     CsvWriter::num(epsilons[i]), CsvWriter::num(means[i]), ordering,
                     CsvWriter::num(rho)});
    }
  }
  write_plot_script(cfg, "nnd_grid_summary.csv", "NND vs noise level",
                    "plot csv using 3:(stringcolumn(1) eq \"streaming\" ? $4 : 1/0) "
                    "with points pt 7 title \"streaming\", \\\n"
                    "     csv using 3:(stringcolumn(1) eq \"fixed\" ? $4 : 1/0) "
                    "with points pt 5 title \"fixed\"");
}

void run_adversarial(const ExperimentConfig& cfg) {
  SyntheticSampler sampler = cfg.has("sampler")
                                 ? sampler_from_config(cfg, "sampler")
                                 : SyntheticSampler::ring(8, 1.0, 0.05);
  std::size_t n_train = static_cast<std::size_t>(cfg.get_int("n_train", 1000));
  std::size_t n_test = static_cast<std::size_t>(cfg.get_int("n_test", 1000));
  std::size_t k = static_cast<std::size_t>(cfg.get_int("kmeans_k", (long)sampler.num_classes()));
  std::size_t knn_k = static_cast<std::size_t>(cfg.get_int("knn_k", 3));
  double beta = cfg.get_num("beta", 8.0);

  CsvWriter csv(cfg.out_dir + "/adversarial.csv",
                {"target", "distinct_count", "rows", "metric", "value", "seed"});
  for (uint64_t seed : cfg.seeds) {
    auto [train, test] = split_disjoint(sampler, n_train, n_test, seed);

    MinimalDataset dstar_is = build_dstar_is(train, sampler.num_classes());
    NearestLabelClassifier oracle(train, sampler.num_classes());
    double fis = inception_pseudo_divergence(oracle, dstar_is.rows);
    csv.row({"is", CsvWriter::num(dstar_is.distinct_count), CsvWriter::num(dstar_is.rows.size()),
             "f_is", CsvWriter::num(fis), CsvWriter::num(seed)});

    MinimalDataset dstar_km = build_dstar_kmeans(train, test, k, seed);
    auto km = kmeans_pr(test, dstar_km.rows, k, beta, seed);
    csv.row({"kmeans_pr", CsvWriter::num(dstar_km.distinct_count),
             CsvWriter::num(dstar_km.rows.size()), "f_beta", CsvWriter::num(km.f_beta),
             CsvWriter::num(seed)});
    csv.row({"kmeans_pr", CsvWriter::num(dstar_km.distinct_count),
             CsvWriter::num(dstar_km.rows.size()), "f_inv_beta", CsvWriter::num(km.f_inv_beta),
             CsvWriter::num(seed)});

    MinimalDataset dstar_knn = build_dstar_knn(train);
    Dataset fake = dstar_knn_multiset(dstar_knn, knn_k);
    auto pr = knn_pr(test, fake, knn_k);
    csv.row({"knn_pr", CsvWriter::num(dstar_knn.distinct_count),
             CsvWriter::num(fake.size()), "precision", CsvWriter::num(pr.precision),
             CsvWriter::num(seed)});
    csv.row({"knn_pr", CsvWriter::num(dstar_knn.distinct_count),
             CsvWriter::num(fake.size()), "recall", CsvWriter::num(pr.recall),
             CsvWriter::num(seed)});
  }
  write_plot_script(cfg, "adversarial.csv", "minimal fooling datasets",
                    "plot csv using 2:5 with points pt 7 title \"metric value vs |D*|\"");
}

void run_monotonicity(const ExperimentConfig& cfg) {
  SyntheticSampler sampler =
      cfg.has("sampler") ? sampler_from_config(cfg, "sampler")
                         : SyntheticSampler::gaussian_mixture(Matrix(1, 2), {1.0}, {1.0});
  std::size_t m = static_cast<std::size_t>(cfg.get_int("m", 1000));
  std::vector<std::size_t> sizes = parse_size_list(cfg.get("sizes", "100,400,1600"));
  int n_seeds = static_cast<int>(cfg.get_int("n_seeds", 5));
  std::size_t knn_k = static_cast<std::size_t>(cfg.get_int("knn_k", 3));
  NndConfig nnd = nnd_from_config(cfg);
  unsigned threads = threads_from_config(cfg);
  uint64_t seed = cfg.seeds.front();

  DatasetMetric nnd_metric = [&nnd](const Dataset& test, const Dataset& dn) {
    NndConfig local = nnd;
    local.seed = Rng::substream(nnd.seed, "probe-nnd", dn.size()).next_u64();
    NoisyMemorizer gen(dn, 0.0);
    return nnd_fixed(local, test, gen, test.size(), local.seed);
  };
  DatasetMetric knn_recall_dstar = [knn_k](const Dataset& test, const Dataset& dn) {
    return knn_pr(test, dstar_knn_multiset(build_dstar_knn(dn), knn_k), knn_k).recall;
  };

  CsvWriter csv(cfg.out_dir + "/monotonicity.csv", {"metric", "size", "seed", "value"});
  CsvWriter summary(cfg.out_dir + "/monotonicity_summary.csv",
                    {"metric", "strictly_decreasing"});
  auto emit = [&](const std::string& name, const ProbeResult& probe) {
    for (const auto& row : probe.rows)
      csv.row({name, CsvWriter::num(row.size), CsvWriter::num(row.seed),
               CsvWriter::num(row.value)});
    // verdict row: 1 when the mean sequence strictly decreases
    csv.row({name + ":strictly_decreasing", "0", "0",
             probe.strictly_decreasing ? "1" : "0"});
    summary.row({name, probe.strictly_decreasing ? "yes" : "no"});
  };
  emit("nnd_fixed", monotonicity_probe(nnd_metric, sampler, m, sizes, n_seeds, seed, threads));
  emit("knn_recall_dstar",
       monotonicity_probe(knn_recall_dstar, sampler, m, sizes, n_seeds, seed, threads));
  write_plot_script(cfg, "monotonicity.csv", "divergence vs generator support size",
                    "plot csv using 2:4 with points pt 7 title \"metric value\"");
}

void run_train_gan(const ExperimentConfig& cfg) {
  SyntheticSampler sampler = cfg.has("sampler") ? sampler_from_config(cfg, "sampler")
                                                : SyntheticSampler::two_moons(0.05);
  std::size_t n_train = static_cast<std::size_t>(cfg.get_int("n_train", 1024));
  std::size_t n_test = static_cast<std::size_t>(cfg.get_int("n_test", 1000));
  std::string eval_mode = cfg.get("eval_checkpoints", "final");  // final | none

  for (uint64_t seed : cfg.seeds) {
    GanConfig gan = desk_gan_config(parse_gan_variant(cfg.get("variant", "wgan1gp")), seed,
                                    cfg.get_int("lr_collapse", 0) != 0);
    gan.epochs = cfg.get_int("gan.epochs", gan.epochs);
    gan.batch_size = static_cast<std::size_t>(cfg.get_int("gan.batch_size", (long)gan.batch_size));
    gan.lr = cfg.get_num("gan.lr", gan.lr);
    gan.gp_weight = cfg.get_num("gan.gp_weight", gan.gp_weight);
    if (gan.variant == GanVariant::wgan_1gp_const)
      gan.const_weight = cfg.get_num("gan.const_weight", gan.const_weight);
    gan.checkpoint_every = cfg.get_int("gan.checkpoint_every", gan.checkpoint_every);

    auto [train, test] = split_disjoint(sampler, n_train, n_test, seed);
    std::string run_dir =
        cfg.out_dir + "/" + gan_variant_name(gan.variant) + "_seed" + std::to_string(seed);
    fs::create_directories(run_dir);
    GanRun run = train_gan(gan, train, run_dir);

    CsvWriter log(run_dir + "/training_log.csv",
                  {"epoch", "gen_loss", "disc_loss", "reg_value", "checkpoint"});
    for (const auto& e : run.log)
      log.row({CsvWriter::num(e.epoch), CsvWriter::num(e.gen_loss), CsvWriter::num(e.disc_loss),
               CsvWriter::num(e.reg_value), e.checkpoint});

    if (eval_mode == "final" || eval_mode == "all") {
      EvalSuiteConfig suite;
      suite.nnd = nnd_from_config(cfg);
      suite.seed = seed;
      suite.sample_n = n_test;
      suite.nnd_fixed_m = n_test;
      CsvWriter csv(run_dir + "/metrics.csv",
                    {"epoch", "metric_name", "value", "params", "seed"});
      auto emit = [&](long epoch, const MetricReport& report) {
        for (const auto& e : report.entries)
          csv.row({CsvWriter::num(epoch), e.metric, CsvWriter::num(e.value), e.params,
                   CsvWriter::num(e.seed)});
      };
      if (eval_mode == "all") {
        for (const auto& entry : run.log) {
          if (entry.checkpoint.empty()) continue;
          MlpGenerator gen(load_network(entry.checkpoint), run.latent);
          emit(entry.epoch, evaluate_checkpoint(gen, train, test, suite));
        }
      } else {
        MlpGenerator gen(run.generator, run.latent);
        emit(run.log.back().epoch, evaluate_checkpoint(gen, train, test, suite));
      }
    }
  }
  write_plot_script(cfg, "training_log.csv", "GAN training",
                    "plot csv using 1:2 with lines title \"gen\", csv using 1:3 with lines "
                    "title \"disc\"");
}

void run_comp_sweep(const ExperimentConfig& cfg) {
  std::size_t n_pairs = static_cast<std::size_t>(cfg.get_int("n_pairs", 4096));
  std::size_t T = static_cast<std::size_t>(cfg.get_int("T", 128));
  unsigned threads = threads_from_config(cfg);

  struct Entry {
    std::string id;
    std::shared_ptr<GeneratorModel> gen;
  };
  std::vector<Entry> gens;
  LatentSpec line{1, LatentSpec::Prior::uniform};
  gens.push_back({"identity_1d", std::make_shared<IdentityGenerator>(line)});
  gens.push_back({"linear_2d", std::make_shared<LinearGenerator>(
                                   Matrix{2, 1, 1.0}, std::vector<double>{0.0, 0.0})});
  gens.push_back(
      {"sigmoid_sharp50", std::make_shared<SigmoidStepGenerator>(
                              std::vector<double>{0.0, 0.0}, std::vector<double>{2.0, 0.0}, 50.0)});
  gens.push_back({"constant", std::make_shared<ConstantGenerator>(std::vector<double>{0.0, 0.0},
                                                                  LatentSpec{2})});
  for (const std::string& path : {cfg.get("checkpoint", "")}) {
    if (path.empty()) continue;
    MlpNetwork net = load_network(path);
    LatentSpec latent{net.input_width(), LatentSpec::Prior::uniform};
    gens.push_back({"checkpoint", std::make_shared<MlpGenerator>(std::move(net), latent)});
  }

  CsvWriter csv(cfg.out_dir + "/comp.csv", {"generator_id", "n_pairs", "T", "comp", "stderr",
                                            "pairwise_length", "seed"});
  for (uint64_t seed : cfg.seeds) {
    for (const auto& entry : gens) {
      CompEstimate est = comp(*entry.gen, n_pairs, T, seed, threads);
      double pl = pairwise_path_length(*entry.gen, n_pairs, T, seed, threads);
      csv.row({entry.id, CsvWriter::num(n_pairs), CsvWriter::num(T), CsvWriter::num(est.value),
               CsvWriter::num(est.standard_error), CsvWriter::num(pl), CsvWriter::num(seed)});
    }
  }
  write_plot_script(cfg, "comp.csv", "complexity vs pairwise path length",
                    "plot csv using 4:6 with points pt 7 title \"(comp, pairwise length)\"");
}

void run_dataset_gen(const ExperimentConfig& cfg) {
  SyntheticSampler sampler = sampler_from_config(cfg, "sampler");
  std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 1000));
  Dataset ds = sampler.sample(n, cfg.seeds.front());
  std::string format = cfg.get("format", "csv");
  std::string path = cfg.out_dir + "/dataset." + (format == "binary" ? "gmds" : "csv");
  if (format == "binary")
    save_dataset_binary(ds, path);
  else
    save_dataset_csv(ds, path);
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg);
  if (cfg.kind == "metrics")
    run_metrics(cfg);
  else if (cfg.kind == "nnd_noise_grid")
    run_nnd_noise_grid(cfg);
  else if (cfg.kind == "adversarial")
    run_adversarial(cfg);
  else if (cfg.kind == "monotonicity")
    run_monotonicity(cfg);
  else if (cfg.kind == "train_gan")
    run_train_gan(cfg);
  else if (cfg.kind == "comp_sweep")
    run_comp_sweep(cfg);
  else if (cfg.kind == "dataset_gen")
    run_dataset_gen(cfg);
}

}  // namespace genmeter
