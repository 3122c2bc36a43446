#include "wmark/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "wmark/embed.hpp"
#include "wmark/hash.hpp"
#include "wmark/io.hpp"
#include "wmark/rng.hpp"
#include "wmark/stats.hpp"
#include "wmark/version.hpp"

namespace wmark {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Per-trial seed: recorded in every CSV row so any single trial can be
// reproduced without replaying the whole run.
std::uint64_t trial_seed_of(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  std::vector<std::uint8_t> msg(16 + tag.size());
  store_be64(master, msg.data());
  store_be64(index, msg.data() + 8);
  std::copy(tag.begin(), tag.end(), msg.begin() + 16);
  return load_be64(sha256(msg).data());
}

class Csv {
 public:
  explicit Csv(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// Results land in a preallocated slot per trial, so the fold over trial
// order (and therefore every output byte) is independent of scheduling.
template <typename Result, typename Fn>
std::vector<Result> map_trials(std::uint64_t count, unsigned threads, Fn&& fn) {
  std::vector<Result> out(count);
  if (threads <= 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, count));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

std::vector<std::uint8_t> random_message(std::uint64_t seed, int bits) {
  RngStream rng = derive_stream(seed, "message", 0);
  std::vector<std::uint8_t> out(bits);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next_u32() & 1u);
  return out;
}

std::string channel_desc(const ChannelSpec& spec) {
  std::string s = channel_kind_name(spec.kind) + ":" + fmt(spec.intensity) +
                  ":seed=" + std::to_string(spec.seed);
  if (spec.kind == ChannelKind::prefix_crop && spec.assume_aligned) s += ":aligned";
  return s;
}

std::string channels_desc(const std::vector<ChannelSpec>& specs) {
  if (specs.empty()) return "clean";
  std::string s;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) s += '+';
    s += channel_desc(specs[i]);
  }
  return s;
}

TokenSequence apply_channels(TokenSequence seq, std::vector<ChannelSpec> specs,
                             const Codebook& codebook) {
  for (const ChannelSpec& spec : specs) seq = apply_channel(seq, spec, codebook);
  return seq;
}

// Best-effort bit accuracy: decoded message when error correction
// succeeded, raw systematic bits otherwise.
double trial_bit_accuracy(const DetectionReport& report, const BchCode& code,
                          std::span<const std::uint8_t> truth, double tau) {
  std::vector<std::uint8_t> got;
  if (report.status == DetectionStatus::watermarked && !report.decoded_message.empty()) {
    got = report.decoded_message;
  } else if (!report.block_ratios.empty()) {
    std::vector<std::uint8_t> raw = decode_bits(report.block_ratios, tau);
    got.assign(raw.begin() + (code.n - code.k), raw.begin() + (code.n - code.k) + truth.size());
  } else {
    return 0.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (i < got.size() && got[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace

Codebook CodebookSource::open() const {
  if (path) return load_codebook(*path);
  return Codebook::synth(synth_seed, synth_k, synth_d);
}

std::string CodebookSource::describe() const {
  if (path) return "file:" + path->string();
  return "synth:k=" + std::to_string(synth_k) + ",d=" + std::to_string(synth_d) +
         ",seed=" + std::to_string(synth_seed);
}

PartitionSpec ExperimentConfig::partition_spec() const {
  return PartitionSpec(key, gamma, generator.codebook_size, partition_mode);
}

namespace {

template <typename T>
T require(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("missing required field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

ChannelSpec channel_from_json(const nlohmann::json& j, const std::string& where) {
  ChannelSpec spec;
  spec.kind = channel_kind_from_name(require<std::string>(j, "kind"));
  spec.intensity = require<double>(j, "intensity");
  spec.seed = optional_field<std::uint64_t>(j, "seed", 0);
  spec.assume_aligned = optional_field<bool>(j, "assume_aligned", false);
  spec.neighbor_count = optional_field<std::uint32_t>(j, "neighbor_count", 8);
  if (spec.neighbor_count < 1) throw ConfigError(where + ": neighbor_count must be >= 1");
  return spec;
}

nlohmann::json channel_to_json(const ChannelSpec& spec) {
  nlohmann::json j{{"kind", channel_kind_name(spec.kind)},
                   {"intensity", spec.intensity},
                   {"seed", spec.seed}};
  if (spec.kind == ChannelKind::prefix_crop) j["assume_aligned"] = spec.assume_aligned;
  if (spec.kind == ChannelKind::neighbor_flip) j["neighbor_count"] = spec.neighbor_count;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.version = optional_field<int>(j, "version", 1);
  if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));
  c.master_seed = require<std::uint64_t>(j, "master_seed");
  c.threads = optional_field<unsigned>(j, "threads", 1);
  if (c.threads < 1) throw ConfigError("field 'threads': must be >= 1");

  const auto& cb = j.contains("codebook") ? j.at("codebook") : nlohmann::json::object();
  if (cb.contains("path")) {
    c.codebook.path = cb.at("path").get<std::string>();
  } else if (cb.contains("synth")) {
    const auto& s = cb.at("synth");
    c.codebook.synth_k = require<std::uint32_t>(s, "k");
    c.codebook.synth_d = require<std::uint32_t>(s, "d");
    c.codebook.synth_seed = optional_field<std::uint64_t>(s, "seed", 0);
  } else {
    throw ConfigError("field 'codebook': needs either 'path' or 'synth'");
  }

  const auto& part = j.contains("partition") ? j.at("partition") : nlohmann::json::object();
  const auto key_hex = require<std::string>(part, "key_hex");
  try {
    c.key = hex_decode(key_hex);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'partition.key_hex': ") + e.what());
  }
  c.gamma = optional_field<double>(part, "gamma", 0.5);
  const auto mode = optional_field<std::string>(part, "mode", "adaptive");
  if (mode == "adaptive") c.partition_mode = PartitionMode::adaptive;
  else if (mode == "static") c.partition_mode = PartitionMode::static_key;
  else throw ConfigError("field 'partition.mode': must be 'adaptive' or 'static'");

  const auto& gen = j.contains("generator") ? j.at("generator") : nlohmann::json::object();
  const auto paradigm = require<std::string>(gen, "paradigm");
  if (paradigm == "next-token") {
    c.generator.paradigm = Paradigm::next_token;
    c.generator.length = require<std::uint64_t>(gen, "length");
  } else if (paradigm == "next-scale") {
    c.generator.paradigm = Paradigm::next_scale;
    c.generator.scale_sizes =
        optional_field<std::vector<std::uint64_t>>(gen, "scales", default_scale_schedule());
  } else {
    throw ConfigError("field 'generator.paradigm': must be 'next-token' or 'next-scale'");
  }
  const auto family = optional_field<std::string>(gen, "family", "uniform");
  if (family == "uniform") c.generator.family = GeneratorFamily::uniform;
  else if (family == "markov") c.generator.family = GeneratorFamily::markov;
  else throw ConfigError("field 'generator.family': must be 'uniform' or 'markov'");
  c.generator.markov_neighbor_prob = optional_field<double>(gen, "neighbor_prob", 0.7);
  c.generator.markov_neighbor_count = optional_field<std::uint32_t>(gen, "neighbor_count", 16);

  c.message_bits = optional_field<int>(j, "message_bits", 32);
  c.alpha = optional_field<double>(j, "alpha", 0.01);
  if (!(c.alpha > 0.0 && c.alpha < 0.5)) throw ConfigError("field 'alpha': must lie in (0, 0.5)");
  c.trials = optional_field<std::uint64_t>(j, "trials", 1000);
  if (c.trials < 1) throw ConfigError("field 'trials': must be >= 1");

  if (j.contains("channels")) {
    if (!j.at("channels").is_array()) throw ConfigError("field 'channels': must be an array");
    for (const auto& ch : j.at("channels")) {
      c.channels.push_back(channel_from_json(ch, "channels"));
    }
  }

  const auto& cal = j.contains("calibration") ? j.at("calibration") : nlohmann::json::object();
  c.calibration_trials = optional_field<std::uint64_t>(cal, "trials", 20000);
  c.calibration_seed = optional_field<std::uint64_t>(cal, "seed", 1);
  c.calibration_cache_dir = optional_field<std::string>(cal, "cache_dir", ".wmark-calibration");

  c.experiments = optional_field<std::vector<std::string>>(
      j, "experiments", {"fpr", "capacity", "robustness", "security", "forgery"});
  for (const auto& e : c.experiments) {
    if (e != "fpr" && e != "capacity" && e != "robustness" && e != "security" &&
        e != "forgery") {
      throw ConfigError("field 'experiments': unknown experiment '" + e + "'");
    }
  }
  c.fpr_alphas = optional_field<std::vector<double>>(j, "fpr_alphas", {0.05, 0.01});
  c.capacity_message_lengths =
      optional_field<std::vector<int>>(j, "capacity_message_lengths", {16, 32, 48, 64});

  if (j.contains("robustness")) {
    const auto& r = j.at("robustness");
    c.robustness.kind = channel_kind_from_name(
        optional_field<std::string>(r, "kind", "neighbor-flip"));
    c.robustness.intensities =
        optional_field<std::vector<double>>(r, "intensities", {0.0, 0.05, 0.1, 0.2});
    c.robustness.neighbor_count = optional_field<std::uint32_t>(r, "neighbor_count", 8);
  } else {
    c.robustness.intensities = {0.0, 0.05, 0.1, 0.2};
  }
  c.forgery_exposures =
      optional_field<std::vector<double>>(j, "forgery_exposures", {0.25, 0.5});
  for (double f : c.forgery_exposures) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ConfigError("field 'forgery_exposures': fractions must lie in [0, 1]");
    }
  }

  // Fail fast on inconsistent combinations.
  c.generator.codebook_size = 0;  // filled from the codebook below
  return c;
}

// The echo leaves the worker count out: scheduling is not allowed to
// influence any output byte, so it is not part of the run's identity.
nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["version"] = c.version;
  j["master_seed"] = c.master_seed;
  if (c.codebook.path) {
    j["codebook"] = {{"path", c.codebook.path->string()}};
  } else {
    j["codebook"] = {{"synth", {{"k", c.codebook.synth_k},
                                {"d", c.codebook.synth_d},
                                {"seed", c.codebook.synth_seed}}}};
  }
  j["partition"] = {{"key_hex", hex_encode(c.key)},
                    {"gamma", c.gamma},
                    {"mode", c.partition_mode == PartitionMode::adaptive ? "adaptive" : "static"}};
  nlohmann::json gen;
  if (c.generator.paradigm == Paradigm::next_token) {
    gen["paradigm"] = "next-token";
    gen["length"] = c.generator.length;
  } else {
    gen["paradigm"] = "next-scale";
    gen["scales"] = c.generator.scale_sizes;
  }
  gen["family"] = c.generator.family == GeneratorFamily::uniform ? "uniform" : "markov";
  gen["neighbor_prob"] = c.generator.markov_neighbor_prob;
  gen["neighbor_count"] = c.generator.markov_neighbor_count;
  j["generator"] = gen;
  j["message_bits"] = c.message_bits;
  j["alpha"] = c.alpha;
  j["trials"] = c.trials;
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& ch : c.channels) channels.push_back(channel_to_json(ch));
  j["channels"] = channels;
  j["calibration"] = {{"trials", c.calibration_trials},
                      {"seed", c.calibration_seed},
                      {"cache_dir", c.calibration_cache_dir.string()}};
  j["experiments"] = c.experiments;
  j["fpr_alphas"] = c.fpr_alphas;
  j["capacity_message_lengths"] = c.capacity_message_lengths;
  j["robustness"] = {{"kind", channel_kind_name(c.robustness.kind)},
                     {"intensities", c.robustness.intensities},
                     {"neighbor_count", c.robustness.neighbor_count}};
  j["forgery_exposures"] = c.forgery_exposures;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

CalibrationCache::CalibrationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CalibrationCache::entry_path(std::uint64_t total_positions,
                                                   std::uint32_t block_count, double gamma,
                                                   double alpha, std::uint64_t trials,
                                                   std::uint64_t seed) const {
  char key[256];
  std::snprintf(key, sizeof(key), "v1|%llu|%u|%.17g|%.17g|%llu|%llu",
                static_cast<unsigned long long>(total_positions), block_count, gamma, alpha,
                static_cast<unsigned long long>(trials),
                static_cast<unsigned long long>(seed));
  return dir_ / (hex_encode(sha256(std::string_view(key))) + ".json");
}

CalibrationRecord CalibrationCache::get_or_compute(std::uint64_t total_positions,
                                                   std::uint32_t block_count, double gamma,
                                                   double alpha, std::uint64_t trials,
                                                   std::uint64_t seed, unsigned threads,
                                                   bool* hit) {
  const std::filesystem::path path =
      entry_path(total_positions, block_count, gamma, alpha, trials, seed);
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    if (hit) *hit = true;
    return calibration_from_json(j);
  }
  CalibrationRecord record =
      calibrate_threshold(total_positions, block_count, gamma, alpha, trials, seed, threads);
  std::ofstream out(path);
  out << calibration_to_json(record).dump(2) << "\n";
  if (hit) *hit = false;
  return record;
}

namespace {

struct RunContext {
  const ExperimentConfig& config;
  const Codebook& codebook;
  CalibrationCache& cache;
  std::filesystem::path outdir;
};

struct FprTrial {
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

nlohmann::json run_fpr(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const PartitionSpec spec = cfg.partition_spec();
  const std::uint64_t n = cfg.generator.total_length();

  auto trials = map_trials<FprTrial>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    FprTrial r;
    r.seed = trial_seed_of(cfg.master_seed, "fpr", t);
    TokenSequence seq = get_token_sequence(cfg.generator, &ctx.codebook, r.seed);
    r.ratio = static_cast<double>(count_green(seq, spec)) / static_cast<double>(seq.size());
    return r;
  });

  Csv rows(ctx.outdir / "fpr_trials.csv");
  rows.row({"trial", "seed", "channel", "green_ratio"});
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    rows.row({std::to_string(t), std::to_string(trials[t].seed), "clean", fmt(trials[t].ratio)});
  }

  Csv summary(ctx.outdir / "fpr_summary.csv");
  summary.row({"alpha", "threshold", "trials", "false_positives", "fpr", "wilson_lo",
               "wilson_hi"});
  nlohmann::json out = nlohmann::json::array();
  for (double alpha : cfg.fpr_alphas) {
    const double threshold = cfg.gamma + normal_quantile(1.0 - alpha) *
                                             std::sqrt(cfg.gamma * (1.0 - cfg.gamma) /
                                                       static_cast<double>(n));
    std::uint64_t fp = 0;
    for (const FprTrial& r : trials) fp += r.ratio > threshold ? 1 : 0;
    const double rate = static_cast<double>(fp) / static_cast<double>(cfg.trials);
    const WilsonInterval ci = wilson_interval(fp, cfg.trials);
    summary.row({fmt(alpha), fmt(threshold), std::to_string(cfg.trials), std::to_string(fp),
                 fmt(rate), fmt(ci.lo), fmt(ci.hi)});
    out.push_back({{"alpha", alpha},
                   {"threshold", threshold},
                   {"false_positives", fp},
                   {"fpr", rate},
                   {"wilson", {ci.lo, ci.hi}}});
  }
  return out;
}

struct CapacityTrial {
  std::uint64_t seed = 0;
  bool detected = false;
  double bit_accuracy = 0.0;
  bool exact = false;
  int corrected = -1;
};

nlohmann::json run_capacity(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const PartitionSpec spec = cfg.partition_spec();

  Csv rows(ctx.outdir / "capacity_trials.csv");
  rows.row({"message_bits", "trial", "seed", "channel", "detected", "bit_accuracy",
            "exact_message", "corrected_errors"});
  Csv summary(ctx.outdir / "capacity_summary.csv");
  summary.row({"message_bits", "code", "trials", "mean_bit_accuracy", "bit_wilson_lo",
               "bit_wilson_hi", "exact_rate"});
  nlohmann::json out = nlohmann::json::array();

  for (int bits : cfg.capacity_message_lengths) {
    const BchCode& code = select_code(bits);
    const std::uint64_t n = cfg.generator.total_length();
    const CalibrationRecord calibration = ctx.cache.get_or_compute(
        n, static_cast<std::uint32_t>(code.n), cfg.gamma, cfg.alpha, cfg.calibration_trials,
        cfg.calibration_seed, cfg.threads);
    const std::string tag = "capacity-b" + std::to_string(bits);

    auto trials = map_trials<CapacityTrial>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
      CapacityTrial r;
      r.seed = trial_seed_of(cfg.master_seed, tag, t);
      const std::vector<std::uint8_t> message = random_message(r.seed, bits);
      TokenSequence seq = get_token_sequence(cfg.generator, &ctx.codebook, r.seed);
      WatermarkLayout layout = layout_for(seq, static_cast<std::uint32_t>(code.n));
      MessagePayload payload = encode_message(message);
      TokenSequence marked = embed_sequence(seq, layout, payload.codeword, spec, ctx.codebook);
      std::vector<ChannelSpec> channels = cfg.channels;
      for (std::size_t i = 0; i < channels.size(); ++i) {
        channels[i].seed = mix64(r.seed + i + 1);
      }
      TokenSequence received = apply_channels(decode_image(marked), channels, ctx.codebook);
      DetectionReport report = extract(received, layout, spec, code, 0.5, cfg.alpha,
                                       &calibration, DetectionMode::folded, bits);
      r.detected = report.detected;
      r.corrected = report.corrected_errors;
      r.bit_accuracy = trial_bit_accuracy(report, code, message, 0.5);
      r.exact = report.status == DetectionStatus::watermarked &&
                report.decoded_message == message;
      return r;
    });

    std::uint64_t correct_bits = 0, exact = 0;
    std::vector<ChannelSpec> channel_echo = cfg.channels;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      const CapacityTrial& r = trials[t];
      for (std::size_t i = 0; i < channel_echo.size(); ++i) {
        channel_echo[i].seed = mix64(r.seed + i + 1);
      }
      rows.row({std::to_string(bits), std::to_string(t), std::to_string(r.seed),
                channels_desc(channel_echo), r.detected ? "1" : "0", fmt(r.bit_accuracy),
                r.exact ? "1" : "0", std::to_string(r.corrected)});
      correct_bits += static_cast<std::uint64_t>(
          std::llround(r.bit_accuracy * static_cast<double>(bits)));
      exact += r.exact ? 1 : 0;
    }
    const std::uint64_t total_bits = cfg.trials * static_cast<std::uint64_t>(bits);
    const double mean_acc = static_cast<double>(correct_bits) / static_cast<double>(total_bits);
    const WilsonInterval ci = wilson_interval(correct_bits, total_bits);
    const double exact_rate = static_cast<double>(exact) / static_cast<double>(cfg.trials);
    const std::string code_name =
        "BCH(" + std::to_string(code.n) + "," + std::to_string(code.k) + "," +
        std::to_string(code.d) + ")";
    summary.row({std::to_string(bits), code_name, std::to_string(cfg.trials), fmt(mean_acc),
                 fmt(ci.lo), fmt(ci.hi), fmt(exact_rate)});
    out.push_back({{"message_bits", bits},
                   {"code", code_name},
                   {"mean_bit_accuracy", mean_acc},
                   {"exact_rate", exact_rate}});
  }
  return out;
}

struct RobustnessTrial {
  std::uint64_t seed = 0;
  bool detected = false;
  double bit_accuracy = 0.0;
};

nlohmann::json run_robustness(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const PartitionSpec spec = cfg.partition_spec();
  const BchCode& code = select_code(cfg.message_bits);
  const std::uint64_t n = cfg.generator.total_length();
  const CalibrationRecord calibration = ctx.cache.get_or_compute(
      n, static_cast<std::uint32_t>(code.n), cfg.gamma, cfg.alpha, cfg.calibration_trials,
      cfg.calibration_seed, cfg.threads);

  Csv rows(ctx.outdir / "robustness_trials.csv");
  rows.row({"intensity", "trial", "seed", "channel", "detected", "bit_accuracy"});
  Csv summary(ctx.outdir / "robustness_summary.csv");
  summary.row({"kind", "intensity", "trials", "tpr", "tpr_wilson_lo", "tpr_wilson_hi",
               "mean_bit_accuracy"});
  nlohmann::json out = nlohmann::json::array();

  for (double intensity : cfg.robustness.intensities) {
    const std::string tag = "robustness-" + fmt(intensity);
    auto trials = map_trials<RobustnessTrial>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
      RobustnessTrial r;
      r.seed = trial_seed_of(cfg.master_seed, tag, t);
      const std::vector<std::uint8_t> message = random_message(r.seed, cfg.message_bits);
      TokenSequence seq = get_token_sequence(cfg.generator, &ctx.codebook, r.seed);
      WatermarkLayout layout = layout_for(seq, static_cast<std::uint32_t>(code.n));
      MessagePayload payload = encode_message(message);
      TokenSequence marked = embed_sequence(seq, layout, payload.codeword, spec, ctx.codebook);
      ChannelSpec channel{cfg.robustness.kind, intensity, mix64(r.seed + 1), false,
                          cfg.robustness.neighbor_count};
      TokenSequence received = apply_channel(decode_image(marked), channel, ctx.codebook);
      DetectionReport report = extract(received, layout, spec, code, 0.5, cfg.alpha,
                                       &calibration, DetectionMode::folded, cfg.message_bits);
      r.detected = report.detected;
      r.bit_accuracy = trial_bit_accuracy(report, code, message, 0.5);
      return r;
    });

    std::uint64_t detected = 0, correct_bits = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      const RobustnessTrial& r = trials[t];
      ChannelSpec channel{cfg.robustness.kind, intensity, mix64(r.seed + 1), false,
                          cfg.robustness.neighbor_count};
      rows.row({fmt(intensity), std::to_string(t), std::to_string(r.seed),
                channel_desc(channel), r.detected ? "1" : "0", fmt(r.bit_accuracy)});
      detected += r.detected ? 1 : 0;
      correct_bits += static_cast<std::uint64_t>(
          std::llround(r.bit_accuracy * static_cast<double>(cfg.message_bits)));
    }
    const double tpr = static_cast<double>(detected) / static_cast<double>(cfg.trials);
    const WilsonInterval ci = wilson_interval(detected, cfg.trials);
    const double acc = static_cast<double>(correct_bits) /
                       static_cast<double>(cfg.trials * cfg.message_bits);
    summary.row({channel_kind_name(cfg.robustness.kind), fmt(intensity),
                 std::to_string(cfg.trials), fmt(tpr), fmt(ci.lo), fmt(ci.hi), fmt(acc)});
    out.push_back({{"intensity", intensity},
                   {"tpr", tpr},
                   {"mean_bit_accuracy", acc}});
  }
  return out;
}

struct SecurityTrial {
  std::uint64_t seed = 0;
  double correct_key = 0.0;
  double wrong_key = 0.0;
  double unwatermarked = 0.0;
};

nlohmann::json run_security(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const PartitionSpec spec = cfg.partition_spec();
  const std::uint64_t n = cfg.generator.total_length();
  const BchCode& code = select_code(cfg.message_bits);

  auto trials = map_trials<SecurityTrial>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    SecurityTrial r;
    r.seed = trial_seed_of(cfg.master_seed, "security", t);
    const std::vector<std::uint8_t> message = random_message(r.seed, cfg.message_bits);
    TokenSequence seq = get_token_sequence(cfg.generator, &ctx.codebook, r.seed);
    WatermarkLayout layout = layout_for(seq, static_cast<std::uint32_t>(code.n));
    MessagePayload payload = encode_message(message);
    TokenSequence marked = embed_sequence(seq, layout, payload.codeword, spec, ctx.codebook);

    Digest256 wrong = sha256("wrong-key-" + std::to_string(r.seed));
    PartitionSpec wrong_spec(std::vector<std::uint8_t>(wrong.begin(), wrong.end()), cfg.gamma,
                             cfg.generator.codebook_size, cfg.partition_mode);

    const double inv_n = 1.0 / static_cast<double>(n);
    r.correct_key = static_cast<double>(count_green(marked, spec)) * inv_n;
    r.wrong_key = static_cast<double>(count_green(marked, wrong_spec)) * inv_n;
    r.unwatermarked = static_cast<double>(count_green(seq, spec)) * inv_n;
    return r;
  });

  Csv rows(ctx.outdir / "security_trials.csv");
  rows.row({"trial", "seed", "channel", "correct_key_ratio", "wrong_key_ratio",
            "unwatermarked_ratio"});
  double sum_correct = 0.0, sum_wrong = 0.0, sum_null = 0.0;
  std::array<std::array<std::uint64_t, 101>, 3> histogram{};
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const SecurityTrial& r = trials[t];
    rows.row({std::to_string(t), std::to_string(r.seed), "clean", fmt(r.correct_key),
              fmt(r.wrong_key), fmt(r.unwatermarked)});
    sum_correct += r.correct_key;
    sum_wrong += r.wrong_key;
    sum_null += r.unwatermarked;
    auto bin = [](double v) {
      int b = static_cast<int>(v * 100.0);
      return static_cast<std::size_t>(std::clamp(b, 0, 100));
    };
    ++histogram[0][bin(r.correct_key)];
    ++histogram[1][bin(r.wrong_key)];
    ++histogram[2][bin(r.unwatermarked)];
  }

  Csv hist(ctx.outdir / "security_histogram.csv");
  hist.row({"bin_lo", "bin_hi", "correct_key", "wrong_key", "unwatermarked"});
  for (std::size_t b = 0; b <= 100; ++b) {
    hist.row({fmt(b / 100.0), fmt((b + 1) / 100.0), std::to_string(histogram[0][b]),
              std::to_string(histogram[1][b]), std::to_string(histogram[2][b])});
  }

  const double inv_trials = 1.0 / static_cast<double>(cfg.trials);
  nlohmann::json out = {{"mean_correct_key", sum_correct * inv_trials},
                        {"mean_wrong_key", sum_wrong * inv_trials},
                        {"mean_unwatermarked", sum_null * inv_trials}};
  Csv summary(ctx.outdir / "security_summary.csv");
  summary.row({"condition", "trials", "mean_green_ratio"});
  summary.row({"correct_key", std::to_string(cfg.trials), fmt(sum_correct * inv_trials)});
  summary.row({"wrong_key", std::to_string(cfg.trials), fmt(sum_wrong * inv_trials)});
  summary.row({"unwatermarked", std::to_string(cfg.trials), fmt(sum_null * inv_trials)});
  return out;
}

struct ForgeryTrial {
  std::uint64_t seed = 0;
  bool folded_success = false;
  bool plain_success = false;
};

// The adversary learns the per-position partition at an exposed subset of
// positions and plants green tokens wherever that knowledge applies.
// Under a static partition, one exposed position reveals the partition
// at every position, so any non-zero exposure lets the adversary force
// green everywhere; under adaptive partitioning the knowledge is useless
// beyond the exposed positions, which stay a fixed fraction.
nlohmann::json run_forgery(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const std::uint64_t n = cfg.generator.total_length();
  const std::uint32_t k = cfg.generator.codebook_size;
  const BchCode& code = select_code(cfg.message_bits);
  const CalibrationRecord calibration = ctx.cache.get_or_compute(
      n, static_cast<std::uint32_t>(code.n), cfg.gamma, cfg.alpha, cfg.calibration_trials,
      cfg.calibration_seed, cfg.threads);
  const WatermarkLayout layout = partition_blocks(n, static_cast<std::uint32_t>(code.n));

  Csv rows(ctx.outdir / "forgery_trials.csv");
  rows.row({"mode", "exposure", "trial", "seed", "channel", "folded_success",
            "plain_z_success"});
  Csv summary(ctx.outdir / "forgery_summary.csv");
  summary.row({"mode", "exposure", "trials", "folded_success_rate", "wilson_lo", "wilson_hi",
               "plain_z_success_rate"});
  nlohmann::json out = nlohmann::json::array();

  for (const char* mode_name : {"adaptive", "static"}) {
    const bool is_static = std::string_view(mode_name) == "static";
    const PartitionSpec spec(cfg.key, cfg.gamma, k,
                             is_static ? PartitionMode::static_key : PartitionMode::adaptive);
    for (double exposure : cfg.forgery_exposures) {
      const auto exposed_count = static_cast<std::uint64_t>(
          std::floor(exposure * static_cast<double>(n)));
      const std::string tag =
          std::string("forgery-") + mode_name + "-" + fmt(exposure);

      auto trials = map_trials<ForgeryTrial>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
        ForgeryTrial r;
        r.seed = trial_seed_of(cfg.master_seed, tag, t);
        RngStream rng = derive_stream(r.seed, "forgery", 0);

        // Exposed subset: partial Fisher-Yates over the positions.
        std::vector<std::uint64_t> positions(n);
        std::iota(positions.begin(), positions.end(), 0);
        std::vector<bool> exposed(n, false);
        for (std::uint64_t i = 0; i < exposed_count; ++i) {
          std::uint64_t j = i + rng.bounded(n - i);
          std::swap(positions[i], positions[j]);
          exposed[positions[i]] = true;
        }

        TokenSequence forged;
        forged.paradigm = Paradigm::next_token;
        forged.tokens.resize(n);
        const bool full_knowledge = is_static && exposed_count > 0;
        for (std::uint64_t i = 0; i < n; ++i) {
          if (full_knowledge || exposed[i]) {
            PositionPartition partition(spec, i);
            forged.tokens[i] = partition.token_at_rank(
                static_cast<std::uint32_t>(rng.bounded(partition.green_count())));
          } else {
            forged.tokens[i] = static_cast<std::uint32_t>(rng.bounded(k));
          }
        }

        r.folded_success = folded_detect(forged, layout, spec, cfg.alpha, calibration).detected;
        r.plain_success = zero_bit_test(forged, spec, cfg.alpha).detected;
        return r;
      });

      std::uint64_t folded = 0, plain = 0;
      for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const ForgeryTrial& r = trials[t];
        rows.row({mode_name, fmt(exposure), std::to_string(t), std::to_string(r.seed), "clean",
                  r.folded_success ? "1" : "0", r.plain_success ? "1" : "0"});
        folded += r.folded_success ? 1 : 0;
        plain += r.plain_success ? 1 : 0;
      }
      const double folded_rate = static_cast<double>(folded) / static_cast<double>(cfg.trials);
      const double plain_rate = static_cast<double>(plain) / static_cast<double>(cfg.trials);
      const WilsonInterval ci = wilson_interval(folded, cfg.trials);
      summary.row({mode_name, fmt(exposure), std::to_string(cfg.trials), fmt(folded_rate),
                   fmt(ci.lo), fmt(ci.hi), fmt(plain_rate)});
      out.push_back({{"mode", mode_name},
                     {"exposure", exposure},
                     {"folded_success_rate", folded_rate},
                     {"plain_z_success_rate", plain_rate},
                     {"wilson", {ci.lo, ci.hi}}});
    }
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> run_experiments(const ExperimentConfig& config_in,
                                                   const std::filesystem::path& output_dir) {
  ExperimentConfig config = config_in;
  std::filesystem::create_directories(output_dir);

  Codebook codebook = config.codebook.open();
  config.generator.codebook_size = codebook.size();
  const bool needs_embedding =
      std::any_of(config.experiments.begin(), config.experiments.end(),
                  [](const std::string& e) { return e != "fpr" && e != "forgery"; }) ||
      config.generator.family == GeneratorFamily::markov;
  if (needs_embedding) codebook.build_neighbor_lists();

  // Validate the partition parameters up front for a field-level message.
  try {
    (void)config.partition_spec();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'partition': ") + e.what());
  }
  try {
    config.generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'generator': ") + e.what());
  }

  CalibrationCache cache(config.calibration_cache_dir);
  RunContext ctx{config, codebook, cache, output_dir};

  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["config"] = config_to_json(config);
  summary["codebook"] = config.codebook.describe();

  std::vector<std::filesystem::path> written;
  auto note = [&](std::initializer_list<const char*> names) {
    for (const char* f : names) written.push_back(output_dir / f);
  };

  for (const std::string& exp : config.experiments) {
    if (exp == "fpr") {
      summary["fpr"] = run_fpr(ctx);
      note({"fpr_trials.csv", "fpr_summary.csv"});
    } else if (exp == "capacity") {
      summary["capacity"] = run_capacity(ctx);
      note({"capacity_trials.csv", "capacity_summary.csv"});
    } else if (exp == "robustness") {
      summary["robustness"] = run_robustness(ctx);
      note({"robustness_trials.csv", "robustness_summary.csv"});
    } else if (exp == "security") {
      summary["security"] = run_security(ctx);
      note({"security_trials.csv", "security_histogram.csv", "security_summary.csv"});
    } else if (exp == "forgery") {
      summary["forgery"] = run_forgery(ctx);
      note({"forgery_trials.csv", "forgery_summary.csv"});
    }
  }

  const std::filesystem::path summary_path = output_dir / "summary.json";
  std::ofstream out(summary_path);
  out << summary.dump(2) << "\n";
  written.push_back(summary_path);
  return written;
}

}  // namespace wmark
