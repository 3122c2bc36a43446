// Command-line front end: watermark embedding, extraction, detection,
// calibration and the experiment runner.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "wmark/bch.hpp"
#include "wmark/channel.hpp"
#include "wmark/detect.hpp"
#include "wmark/embed.hpp"
#include "wmark/experiment.hpp"
#include "wmark/hash.hpp"
#include "wmark/io.hpp"
#include "wmark/version.hpp"

namespace {

using namespace wmark;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotDetected = 2;
constexpr int kExitInternal = 3;

struct KeyOptions {
  std::string key_hex;
  double gamma = 0.5;
  bool static_partition = false;

  PartitionSpec spec(std::uint32_t codebook_size) const {
    return PartitionSpec(hex_decode(key_hex), gamma, codebook_size,
                         static_partition ? PartitionMode::static_key
                                          : PartitionMode::adaptive);
  }
};

void add_key_options(CLI::App* cmd, KeyOptions& opts) {
  cmd->add_option("--key", opts.key_hex, "secret key as a hex string (16..64 bytes)")
      ->envname("WMARK_KEY")
      ->required();
  cmd->add_option("--gamma", opts.gamma, "green ratio in (0, 1)")->default_val(0.5);
  cmd->add_flag("--static-partition", opts.static_partition,
                "position-independent partition (baseline mode)");
}

struct CodebookOptions {
  std::string path;
  std::string synth;  // "K,D,seed"

  Codebook open() const {
    if (!path.empty()) return load_codebook(path);
    std::uint32_t k = 0, d = 0;
    unsigned long long seed = 0;
    if (std::sscanf(synth.c_str(), "%u,%u,%llu", &k, &d, &seed) != 3) {
      throw CLI::ValidationError("--synth-codebook expects K,D,seed");
    }
    return Codebook::synth(seed, k, d);
  }
};

void add_codebook_options(CLI::App* cmd, CodebookOptions& opts) {
  auto* path = cmd->add_option("--codebook", opts.path, "codebook file");
  auto* synth = cmd->add_option("--synth-codebook", opts.synth,
                                "synthesize a codebook: K,D,seed");
  path->excludes(synth);
  synth->excludes(path);
  cmd->callback([path, synth]() {
    if (path->count() == 0 && synth->count() == 0) {
      throw CLI::RequiredError("--codebook or --synth-codebook");
    }
  });
}

std::vector<std::uint8_t> parse_bits(const std::string& s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw CLI::ValidationError("--message must be a string of 0s and 1s");
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  return bits;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stoull(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

int cmd_synth_codebook(const std::string& params, const std::string& out_path) {
  CodebookOptions opts;
  opts.synth = params;
  Codebook cb = opts.open();
  save_codebook(out_path, cb);
  std::cout << "wrote codebook K=" << cb.size() << " D=" << cb.dim() << " to " << out_path
            << "\n";
  return kExitOk;
}

nlohmann::json sidecar_json(const PartitionSpec& spec, const BchCode& code, int message_bits,
                            const TokenSequence& seq, const WatermarkLayout& layout,
                            std::uint64_t generator_seed, const std::string& codebook_desc) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["gamma"] = spec.gamma();
  j["partition_mode"] =
      spec.mode() == PartitionMode::adaptive ? "adaptive" : "static";
  j["message_bits"] = message_bits;
  j["code"] = {{"n", code.n}, {"k", code.k}, {"d", code.d}, {"t", code.t}};
  j["paradigm"] = seq.paradigm == Paradigm::next_scale ? "next-scale" : "next-token";
  j["n_positions"] = seq.size();
  j["n_blocks"] = layout.block_count();
  j["scale_boundaries"] = seq.scale_boundaries;
  j["generator_seed"] = generator_seed;
  j["codebook"] = codebook_desc;
  return j;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"token-level watermark codec and experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed a message into a token sequence");
  KeyOptions embed_key;
  CodebookOptions embed_cb;
  std::string embed_message, embed_in, embed_out, embed_sidecar, embed_paradigm = "next-token";
  std::string embed_scales, embed_family = "uniform";
  std::uint64_t embed_length = 256, embed_seed = 0;
  bool embed_text = false;
  add_key_options(embed_cmd, embed_key);
  add_codebook_options(embed_cmd, embed_cb);
  embed_cmd->add_option("--message", embed_message, "message bits, e.g. 0100111...")
      ->required();
  embed_cmd->add_option("--in", embed_in, "token sequence file to embed into");
  embed_cmd->add_option("--paradigm", embed_paradigm, "next-token | next-scale")
      ->check(CLI::IsMember({"next-token", "next-scale"}));
  embed_cmd->add_option("--length", embed_length, "sequence length (next-token)");
  embed_cmd->add_option("--scales", embed_scales, "per-scale token counts, e.g. 1,4,9,...");
  embed_cmd->add_option("--generator", embed_family, "uniform | markov")
      ->check(CLI::IsMember({"uniform", "markov"}));
  embed_cmd->add_option("--seed", embed_seed, "generation condition seed");
  embed_cmd->add_option("--out", embed_out, "output sequence file")->required();
  embed_cmd->add_option("--sidecar", embed_sidecar, "provenance sidecar (default <out>.json)");
  embed_cmd->add_flag("--text", embed_text, "write the text debug format");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "detect and decode a message");
  KeyOptions extract_key;
  std::string extract_in, extract_out, extract_mode = "folded";
  int extract_bits = 32;
  double extract_alpha = 0.01, extract_tau = 0.5;
  std::string extract_cache = ".wmark-calibration";
  std::uint64_t extract_cal_trials = 20000, extract_cal_seed = 1;
  unsigned extract_threads = 1;
  bool extract_text = false;
  add_key_options(extract_cmd, extract_key);
  extract_cmd->add_option("--in", extract_in, "token sequence file")->required();
  extract_cmd->add_option("--message-bits", extract_bits, "payload length in bits")
      ->default_val(32);
  extract_cmd->add_option("--alpha", extract_alpha, "significance level")->default_val(0.01);
  extract_cmd->add_option("--tau", extract_tau, "bit decision threshold")->default_val(0.5);
  extract_cmd->add_option("--mode", extract_mode, "folded | zero-bit")
      ->check(CLI::IsMember({"folded", "zero-bit"}));
  extract_cmd->add_option("--calibration-dir", extract_cache, "calibration cache directory");
  extract_cmd->add_option("--calibration-trials", extract_cal_trials,
                          "null trials for calibration");
  extract_cmd->add_option("--calibration-seed", extract_cal_seed, "calibration RNG seed");
  extract_cmd->add_option("--threads", extract_threads, "calibration worker threads");
  extract_cmd->add_option("--out", extract_out, "write the report JSON here");
  extract_cmd->add_flag("--text", extract_text, "input is the text debug format");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "zero-bit detection only");
  KeyOptions detect_key;
  std::string detect_in;
  double detect_alpha = 0.01;
  bool detect_scripting = false, detect_text = false;
  add_key_options(detect_cmd, detect_key);
  detect_cmd->add_option("--in", detect_in, "token sequence file")->required();
  detect_cmd->add_option("--alpha", detect_alpha, "significance level")->default_val(0.01);
  detect_cmd->add_flag("--scripting", detect_scripting,
                       "exit with status 2 when not watermarked");
  detect_cmd->add_flag("--text", detect_text, "input is the text debug format");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "fill the folded-null calibration cache");
  std::uint64_t cal_n = 256, cal_trials = 20000, cal_seed = 1;
  std::uint32_t cal_blocks = 63;
  double cal_gamma = 0.5, cal_alpha = 0.01;
  std::string cal_dir = ".wmark-calibration";
  unsigned cal_threads = 1;
  cal_cmd->add_option("--n-positions", cal_n, "sequence length")->required();
  cal_cmd->add_option("--n-blocks", cal_blocks, "block count")->required();
  cal_cmd->add_option("--gamma", cal_gamma, "green ratio")->default_val(0.5);
  cal_cmd->add_option("--alpha", cal_alpha, "significance level")->default_val(0.01);
  cal_cmd->add_option("--trials", cal_trials, "null trials")->default_val(20000);
  cal_cmd->add_option("--seed", cal_seed, "RNG seed")->default_val(1);
  cal_cmd->add_option("--cache-dir", cal_dir, "cache directory");
  cal_cmd->add_option("--threads", cal_threads, "worker threads")->default_val(1);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run the configured experiment suite");
  std::string exp_config, exp_out = "out";
  std::optional<unsigned> exp_threads;
  exp_cmd->add_option("--config", exp_config, "experiment config JSON")->required();
  exp_cmd->add_option("--out", exp_out, "output directory")->default_val("out");
  exp_cmd->add_option("--threads", exp_threads, "override worker thread count");

  // synth-codebook
  auto* synth_cmd = app.add_subcommand("synth-codebook", "write a synthetic codebook file");
  std::string synth_params, synth_out;
  synth_cmd->add_option("--params", synth_params, "K,D,seed")->required();
  synth_cmd->add_option("--out", synth_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;  // 0 covers --help/--version
  }

  if (synth_cmd->parsed()) {
    return cmd_synth_codebook(synth_params, synth_out);
  }

  if (embed_cmd->parsed()) {
    Codebook codebook = embed_cb.open();
    codebook.build_neighbor_lists();
    const std::vector<std::uint8_t> message = parse_bits(embed_message);
    MessagePayload payload = encode_message(message);
    PartitionSpec spec = embed_key.spec(codebook.size());

    TokenSequence seq;
    if (!embed_in.empty()) {
      std::uint32_t k = 0;
      seq = load_sequence(embed_in, &k);
      if (k != codebook.size()) {
        throw std::invalid_argument("sequence codebook size " + std::to_string(k) +
                                    " does not match the codebook");
      }
    } else {
      GeneratorConfig gen;
      gen.paradigm = embed_paradigm == "next-scale" ? Paradigm::next_scale
                                                    : Paradigm::next_token;
      gen.codebook_size = codebook.size();
      gen.length = embed_length;
      if (gen.paradigm == Paradigm::next_scale) {
        gen.scale_sizes = embed_scales.empty() ? default_scale_schedule()
                                               : parse_u64_list(embed_scales);
      }
      gen.family = embed_family == "markov" ? GeneratorFamily::markov
                                            : GeneratorFamily::uniform;
      seq = get_token_sequence(gen, &codebook, embed_seed);
    }

    WatermarkLayout layout =
        layout_for(seq, static_cast<std::uint32_t>(payload.code->n));
    TokenSequence marked = embed_sequence(seq, layout, payload.codeword, spec, codebook);

    if (embed_text) save_sequence_text(embed_out, marked, codebook.size());
    else save_sequence(embed_out, marked, codebook.size());
    const std::string sidecar_path =
        embed_sidecar.empty() ? embed_out + ".json" : embed_sidecar;
    std::ofstream sidecar(sidecar_path);
    sidecar << sidecar_json(spec, *payload.code, static_cast<int>(message.size()), marked,
                            layout, embed_seed, embed_cb.path.empty()
                                                    ? "synth:" + embed_cb.synth
                                                    : "file:" + embed_cb.path)
                   .dump(2)
            << "\n";
    std::cout << "embedded " << message.size() << " bits with BCH(" << payload.code->n << ","
              << payload.code->k << "," << payload.code->d << ") across "
              << layout.block_count() << " blocks; wrote " << embed_out << " and "
              << sidecar_path << "\n";
    return kExitOk;
  }

  if (extract_cmd->parsed()) {
    std::uint32_t k = 0;
    TokenSequence seq =
        extract_text ? load_sequence_text(extract_in, &k) : load_sequence(extract_in, &k);
    PartitionSpec spec = extract_key.spec(k);
    const BchCode& code = select_code(extract_bits);
    WatermarkLayout layout = layout_for(seq, static_cast<std::uint32_t>(code.n));

    DetectionReport report;
    if (extract_mode == "folded") {
      CalibrationCache cache{extract_cache};
      CalibrationRecord calibration = cache.get_or_compute(
          seq.size(), static_cast<std::uint32_t>(code.n), extract_key.gamma, extract_alpha,
          extract_cal_trials, extract_cal_seed, extract_threads);
      report = extract(seq, layout, spec, code, extract_tau, extract_alpha, &calibration,
                       DetectionMode::folded, extract_bits);
    } else {
      report = extract(seq, layout, spec, code, extract_tau, extract_alpha, nullptr,
                       DetectionMode::plain_z, extract_bits);
    }

    nlohmann::json j = report_to_json(report);
    if (!extract_out.empty()) {
      std::ofstream out(extract_out);
      out << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  if (detect_cmd->parsed()) {
    std::uint32_t k = 0;
    TokenSequence seq =
        detect_text ? load_sequence_text(detect_in, &k) : load_sequence(detect_in, &k);
    PartitionSpec spec = detect_key.spec(k);
    DetectionReport report = zero_bit_test(seq, spec, detect_alpha);
    std::cout << report_to_json(report).dump(2) << "\n";
    if (detect_scripting && !report.detected) return kExitNotDetected;
    return kExitOk;
  }

  if (cal_cmd->parsed()) {
    CalibrationCache cache{cal_dir};
    bool hit = false;
    CalibrationRecord record = cache.get_or_compute(cal_n, cal_blocks, cal_gamma, cal_alpha,
                                                    cal_trials, cal_seed, cal_threads, &hit);
    std::cout << (hit ? "cache hit: " : "computed: ")
              << calibration_to_json(record).dump() << "\n";
    return kExitOk;
  }

  if (exp_cmd->parsed()) {
    ExperimentConfig config = load_config(exp_config);
    if (exp_threads) config.threads = *exp_threads;
    auto written = run_experiments(config, exp_out);
    for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
