#include "wmark/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wmark {

namespace {

constexpr char kSequenceMagic[8] = {'W', 'M', 'T', 'K', 'S', 'E', 'Q', '1'};
constexpr char kCodebookMagic[8] = {'W', 'M', 'C', 'B', 'O', 'O', 'K', '1'};

static_assert(std::endian::native == std::endian::little || true,
              "explicit little-endian packing below");

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> buf;
  using U = std::make_unsigned_t<T>;
  U v = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(v & 0xFF);
    v >>= 8;
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf;
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw FileError("truncated file");
  using U = std::make_unsigned_t<T>;
  U v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = (v << 8) | buf[i];
  return static_cast<T>(v);
}

void write_f32_le(std::ostream& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  write_le<std::uint32_t>(out, bits);
}

float read_f32_le(std::istream& in) {
  std::uint32_t bits = read_le<std::uint32_t>(in);
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void save_sequence(const std::filesystem::path& path, const TokenSequence& seq,
                   std::uint32_t codebook_size) {
  seq.validate(codebook_size);
  std::ofstream out = open_out(path);
  out.write(kSequenceMagic, sizeof(kSequenceMagic));
  write_le<std::uint32_t>(out, codebook_size);
  write_le<std::uint32_t>(out, seq.paradigm == Paradigm::next_scale ? 1 : 0);
  write_le<std::uint64_t>(out, seq.position_offset);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(seq.scale_boundaries.size()));
  for (std::uint64_t b : seq.scale_boundaries) write_le<std::uint64_t>(out, b);
  write_le<std::uint64_t>(out, seq.size());
  for (std::uint32_t t : seq.tokens) write_le<std::uint32_t>(out, t);
  if (!out) throw FileError("write failed: " + path.string());
}

TokenSequence load_sequence(const std::filesystem::path& path, std::uint32_t* codebook_size) {
  std::ifstream in = open_in(path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSequenceMagic, sizeof(magic)) != 0) {
    throw FileError("not a token-sequence file: " + path.string());
  }
  const auto k = read_le<std::uint32_t>(in);
  const auto paradigm = read_le<std::uint32_t>(in);
  if (paradigm > 1) throw FileError("unknown paradigm tag in " + path.string());
  TokenSequence seq;
  seq.paradigm = paradigm == 1 ? Paradigm::next_scale : Paradigm::next_token;
  seq.position_offset = read_le<std::uint64_t>(in);
  const auto scales = read_le<std::uint32_t>(in);
  seq.scale_boundaries.resize(scales);
  for (auto& b : seq.scale_boundaries) b = read_le<std::uint64_t>(in);
  const auto n = read_le<std::uint64_t>(in);
  seq.tokens.resize(n);
  for (auto& t : seq.tokens) t = read_le<std::uint32_t>(in);
  in.peek();
  if (!in.eof()) throw FileError("trailing bytes in " + path.string());
  seq.validate(k);
  if (codebook_size) *codebook_size = k;
  return seq;
}

void save_sequence_text(const std::filesystem::path& path, const TokenSequence& seq,
                        std::uint32_t codebook_size) {
  seq.validate(codebook_size);
  std::ofstream out = open_out(path);
  out << "# k " << codebook_size << "\n";
  out << "# paradigm " << (seq.paradigm == Paradigm::next_scale ? "next-scale" : "next-token")
      << "\n";
  out << "# offset " << seq.position_offset << "\n";
  if (!seq.scale_boundaries.empty()) {
    out << "# scales";
    for (std::uint64_t b : seq.scale_boundaries) out << ' ' << b;
    out << "\n";
  }
  for (std::uint32_t t : seq.tokens) out << t << "\n";
  if (!out) throw FileError("write failed: " + path.string());
}

TokenSequence load_sequence_text(const std::filesystem::path& path,
                                 std::uint32_t* codebook_size) {
  std::ifstream in = open_in(path);
  TokenSequence seq;
  std::uint32_t k = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string field;
      header >> field;
      if (field == "k") {
        header >> k;
      } else if (field == "paradigm") {
        std::string p;
        header >> p;
        if (p == "next-scale") seq.paradigm = Paradigm::next_scale;
        else if (p == "next-token") seq.paradigm = Paradigm::next_token;
        else throw FileError("unknown paradigm in " + path.string());
      } else if (field == "offset") {
        header >> seq.position_offset;
      } else if (field == "scales") {
        std::uint64_t b;
        while (header >> b) seq.scale_boundaries.push_back(b);
      } else {
        throw FileError("unknown header field '" + field + "' in " + path.string());
      }
      continue;
    }
    seq.tokens.push_back(static_cast<std::uint32_t>(std::stoul(line)));
  }
  if (k == 0) throw FileError("missing '# k' header in " + path.string());
  seq.validate(k);
  if (codebook_size) *codebook_size = k;
  return seq;
}

void save_codebook(const std::filesystem::path& path, const Codebook& codebook) {
  std::ofstream out = open_out(path);
  out.write(kCodebookMagic, sizeof(kCodebookMagic));
  write_le<std::uint32_t>(out, codebook.size());
  write_le<std::uint32_t>(out, codebook.dim());
  const double* data = codebook.data();
  const std::size_t count = static_cast<std::size_t>(codebook.size()) * codebook.dim();
  for (std::size_t i = 0; i < count; ++i) {
    write_f32_le(out, static_cast<float>(data[i]));
  }
  if (!out) throw FileError("write failed: " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCodebookMagic, sizeof(magic)) != 0) {
    throw FileError("not a codebook file: " + path.string());
  }
  const auto k = read_le<std::uint32_t>(in);
  const auto d = read_le<std::uint32_t>(in);
  std::vector<double> emb(static_cast<std::size_t>(k) * d);
  for (auto& v : emb) v = read_f32_le(in);
  in.peek();
  if (!in.eof()) throw FileError("trailing bytes in " + path.string());
  return Codebook(k, d, std::move(emb));
}

nlohmann::json report_to_json(const DetectionReport& report) {
  nlohmann::json j;
  j["mode"] = detection_mode_name(report.mode);
  j["status"] = detection_status_name(report.status);
  j["detected"] = report.detected;
  j["global_green_ratio"] = report.global_green_ratio;
  j["statistic"] = report.statistic;
  j["threshold"] = report.threshold;
  j["alpha"] = report.alpha;
  j["tau"] = report.tau;
  j["block_ratios"] = report.block_ratios;
  if (report.status == DetectionStatus::watermarked && !report.decoded_message.empty()) {
    std::string bits;
    for (std::uint8_t b : report.decoded_message) bits.push_back(b ? '1' : '0');
    j["message"] = bits;
    j["corrected_errors"] = report.corrected_errors;
  }
  return j;
}

nlohmann::json calibration_to_json(const CalibrationRecord& record) {
  return nlohmann::json{{"n_positions", record.total_positions},
                        {"n_blocks", record.block_count},
                        {"gamma", record.gamma},
                        {"alpha", record.alpha},
                        {"trials", record.trials},
                        {"seed", record.seed},
                        {"threshold", record.threshold}};
}

CalibrationRecord calibration_from_json(const nlohmann::json& j) {
  CalibrationRecord record;
  record.total_positions = j.at("n_positions").get<std::uint64_t>();
  record.block_count = j.at("n_blocks").get<std::uint32_t>();
  record.gamma = j.at("gamma").get<double>();
  record.alpha = j.at("alpha").get<double>();
  record.trials = j.at("trials").get<std::uint64_t>();
  record.seed = j.at("seed").get<std::uint64_t>();
  record.threshold = j.at("threshold").get<double>();
  return record;
}

std::string detection_status_name(DetectionStatus status) {
  switch (status) {
    case DetectionStatus::not_watermarked: return "not-watermarked";
    case DetectionStatus::watermarked: return "watermarked";
    case DetectionStatus::watermarked_unrecoverable: return "watermarked-unrecoverable";
  }
  throw std::logic_error("unknown detection status");
}

std::string detection_mode_name(DetectionMode mode) {
  return mode == DetectionMode::plain_z ? "plain-z" : "folded";
}

}  // namespace wmark
