#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "wmark/codebook.hpp"
#include "wmark/detect.hpp"
#include "wmark/sequence.hpp"

namespace wmark {

// Unreadable, unwritable or malformed user files.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token-sequence container, all fields little-endian:
//   magic   8 bytes  "WMTKSEQ1"
//   k       u32      codebook size the tokens index into
//   paradigm u32     0 = next-token, 1 = next-scale
//   offset  u64      original position of tokens[0]
//   scales  u32      number of scale boundaries (0 for next-token)
//   bounds  u64 * scales   cumulative token counts
//   count   u64      N
//   tokens  u32 * N
void save_sequence(const std::filesystem::path& path, const TokenSequence& seq,
                   std::uint32_t codebook_size);
TokenSequence load_sequence(const std::filesystem::path& path,
                            std::uint32_t* codebook_size = nullptr);

// Debug format: "# field value" header lines, then one token per line.
void save_sequence_text(const std::filesystem::path& path, const TokenSequence& seq,
                        std::uint32_t codebook_size);
TokenSequence load_sequence_text(const std::filesystem::path& path,
                                 std::uint32_t* codebook_size = nullptr);

// Codebook container:
//   magic   8 bytes  "WMCBOOK1"
//   k, d    u32, u32
//   data    f32 * K * D, row-major little-endian
// Embeddings are held in double precision in memory; saving narrows to
// f32, so save/load round-trips the f32 values exactly but not the
// synthesized doubles.
void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook load_codebook(const std::filesystem::path& path);

nlohmann::json report_to_json(const DetectionReport& report);
nlohmann::json calibration_to_json(const CalibrationRecord& record);
CalibrationRecord calibration_from_json(const nlohmann::json& j);

std::string detection_status_name(DetectionStatus status);
std::string detection_mode_name(DetectionMode mode);

}  // namespace wmark
