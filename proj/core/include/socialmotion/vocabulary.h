#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace socialmotion {

enum class TokenClass { Text, Motion, RelX, RelZ, RelTheta, MotionStart, MotionEnd };

struct VocabConfig {
  int motion_codes = 512; // K
  int rel_bins = 512; // K_rel
  int sentinels = 100;
  int min_count = 1; // words seen fewer times map to <unk>
  int max_words = 0; // 0 = no cap
};

// Splits text into lowercase word pieces: letter runs (with inner
// apostrophes), single digits, single punctuation characters, and
// angle-bracket forms such as "<m_3>" kept whole.
std::vector<std::string> split_words(std::string_view text);

// Unified id space laid out as
//   [text | motion K | x K_rel | z K_rel | theta K_rel | Motion_S | Motion_E]
// where text begins with <pad>, <eos>, <unk> and the sentinels, followed by
// corpus words ordered by descending frequency then spelling.
class Vocabulary {
 public:
  static Vocabulary build(std::span<const std::string> corpus, const VocabConfig& config = {});

  int size() const {
    return static_cast<int>(surfaces_.size());
  }
  int text_size() const {
    return text_size_;
  }
  int motion_codes() const {
    return config_.motion_codes;
  }
  int rel_bins() const {
    return config_.rel_bins;
  }
  int sentinel_count() const {
    return config_.sentinels;
  }
  const VocabConfig& config() const {
    return config_;
  }

  static constexpr int pad_id() {
    return 0;
  }
  static constexpr int eos_id() {
    return 1;
  }
  static constexpr int unk_id() {
    return 2;
  }
  int sentinel_id(int index) const;
  bool is_sentinel(int id) const {
    return id >= 3 && id < 3 + config_.sentinels;
  }
  int sentinel_index(int id) const;

  int motion_id(int code) const;
  int x_id(int bin) const;
  int z_id(int bin) const;
  int theta_id(int bin) const;
  int motion_start_id() const {
    return motion_end_id() - 1;
  }
  int motion_end_id() const {
    return size() - 1;
  }

  // Range check; throws OutOfRange for ids outside the table.
  TokenClass classify(int id) const;
  // Offset of an id inside its class range (motion code or bin index).
  int payload(int id) const;

  const std::string& surface(int id) const;
  std::optional<int> lookup(std::string_view surface) const;

  // Free text to ids; unknown words become <unk>. Angle-bracket pieces must
  // be known surface forms.
  std::vector<int> encode_text(std::string_view text) const;
  // Space-joined surface forms, skipping <pad>.
  std::string decode_text(std::span<const int> ids) const;

  // Lossless whitespace-separated surface text.
  std::string to_surface(std::span<const int> ids) const;
  std::vector<int> from_surface(std::string_view text) const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return surfaces_ == other.surfaces_ && text_size_ == other.text_size_;
  }

 private:
  static Vocabulary assemble(std::vector<std::string> words, const VocabConfig& config);
  void check_id(int id) const;

  VocabConfig config_;
  int text_size_ = 0;
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> ids_;
};

} // namespace socialmotion
