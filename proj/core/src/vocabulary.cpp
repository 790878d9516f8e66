#include "socialmotion/vocabulary.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "socialmotion/error.h"

namespace socialmotion {

namespace {

constexpr int kReservedText = 3; // <pad>, <eos>, <unk>

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_bracket_form(std::string_view s) {
  if (s.size() < 3 || s.front() != '<' || s.back() != '>') {
    return false;
  }
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (!(is_word_char(c) || c == '_')) {
      return false;
    }
  }
  return true;
}

} // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '<') {
      const std::size_t close = text.find('>', i);
      if (close != std::string_view::npos && is_bracket_form(text.substr(i, close - i + 1))) {
        out.emplace_back(text.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string word;
      while (i < text.size()) {
        const char d = text[i];
        if (std::isalpha(static_cast<unsigned char>(d))) {
          word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
          ++i;
        } else if (d == '\'' && i + 1 < text.size() && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
          word.push_back(d);
          ++i;
        } else {
          break;
        }
      }
      out.push_back(std::move(word));
      continue;
    }
    out.emplace_back(1, c);
    ++i;
  }
  return out;
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus, const VocabConfig& config) {
  if (corpus.empty()) {
    fail(ErrorCode::InvalidArgument, "build_vocabulary: empty corpus");
  }
  std::map<std::string, long long> freq;
  for (const std::string& line : corpus) {
    for (std::string& w : split_words(line)) {
      if (w.front() == '<' && w.size() > 1) {
        continue;
      }
      ++freq[std::move(w)];
    }
  }
  std::vector<std::pair<std::string, long long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (auto& [w, n] : ranked) {
    if (n < config.min_count) {
      continue;
    }
    if (config.max_words > 0 && static_cast<int>(words.size()) >= config.max_words) {
      break;
    }
    words.push_back(w);
  }
  return assemble(std::move(words), config);
}

Vocabulary Vocabulary::assemble(std::vector<std::string> words, const VocabConfig& config) {
  if (config.motion_codes < 1 || config.rel_bins < 1 || config.sentinels < 0) {
    fail(ErrorCode::InvalidArgument, "vocabulary: motion codes and bins must be positive");
  }
  Vocabulary v;
  v.config_ = config;
  v.surfaces_ = {"<pad>", "<eos>", "<unk>"};
  for (int i = 0; i < config.sentinels; ++i) {
    v.surfaces_.push_back("<sentinel_" + std::to_string(i) + ">");
  }
  for (auto& w : words) {
    v.surfaces_.push_back(std::move(w));
  }
  v.text_size_ = static_cast<int>(v.surfaces_.size());
  for (int i = 0; i < config.motion_codes; ++i) {
    v.surfaces_.push_back("<m_" + std::to_string(i) + ">");
  }
  for (const char* prefix : {"<sx_", "<sz_", "<sth_"}) {
    for (int i = 0; i < config.rel_bins; ++i) {
      v.surfaces_.push_back(prefix + std::to_string(i) + ">");
    }
  }
  v.surfaces_.push_back("<Motion_S>");
  v.surfaces_.push_back("<Motion_E>");
  v.ids_.reserve(v.surfaces_.size());
  for (int id = 0; id < v.size(); ++id) {
    if (!v.ids_.emplace(v.surfaces_[id], id).second) {
      fail(ErrorCode::Format, "vocabulary: duplicate surface form '" + v.surfaces_[id] + "'");
    }
  }
  return v;
}

void Vocabulary::check_id(int id) const {
  if (id < 0 || id >= size()) {
    fail(ErrorCode::OutOfRange, "token id " + std::to_string(id) + " outside [0, " + std::to_string(size()) + ")");
  }
}

int Vocabulary::sentinel_id(int index) const {
  if (index < 0 || index >= config_.sentinels) {
    fail(ErrorCode::OutOfRange, "sentinel index " + std::to_string(index) + " outside [0, " +
                                    std::to_string(config_.sentinels) + ")");
  }
  return kReservedText + index;
}

int Vocabulary::sentinel_index(int id) const {
  if (!is_sentinel(id)) {
    fail(ErrorCode::InvalidArgument, "token " + std::to_string(id) + " is not a sentinel");
  }
  return id - kReservedText;
}

int Vocabulary::motion_id(int code) const {
  if (code < 0 || code >= config_.motion_codes) {
    fail(ErrorCode::OutOfRange, "motion code " + std::to_string(code) + " outside [0, " +
                                    std::to_string(config_.motion_codes) + ")");
  }
  return text_size_ + code;
}

int Vocabulary::x_id(int bin) const {
  if (bin < 0 || bin >= config_.rel_bins) {
    fail(ErrorCode::OutOfRange, "x bin " + std::to_string(bin) + " out of range");
  }
  return text_size_ + config_.motion_codes + bin;
}

int Vocabulary::z_id(int bin) const {
  if (bin < 0 || bin >= config_.rel_bins) {
    fail(ErrorCode::OutOfRange, "z bin " + std::to_string(bin) + " out of range");
  }
  return text_size_ + config_.motion_codes + config_.rel_bins + bin;
}

int Vocabulary::theta_id(int bin) const {
  if (bin < 0 || bin >= config_.rel_bins) {
    fail(ErrorCode::OutOfRange, "theta bin " + std::to_string(bin) + " out of range");
  }
  return text_size_ + config_.motion_codes + 2 * config_.rel_bins + bin;
}

TokenClass Vocabulary::classify(int id) const {
  check_id(id);
  if (id < text_size_) {
    return TokenClass::Text;
  }
  int offset = id - text_size_;
  if (offset < config_.motion_codes) {
    return TokenClass::Motion;
  }
  offset -= config_.motion_codes;
  if (offset < config_.rel_bins) {
    return TokenClass::RelX;
  }
  offset -= config_.rel_bins;
  if (offset < config_.rel_bins) {
    return TokenClass::RelZ;
  }
  offset -= config_.rel_bins;
  if (offset < config_.rel_bins) {
    return TokenClass::RelTheta;
  }
  return id == motion_start_id() ? TokenClass::MotionStart : TokenClass::MotionEnd;
}

int Vocabulary::payload(int id) const {
  switch (classify(id)) {
    case TokenClass::Text:
      return id;
    case TokenClass::Motion:
      return id - text_size_;
    case TokenClass::RelX:
      return id - text_size_ - config_.motion_codes;
    case TokenClass::RelZ:
      return id - text_size_ - config_.motion_codes - config_.rel_bins;
    case TokenClass::RelTheta:
      return id - text_size_ - config_.motion_codes - 2 * config_.rel_bins;
    case TokenClass::MotionStart:
    case TokenClass::MotionEnd:
      return 0;
  }
  return 0;
}

const std::string& Vocabulary::surface(int id) const {
  check_id(id);
  return surfaces_[id];
}

std::optional<int> Vocabulary::lookup(std::string_view s) const {
  const auto it = ids_.find(std::string(s));
  if (it == ids_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<int> Vocabulary::encode_text(std::string_view text) const {
  std::vector<int> out;
  for (const std::string& w : split_words(text)) {
    if (const auto id = lookup(w)) {
      out.push_back(*id);
    } else if (w.size() > 1 && w.front() == '<') {
      fail(ErrorCode::UnknownToken, "unknown surface form '" + w + "'");
    } else {
      out.push_back(unk_id());
    }
  }
  return out;
}

std::string Vocabulary::decode_text(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id == pad_id()) {
      continue;
    }
    if (!out.empty()) {
      out.push_back(' ');
    }
    out += surface(id);
  }
  return out;
}

std::string Vocabulary::to_surface(std::span<const int> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) {
      out.push_back(' ');
    }
    out += surface(ids[i]);
  }
  return out;
}

std::vector<int> Vocabulary::from_surface(std::string_view text) const {
  std::vector<int> out;
  std::istringstream in{std::string(text)};
  std::string form;
  while (in >> form) {
    const auto id = lookup(form);
    if (!id) {
      fail(ErrorCode::UnknownToken, "unknown surface form '" + form + "'");
    }
    out.push_back(*id);
  }
  return out;
}

std::string Vocabulary::to_json() const {
  nlohmann::json j;
  j["format"] = "socialmotion-vocabulary";
  j["version"] = 1;
  j["motion_codes"] = config_.motion_codes;
  j["rel_bins"] = config_.rel_bins;
  j["sentinels"] = config_.sentinels;
  const int m0 = text_size_;
  const int x0 = m0 + config_.motion_codes;
  const int z0 = x0 + config_.rel_bins;
  const int t0 = z0 + config_.rel_bins;
  const int s0 = t0 + config_.rel_bins;
  j["ranges"] = {{"text", {0, m0}},  {"motion", {m0, x0}}, {"x", {x0, z0}},
                 {"z", {z0, t0}},    {"theta", {t0, s0}},  {"special", {s0, s0 + 2}}};
  nlohmann::json words = nlohmann::json::array();
  for (int id = kReservedText + config_.sentinels; id < text_size_; ++id) {
    words.push_back(surfaces_[id]);
  }
  j["words"] = std::move(words);
  nlohmann::json tokens = nlohmann::json::object();
  for (int id = 0; id < size(); ++id) {
    tokens[surfaces_[id]] = id;
  }
  j["tokens"] = std::move(tokens);
  return j.dump(1);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  VocabConfig config;
  std::vector<std::string> words;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    if (j.value("format", std::string()) != "socialmotion-vocabulary") {
      fail(ErrorCode::Format, "not a vocabulary file");
    }
    const int version = j.at("version").get<int>();
    if (version != 1) {
      fail(ErrorCode::UnsupportedVersion, "vocabulary version " + std::to_string(version) + " (supported: 1)");
    }
    config.motion_codes = j.at("motion_codes").get<int>();
    config.rel_bins = j.at("rel_bins").get<int>();
    config.sentinels = j.at("sentinels").get<int>();
    words = j.at("words").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("vocabulary: ") + e.what());
  }
  Vocabulary v = assemble(std::move(words), config);
  if (j.contains("tokens")) {
    const auto& tokens = j["tokens"];
    if (static_cast<int>(tokens.size()) != v.size()) {
      fail(ErrorCode::Integrity, "vocabulary: token table size disagrees with ranges");
    }
    for (const auto& [form, id] : tokens.items()) {
      const auto mine = v.lookup(form);
      if (!mine || !id.is_number_integer() || *mine != id.get<int>()) {
        fail(ErrorCode::Integrity, "vocabulary: token '" + form + "' disagrees with range layout");
      }
    }
  }
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::Io, "cannot write vocabulary '" + path + "'");
  }
  out << to_json() << '\n';
  if (!out) {
    fail(ErrorCode::Io, "failed writing vocabulary '" + path + "'");
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::Io, "cannot read vocabulary '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

} // namespace socialmotion
