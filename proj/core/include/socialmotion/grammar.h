#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socialmotion/vocabulary.h"

namespace socialmotion {

// Structured view of a multi-person motion block:
//   <Motion_S> run_1 (<sx> <sz> <sth> run_k)* <Motion_E>
// Runs hold motion codes, triplets hold bin indices.
struct SocialTokens {
  std::vector<std::vector<int>> persons;
  std::vector<std::array<int, 3>> relposes; // persons.size() - 1 entries

  bool operator==(const SocialTokens&) const = default;
};

enum class GrammarViolation {
  MissingMotionStart,
  MissingMotionEnd,
  IncompleteTriplet,
  MisorderedTriplet,
  EmptyRun,
  TextInMotion,
  NestedMotionStart,
  TrailingTokens,
};

std::string_view violation_name(GrammarViolation v);

struct GrammarError {
  GrammarViolation kind = GrammarViolation::MissingMotionStart;
  std::size_t position = 0; // index of the offending id (sequence length if it ran out)
  std::string message;
};

struct ParseResult {
  std::optional<SocialTokens> value;
  std::optional<GrammarError> error;

  bool ok() const {
    return value.has_value();
  }
};

std::vector<int> serialize_social(const SocialTokens& tokens, const Vocabulary& vocab);

// Validates the whole sequence; reports the first violation.
ParseResult parse_social(std::span<const int> ids, const Vocabulary& vocab);
// Same, throwing Error(Grammar) on failure.
SocialTokens parse_social_or_throw(std::span<const int> ids, const Vocabulary& vocab);

// First <Motion_S> ... <Motion_E> block of a generated sequence, running to
// the end when <Motion_E> never comes.
std::optional<std::vector<int>> find_motion_block(std::span<const int> ids, const Vocabulary& vocab);

} // namespace socialmotion
