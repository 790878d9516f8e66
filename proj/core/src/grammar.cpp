#include "socialmotion/grammar.h"

#include <algorithm>

#include "socialmotion/error.h"

namespace socialmotion {

std::string_view violation_name(GrammarViolation v) {
  switch (v) {
    case GrammarViolation::MissingMotionStart:
      return "missing Motion_S";
    case GrammarViolation::MissingMotionEnd:
      return "missing Motion_E";
    case GrammarViolation::IncompleteTriplet:
      return "incomplete triplet";
    case GrammarViolation::MisorderedTriplet:
      return "misordered triplet";
    case GrammarViolation::EmptyRun:
      return "empty run";
    case GrammarViolation::TextInMotion:
      return "text token inside motion span";
    case GrammarViolation::NestedMotionStart:
      return "nested Motion_S";
    case GrammarViolation::TrailingTokens:
      return "trailing tokens after Motion_E";
  }
  return "grammar violation";
}

std::vector<int> serialize_social(const SocialTokens& tokens, const Vocabulary& vocab) {
  if (tokens.persons.empty()) {
    fail(ErrorCode::InvalidArgument, "serialize_social: no persons");
  }
  if (tokens.relposes.size() + 1 != tokens.persons.size()) {
    fail(ErrorCode::InvalidArgument, "serialize_social: " + std::to_string(tokens.persons.size()) +
                                         " persons need " + std::to_string(tokens.persons.size() - 1) +
                                         " relative poses, got " + std::to_string(tokens.relposes.size()));
  }
  std::vector<int> out;
  out.push_back(vocab.motion_start_id());
  for (std::size_t p = 0; p < tokens.persons.size(); ++p) {
    if (tokens.persons[p].empty()) {
      fail(ErrorCode::InvalidArgument, "serialize_social: person " + std::to_string(p) + " has an empty run");
    }
    if (p > 0) {
      const auto& b = tokens.relposes[p - 1];
      out.push_back(vocab.x_id(b[0]));
      out.push_back(vocab.z_id(b[1]));
      out.push_back(vocab.theta_id(b[2]));
    }
    for (int code : tokens.persons[p]) {
      out.push_back(vocab.motion_id(code));
    }
  }
  out.push_back(vocab.motion_end_id());
  return out;
}

ParseResult parse_social(std::span<const int> ids, const Vocabulary& vocab) {
  ParseResult result;
  auto error = [&result](GrammarViolation kind, std::size_t pos) {
    result.error = GrammarError{kind, pos, std::string(violation_name(kind)) + " at position " + std::to_string(pos)};
    return result;
  };
  auto cls = [&](std::size_t i) {
    const int id = ids[i];
    if (id < 0 || id >= vocab.size()) {
      return TokenClass::Text;
    }
    return vocab.classify(id);
  };

  const std::size_t n = ids.size();
  if (n == 0 || cls(0) != TokenClass::MotionStart) {
    return error(GrammarViolation::MissingMotionStart, 0);
  }
  SocialTokens tokens;
  std::size_t i = 1;
  while (true) {
    std::vector<int> run;
    while (i < n && cls(i) == TokenClass::Motion) {
      run.push_back(vocab.payload(ids[i]));
      ++i;
    }
    if (i == n) {
      return error(GrammarViolation::MissingMotionEnd, n);
    }
    if (run.empty()) {
      return error(GrammarViolation::EmptyRun, i);
    }
    tokens.persons.push_back(std::move(run));

    const TokenClass c = cls(i);
    if (c == TokenClass::MotionEnd) {
      if (i + 1 != n) {
        return error(GrammarViolation::TrailingTokens, i + 1);
      }
      break;
    }
    if (c == TokenClass::RelX) {
      std::array<int, 3> bins{vocab.payload(ids[i]), 0, 0};
      const TokenClass expected[2] = {TokenClass::RelZ, TokenClass::RelTheta};
      for (int k = 0; k < 2; ++k) {
        const std::size_t at = i + 1 + k;
        if (at >= n) {
          return error(GrammarViolation::IncompleteTriplet, at);
        }
        const TokenClass got = cls(at);
        if (got == expected[k]) {
          bins[k + 1] = vocab.payload(ids[at]);
          continue;
        }
        const bool relpose = got == TokenClass::RelX || got == TokenClass::RelZ || got == TokenClass::RelTheta;
        return error(relpose ? GrammarViolation::MisorderedTriplet : GrammarViolation::IncompleteTriplet, at);
      }
      tokens.relposes.push_back(bins);
      i += 3;
      continue;
    }
    if (c == TokenClass::RelZ || c == TokenClass::RelTheta) {
      return error(GrammarViolation::MisorderedTriplet, i);
    }
    if (c == TokenClass::MotionStart) {
      return error(GrammarViolation::NestedMotionStart, i);
    }
    return error(GrammarViolation::TextInMotion, i);
  }
  result.value = std::move(tokens);
  return result;
}

SocialTokens parse_social_or_throw(std::span<const int> ids, const Vocabulary& vocab) {
  ParseResult r = parse_social(ids, vocab);
  if (!r.ok()) {
    fail(ErrorCode::Grammar, r.error->message);
  }
  return std::move(*r.value);
}

std::optional<std::vector<int>> find_motion_block(std::span<const int> ids, const Vocabulary& vocab) {
  const auto start = std::find(ids.begin(), ids.end(), vocab.motion_start_id());
  if (start == ids.end()) {
    return std::nullopt;
  }
  const auto end = std::find(start, ids.end(), vocab.motion_end_id());
  return std::vector<int>(start, end == ids.end() ? ids.end() : end + 1);
}

} // namespace socialmotion
