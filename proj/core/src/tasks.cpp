#include "socialmotion/tasks.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

// Random composition of `total` into `parts` positive integers.
std::vector<int> compose(int total, int parts, Rng& rng) {
  std::vector<std::size_t> cuts = rng.permutation(static_cast<std::size_t>(total - 1));
  cuts.resize(static_cast<std::size_t>(parts - 1));
  for (auto& c : cuts) {
    c += 1;
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> out;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    out.push_back(static_cast<int>(c - prev));
    prev = c;
  }
  out.push_back(static_cast<int>(total - prev));
  return out;
}

void check_length(const TaskPair& pair, int max_length) {
  if (static_cast<int>(pair.input.size()) > max_length || static_cast<int>(pair.target.size()) > max_length) {
    fail(ErrorCode::OutOfRange, "task '" + pair.task + "' assembles to " + std::to_string(pair.input.size()) +
                                    " input / " + std::to_string(pair.target.size()) +
                                    " target ids, above the maximum length " + std::to_string(max_length));
  }
}

std::vector<int> concat(std::vector<int> a, std::span<const int> b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

} // namespace

std::string_view task_name(PretrainTask task) {
  switch (task) {
    case PretrainTask::TextToMotion:
      return "t2m";
    case PretrainTask::MotionToText:
      return "m2t";
    case PretrainTask::Forecast:
      return "forecast";
    case PretrainTask::Reaction:
      return "reaction";
    case PretrainTask::Inbetween:
      return "inbetween";
  }
  return "unknown";
}

PretrainTask parse_task(std::string_view name) {
  for (PretrainTask t : kPretrainTasks) {
    if (task_name(t) == name) {
      return t;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::string_view task_prefix(PretrainTask task) {
  switch (task) {
    case PretrainTask::Forecast:
      return "Predict motion:";
    case PretrainTask::Reaction:
      return "Generate Reaction:";
    case PretrainTask::Inbetween:
      return "Complete the masked motion:";
    default:
      return "";
  }
}

TaskPair span_corrupt(std::span<const int> sequence, const Vocabulary& vocab, double ratio, double mean_span,
                      std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    fail(ErrorCode::InvalidArgument, "span_corrupt: ratio must lie in [0, 1)");
  }
  if (!(mean_span >= 1.0)) {
    fail(ErrorCode::InvalidArgument, "span_corrupt: mean span must be at least 1");
  }
  const int n = static_cast<int>(sequence.size());
  if (n < 2) {
    fail(ErrorCode::InvalidArgument, "span_corrupt: need at least 2 tokens");
  }
  for (int id : sequence) {
    if (vocab.is_sentinel(id)) {
      fail(ErrorCode::InvalidArgument, "span_corrupt: input already contains a sentinel");
    }
  }
  TaskPair pair;
  pair.task = "span_corruption";
  int noise = static_cast<int>(std::lround(n * ratio));
  if (ratio > 0.0) {
    noise = std::clamp(noise, 1, n - 1);
  }
  if (noise == 0) {
    pair.input.assign(sequence.begin(), sequence.end());
    pair.target = {vocab.sentinel_id(0)};
    return pair;
  }
  int spans = std::max(1, static_cast<int>(std::lround(noise / mean_span)));
  spans = std::min({spans, noise, n - noise, vocab.sentinel_count() - 1});
  if (spans < 1) {
    fail(ErrorCode::InvalidArgument, "span_corrupt: vocabulary has too few sentinels");
  }
  Rng rng(seed);
  const std::vector<int> noise_lengths = compose(noise, spans, rng);
  const std::vector<int> keep_lengths = compose(n - noise, spans, rng);
  int at = 0;
  for (int s = 0; s < spans; ++s) {
    pair.input.insert(pair.input.end(), sequence.begin() + at, sequence.begin() + at + keep_lengths[s]);
    at += keep_lengths[s];
    const int sentinel = vocab.sentinel_id(s);
    pair.input.push_back(sentinel);
    pair.target.push_back(sentinel);
    pair.target.insert(pair.target.end(), sequence.begin() + at, sequence.begin() + at + noise_lengths[s]);
    at += noise_lengths[s];
  }
  pair.target.push_back(vocab.sentinel_id(spans));
  return pair;
}

std::vector<int> splice_back(std::span<const int> input, std::span<const int> target, const Vocabulary& vocab) {
  std::map<int, std::vector<int>> spans;
  int current = -1;
  for (int id : target) {
    if (vocab.is_sentinel(id)) {
      current = id;
      spans[current];
    } else if (current < 0) {
      fail(ErrorCode::Format, "splice_back: target must start with a sentinel");
    } else {
      spans[current].push_back(id);
    }
  }
  std::vector<int> out;
  for (int id : input) {
    if (!vocab.is_sentinel(id)) {
      out.push_back(id);
      continue;
    }
    const auto it = spans.find(id);
    if (it == spans.end()) {
      fail(ErrorCode::Format, "splice_back: no span for " + vocab.surface(id));
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

MotionTaskParts forecast_parts(const TokenizedScene& scene, const Vocabulary& vocab) {
  SocialTokens first = scene.motion;
  SocialTokens second = scene.motion;
  for (std::size_t p = 0; p < scene.motion.persons.size(); ++p) {
    const auto& run = scene.motion.persons[p];
    if (run.size() < 2) {
      fail(ErrorCode::InvalidArgument, "forecast: person " + std::to_string(p) + " has fewer than 2 codes");
    }
    const std::size_t split = run.size() / 2;
    first.persons[p].assign(run.begin(), run.begin() + static_cast<std::ptrdiff_t>(split));
    second.persons[p].assign(run.begin() + static_cast<std::ptrdiff_t>(split), run.end());
  }
  return {serialize_social(first, vocab), serialize_social(second, vocab), -1};
}

MotionTaskParts reaction_parts(const TokenizedScene& scene, const Vocabulary& vocab, std::uint64_t seed) {
  const int n = scene.persons();
  if (n < 2) {
    fail(ErrorCode::InvalidArgument, "reaction: scene needs at least 2 persons");
  }
  Rng rng(seed);
  const int masked = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
  MotionTaskParts parts;
  parts.masked_person = masked;
  parts.condition.push_back(vocab.motion_start_id());
  for (int p = 0; p < n; ++p) {
    if (p > 0) {
      const auto& b = scene.motion.relposes[p - 1];
      parts.condition.push_back(vocab.x_id(b[0]));
      parts.condition.push_back(vocab.z_id(b[1]));
      parts.condition.push_back(vocab.theta_id(b[2]));
    }
    if (p == masked) {
      parts.condition.push_back(vocab.sentinel_id(0));
    } else {
      for (int code : scene.motion.persons[p]) {
        parts.condition.push_back(vocab.motion_id(code));
      }
    }
  }
  parts.condition.push_back(vocab.motion_end_id());
  parts.target.push_back(vocab.motion_start_id());
  for (int code : scene.motion.persons[masked]) {
    parts.target.push_back(vocab.motion_id(code));
  }
  parts.target.push_back(vocab.motion_end_id());
  return parts;
}

MotionTaskParts inbetween_parts(const TokenizedScene& scene, const Vocabulary& vocab) {
  const int n = scene.persons();
  if (n < 1) {
    fail(ErrorCode::InvalidArgument, "inbetween: scene has no persons");
  }
  if (n > vocab.sentinel_count()) {
    fail(ErrorCode::InvalidArgument, "inbetween: more persons than sentinels");
  }
  MotionTaskParts parts;
  parts.condition.push_back(vocab.motion_start_id());
  for (int p = 0; p < n; ++p) {
    if (p > 0) {
      const auto& b = scene.motion.relposes[p - 1];
      parts.condition.push_back(vocab.x_id(b[0]));
      parts.condition.push_back(vocab.z_id(b[1]));
      parts.condition.push_back(vocab.theta_id(b[2]));
    }
    const auto& run = scene.motion.persons[p];
    const std::size_t len = run.size();
    const std::size_t begin = len / 4;
    const std::size_t count = len / 2;
    for (std::size_t i = 0; i < len; ++i) {
      if (count > 0 && i == begin) {
        parts.condition.push_back(vocab.sentinel_id(p));
      }
      if (count > 0 && i >= begin && i < begin + count) {
        continue;
      }
      parts.condition.push_back(vocab.motion_id(run[i]));
    }
  }
  parts.condition.push_back(vocab.motion_end_id());
  parts.target = serialize_social(scene.motion, vocab);
  return parts;
}

std::vector<int> splice_reaction(std::span<const int> condition, std::span<const int> target,
                                 const Vocabulary& vocab) {
  const auto start = std::find(condition.begin(), condition.end(), vocab.motion_start_id());
  if (start == condition.end()) {
    fail(ErrorCode::Format, "splice_reaction: condition lacks Motion_S");
  }
  std::vector<int> run;
  for (int id : target) {
    if (id != vocab.motion_start_id() && id != vocab.motion_end_id() && id != Vocabulary::eos_id()) {
      run.push_back(id);
    }
  }
  std::vector<int> out;
  bool spliced = false;
  for (auto it = start; it != condition.end(); ++it) {
    if (*it == vocab.sentinel_id(0) && !spliced) {
      out.insert(out.end(), run.begin(), run.end());
      spliced = true;
    } else {
      out.push_back(*it);
    }
  }
  if (!spliced) {
    fail(ErrorCode::Format, "splice_reaction: condition has no masked person");
  }
  return out;
}

TaskPair build_task_pair(PretrainTask task, const TokenizedScene& scene, const Vocabulary& vocab,
                         std::uint64_t seed, const TaskOptions& options) {
  TaskPair pair;
  pair.task = std::string(task_name(task));
  const std::vector<int> prefix = vocab.encode_text(task_prefix(task));
  switch (task) {
    case PretrainTask::TextToMotion:
      pair.input = vocab.encode_text(scene.caption);
      pair.target = serialize_social(scene.motion, vocab);
      break;
    case PretrainTask::MotionToText:
      pair.input = serialize_social(scene.motion, vocab);
      pair.target = vocab.encode_text(scene.caption);
      pair.target.push_back(Vocabulary::eos_id());
      break;
    case PretrainTask::Forecast: {
      MotionTaskParts parts = forecast_parts(scene, vocab);
      pair.input = concat(prefix, parts.condition);
      pair.target = std::move(parts.target);
      break;
    }
    case PretrainTask::Reaction: {
      MotionTaskParts parts = reaction_parts(scene, vocab, seed);
      pair.input = concat(prefix, parts.condition);
      pair.target = std::move(parts.target);
      break;
    }
    case PretrainTask::Inbetween: {
      MotionTaskParts parts = inbetween_parts(scene, vocab);
      pair.input = concat(prefix, parts.condition);
      pair.target = std::move(parts.target);
      break;
    }
  }
  if (pair.input.empty()) {
    fail(ErrorCode::InvalidArgument, "task '" + pair.task + "' produced an empty input");
  }
  check_length(pair, options.max_length);
  return pair;
}

} // namespace socialmotion
