#include "socialmotion/templates.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <optional>
#include <set>

#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

const char* const kBuiltinTemplates = R"json({
  "version": 1,
  "families": [
    {"task": "text_to_motion", "title": "Text-to-Motion",
     "inputs": ["Show me a motion that captures the essence of <Caption>.",
                "Can you generate a motion that represents the <Caption>?"],
     "outputs": ["<Motion>"]},
    {"task": "text_to_motion_frames", "title": "Text-to-Motion w/ Frame Length",
     "inputs": ["I need a motion that lasts approximately <Frame> frames for the caption: <Caption>.",
                "Can you create a motion sequence that lasts for <Frame> frames and represents <Caption> in motion?"],
     "outputs": ["<Motion>"]},
    {"task": "text_to_motion_seconds", "title": "Text-to-Motion w/ Second Length",
     "inputs": ["I need a motion that lasts <Second> seconds and conveys the message of <Caption>.",
                "Can you create a motion that lasts <Second> seconds and demonstrates the concept of <Caption>?"],
     "outputs": ["<Motion>"]},
    {"task": "text_to_motion_humans", "title": "Text-to-Motion w/ Human Number",
     "inputs": ["Please create a motion involving <Human> humans and illustrating the idea of <Caption>.",
                "Can you demonstrate <Caption> with a motion that includes <Human> humans?"],
     "outputs": ["<Motion>"]},
    {"task": "frames_to_motion", "title": "FrameLength-to-Motion",
     "inputs": ["Show me a motion that lasts for no more than <Frame> frames.",
                "Can you make a motion that is shorter than <Frame> frames in length?"],
     "outputs": ["<Motion>"]},
    {"task": "seconds_to_motion", "title": "SecondLength-to-Motion",
     "inputs": ["Give me a motion that has a length of <Second> seconds or less.",
                "Can you make a motion that is no longer than <Second> seconds in duration?"],
     "outputs": ["<Motion>"]},
    {"task": "humans_to_motion", "title": "HumanNumber-to-Motion",
     "inputs": ["Create a motion that showcases <Human> humans performing unique activities.",
                "Can you design a motion for <Human> humans that feels lifelike?"],
     "outputs": ["<Motion>"]},
    {"task": "random_motion", "title": "Random Motion",
     "inputs": ["Create movements that are not anticipated.",
                "Produce movements that are natural and unforced."],
     "outputs": ["<Motion>"]},
    {"task": "motion_to_text", "title": "Motion-to-Text",
     "inputs": ["What kind of motion is displayed in <Motion>? Describe it in text?",
                "Describe the motion portrayed in <Motion> using words."],
     "outputs": ["<Caption>"]},
    {"task": "motion_to_text_frames", "title": "Motion-to-Text w/ Frame Length",
     "inputs": ["What is happening in <Motion> during a duration of <Frame> frames?",
                "Describe the motion depicted in <Motion> over <Frame> frames."],
     "outputs": ["<Caption>"]},
    {"task": "motion_to_text_seconds", "title": "Motion-to-Text w/ Second Length",
     "inputs": ["What is the action being demonstrated in <Motion> over <Second> seconds?",
                "What is being demonstrated in <Motion> that is <Second> seconds long?"],
     "outputs": ["<Caption>"]},
    {"task": "motion_to_text_humans", "title": "Motion-to-Text w/ Human Number",
     "inputs": ["What is happening among <Human> humans in <Motion>?",
                "Describe the coordinated actions of <Human> humans in <Motion>."],
     "outputs": ["<Caption>"]},
    {"task": "motion_to_frames", "title": "Motion-to-FrameLength",
     "inputs": ["What is the duration of <Motion>'s gestures in frames?",
                "Compute the frame count for <Motion>'s body movements?"],
     "outputs": ["There are <Frame> frames in the motion.",
                 "The length of given motion is about <Frame> frames."]},
    {"task": "motion_to_seconds", "title": "Motion-to-SecondLength",
     "inputs": ["How many seconds are there in <Motion>?",
                "Calculate the second duration for <Motion>'s actions."],
     "outputs": ["There are about <Second> seconds in the motion.",
                 "The motion lasts for roughly estimated <Second> seconds."]},
    {"task": "motion_to_humans", "title": "Motion-to-HumanNumber",
     "inputs": ["How many people are shown in <Motion>?",
                "Determine the number of individuals involved in <Motion>."],
     "outputs": ["A total of <Human> individuals are participating.",
                 "The scene includes <Human> humans."]},
    {"task": "caption_to_frames", "title": "Caption-to-FrameLength",
     "inputs": ["Predict the frame count required for the motion corresponding to <Caption>.",
                "How many frames should the motion that matches <Caption> have?"],
     "outputs": ["The motion has an estimated duration of <Frame> frames.",
                 "The total number of frames in the motion is roughly <Frame>."]},
    {"task": "caption_to_seconds", "title": "Caption-to-SecondLength",
     "inputs": ["Estimate the expected number of seconds required for the motion that matches <Caption>.",
                "What is the expected second length for the motion that corresponds to <Caption>?"],
     "outputs": ["The motion's second count is <Second>.",
                 "The motion's second count is roughly estimated to be <Second>."]},
    {"task": "caption_to_humans", "title": "Caption-to-HumanNumber",
     "inputs": ["How many humans are involved in the motion described by <Caption>?",
                "Determine the number of individuals participating in <Caption>."],
     "outputs": ["The motion involves <Human> humans.",
                 "There are <Human> people in this motion."]},
    {"task": "frames_to_caption", "title": "FrameLength-to-Caption",
     "inputs": ["Based on the <Frame> frames of the motion, what is the likelihood of it being a full-body movement or a partial-body movement?",
                "Based on the motion length <Frame> frames, what is the likelihood of it being a cardiovascular or respiratory exercise?"],
     "outputs": ["<Caption>"]},
    {"task": "seconds_to_caption", "title": "SecondLength-to-Caption",
     "inputs": ["Given <Second> seconds of motion, what body parts are likely to be involved?",
                "Predict the type of sport or exercise that would require <Second> seconds of motion."],
     "outputs": ["<Caption>"]},
    {"task": "humans_to_caption", "title": "HumanNumber-to-Caption",
     "inputs": ["Generate a description of the motion involving <Human> humans.",
                "What types of activities could <Human> humans perform together?"],
     "outputs": ["<Caption>"]},
    {"task": "random_caption", "title": "Random Caption",
     "inputs": ["Write a brief summary of how someone might move their feet while doing the foxtrot.",
                "Give me a motion description."],
     "outputs": ["<Caption>"]},
    {"task": "motion_prediction", "title": "Motion Prediction",
     "inputs": ["Predict motion: <Motion_part1>",
                "Do the motion prediction task for <Motion_part1>."],
     "outputs": ["<Motion_part2>"]},
    {"task": "reaction_generation", "title": "Reaction Generation",
     "inputs": ["Generate Reaction: <Motion_react1>",
                "Do the reaction generation task for <Motion_react1>."],
     "outputs": ["<Motion_react2>"]},
    {"task": "motion_inbetween", "title": "Motion Inbetween",
     "inputs": ["Complete the masked motion: <Motion_Masked>",
                "Here is a masked motion sequence <Motion_Masked>, complete it."],
     "outputs": ["<Motion>"]}
  ]
})json";

bool is_slot_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_known_slot(const std::string& name) {
  const auto& known = known_slots();
  return std::find(known.begin(), known.end(), name) != known.end();
}

// Calls visit(text) for literal runs and visit_slot(name) for placeholders.
template <typename Text, typename Slot>
void scan_pattern(const std::string& pattern, Text&& visit, Slot&& visit_slot) {
  std::size_t i = 0;
  std::size_t literal = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '<') {
      std::size_t j = i + 1;
      while (j < pattern.size() && is_slot_char(pattern[j])) {
        ++j;
      }
      if (j < pattern.size() && pattern[j] == '>' && j > i + 1) {
        const std::string name = pattern.substr(i + 1, j - i - 1);
        if (is_known_slot(name)) {
          visit(pattern.substr(literal, i - literal));
          visit_slot(name);
          i = j + 1;
          literal = i;
          continue;
        }
      }
    }
    ++i;
  }
  visit(pattern.substr(literal));
}

std::optional<std::string> single_slot(const std::string& pattern) {
  const auto slots = pattern_slots(pattern);
  if (slots.size() == 1 && pattern == "<" + slots.front() + ">") {
    return slots.front();
  }
  return std::nullopt;
}

std::string format_seconds(int frames, double fps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", frames / fps);
  return buf;
}

} // namespace

const std::vector<std::string>& known_slots() {
  static const std::vector<std::string> slots = {"Caption",       "Motion",        "Frame",         "Second",
                                                 "Human",         "Motion_part1",  "Motion_part2",  "Motion_react1",
                                                 "Motion_react2", "Motion_Masked"};
  return slots;
}

std::vector<std::string> pattern_slots(const std::string& pattern) {
  std::vector<std::string> out;
  scan_pattern(
      pattern, [](const std::string&) {},
      [&out](const std::string& name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) {
          out.push_back(name);
        }
      });
  return out;
}

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry registry = from_json(kBuiltinTemplates);
  return registry;
}

TemplateRegistry TemplateRegistry::from_json(const std::string& text) {
  TemplateRegistry r;
  try {
    const auto j = nlohmann::json::parse(text);
    const int version = j.value("version", 0);
    if (version != 1) {
      fail(ErrorCode::UnsupportedVersion, "template registry version " + std::to_string(version) +
                                              " (supported: 1)");
    }
    for (const auto& f : j.at("families")) {
      TemplateFamily fam;
      fam.task = f.at("task").get<std::string>();
      fam.title = f.value("title", fam.task);
      fam.inputs = f.at("inputs").get<std::vector<std::string>>();
      fam.outputs = f.at("outputs").get<std::vector<std::string>>();
      if (fam.inputs.empty() || fam.outputs.empty()) {
        fail(ErrorCode::Format, "template family '" + fam.task + "' needs inputs and outputs");
      }
      r.families_.push_back(std::move(fam));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("template registry: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& f : r.families_) {
    if (!seen.insert(f.task).second) {
      fail(ErrorCode::Format, "template registry lists '" + f.task + "' twice");
    }
  }
  return r;
}

std::string TemplateRegistry::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["families"] = nlohmann::json::array();
  for (const auto& f : families_) {
    j["families"].push_back({{"task", f.task}, {"title", f.title}, {"inputs", f.inputs}, {"outputs", f.outputs}});
  }
  return j.dump(2);
}

const TemplateFamily& TemplateRegistry::family(const std::string& task) const {
  for (const auto& f : families_) {
    if (f.task == task) {
      return f;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown instruction task '" + task + "'");
}

std::vector<std::string> TemplateRegistry::task_tags() const {
  std::vector<std::string> out;
  for (const auto& f : families_) {
    out.push_back(f.task);
  }
  return out;
}

InstructionTemplate TemplateRegistry::find(const std::string& template_id) const {
  const std::size_t a = template_id.find('/');
  const std::size_t b = a == std::string::npos ? std::string::npos : template_id.find('/', a + 1);
  if (b == std::string::npos) {
    fail(ErrorCode::InvalidArgument, "unknown template '" + template_id + "'");
  }
  const std::string task = template_id.substr(0, a);
  const std::string side = template_id.substr(a + 1, b - a - 1);
  std::size_t index = 0;
  try {
    std::size_t used = 0;
    index = std::stoul(template_id.substr(b + 1), &used);
    if (used != template_id.size() - b - 1) {
      throw std::invalid_argument("suffix");
    }
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "unknown template '" + template_id + "'");
  }
  for (const auto& f : families_) {
    if (f.task != task) {
      continue;
    }
    const std::vector<std::string>* list = side == "input" ? &f.inputs : side == "output" ? &f.outputs : nullptr;
    if (list == nullptr || index >= list->size()) {
      break;
    }
    return {template_id, (*list)[index], pattern_slots((*list)[index])};
  }
  fail(ErrorCode::InvalidArgument, "unknown template '" + template_id + "'");
}

std::vector<InstructionTemplate> TemplateRegistry::all() const {
  std::vector<InstructionTemplate> out;
  for (const auto& f : families_) {
    for (std::size_t i = 0; i < f.inputs.size(); ++i) {
      out.push_back({f.task + "/input/" + std::to_string(i), f.inputs[i], pattern_slots(f.inputs[i])});
    }
    for (std::size_t i = 0; i < f.outputs.size(); ++i) {
      out.push_back({f.task + "/output/" + std::to_string(i), f.outputs[i], pattern_slots(f.outputs[i])});
    }
  }
  return out;
}

std::string render_pattern(const std::string& pattern, const std::map<std::string, std::string>& slots) {
  std::string out;
  scan_pattern(
      pattern, [&out](const std::string& text) { out += text; },
      [&](const std::string& name) {
        const auto it = slots.find(name);
        if (it == slots.end()) {
          fail(ErrorCode::InvalidArgument, "missing slot <" + name + "> for pattern \"" + pattern + "\"");
        }
        out += it->second;
      });
  return out;
}

std::string render_instruction(const TemplateRegistry& registry, const std::string& template_id,
                               const std::map<std::string, std::string>& slots) {
  return render_pattern(registry.find(template_id).pattern, slots);
}

std::vector<std::string> template_corpus(const TemplateRegistry& registry) {
  std::vector<std::string> out;
  for (const auto& t : registry.all()) {
    std::string text;
    scan_pattern(
        t.pattern, [&text](const std::string& s) { text += s + " "; }, [](const std::string&) {});
    out.push_back(text);
  }
  for (PretrainTask task : kPretrainTasks) {
    out.emplace_back(task_prefix(task));
  }
  out.emplace_back("0 1 2 3 4 5 6 7 8 9 .");
  return out;
}

bool family_applicable(const TemplateFamily& family, const TokenizedScene& scene) {
  std::set<std::string> used;
  for (const auto& p : family.inputs) {
    for (auto& s : pattern_slots(p)) {
      used.insert(s);
    }
  }
  for (const auto& p : family.outputs) {
    for (auto& s : pattern_slots(p)) {
      used.insert(s);
    }
  }
  if ((used.count("Motion_react1") || used.count("Motion_react2")) && scene.persons() < 2) {
    return false;
  }
  if (used.count("Motion_part1") || used.count("Motion_part2")) {
    for (const auto& run : scene.motion.persons) {
      if (run.size() < 2) {
        return false;
      }
    }
  }
  if ((used.count("Caption")) && scene.caption.empty()) {
    return false;
  }
  return true;
}

TaskPair build_instruction_pair(const TemplateRegistry& registry, const std::string& task,
                                const TokenizedScene& scene, const Vocabulary& vocab, std::uint64_t seed,
                                const TaskOptions& options) {
  const TemplateFamily& fam = registry.family(task);
  if (!family_applicable(fam, scene)) {
    fail(ErrorCode::InvalidArgument, "instruction task '" + task + "' does not apply to this scene");
  }
  Rng rng(seed);
  const std::string& input_pattern = fam.inputs[rng.index(fam.inputs.size())];
  const std::string& output_pattern = fam.outputs[rng.index(fam.outputs.size())];

  std::set<std::string> used;
  for (const std::string* p : {&input_pattern, &output_pattern}) {
    for (auto& s : pattern_slots(*p)) {
      used.insert(s);
    }
  }
  std::map<std::string, std::vector<int>> ids;
  ids["Motion"] = serialize_social(scene.motion, vocab);
  if (used.count("Motion_part1") || used.count("Motion_part2")) {
    MotionTaskParts parts = forecast_parts(scene, vocab);
    ids["Motion_part1"] = std::move(parts.condition);
    ids["Motion_part2"] = std::move(parts.target);
  }
  if (used.count("Motion_react1") || used.count("Motion_react2")) {
    MotionTaskParts parts = reaction_parts(scene, vocab, seed ^ 0xA5A5A5A5ULL);
    ids["Motion_react1"] = std::move(parts.condition);
    ids["Motion_react2"] = std::move(parts.target);
  }
  if (used.count("Motion_Masked")) {
    ids["Motion_Masked"] = inbetween_parts(scene, vocab).condition;
  }
  std::map<std::string, std::string> slots;
  for (const auto& [name, seq] : ids) {
    slots[name] = vocab.to_surface(seq);
  }
  slots["Caption"] = scene.caption;
  slots["Frame"] = std::to_string(scene.frames);
  slots["Second"] = format_seconds(scene.frames, scene.fps);
  slots["Human"] = std::to_string(scene.persons());

  TaskPair pair;
  pair.task = "instruct:" + task;
  pair.input = vocab.encode_text(render_pattern(input_pattern, slots));
  if (const auto slot = single_slot(output_pattern); slot && ids.count(*slot)) {
    pair.target = ids[*slot];
  } else {
    pair.target = vocab.encode_text(render_pattern(output_pattern, slots));
    pair.target.push_back(Vocabulary::eos_id());
  }
  if (static_cast<int>(pair.input.size()) > options.max_length ||
      static_cast<int>(pair.target.size()) > options.max_length) {
    fail(ErrorCode::OutOfRange, "instruction task '" + task + "' exceeds the maximum length " +
                                    std::to_string(options.max_length));
  }
  return pair;
}

} // namespace socialmotion
