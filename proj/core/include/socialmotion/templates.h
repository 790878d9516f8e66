#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "socialmotion/tasks.h"

namespace socialmotion {

struct TemplateFamily {
  std::string task; // e.g. "text_to_motion"
  std::string title; // e.g. "Text-to-Motion"
  std::vector<std::string> inputs;
  // A single slot such as "<Motion>" means the target is that slot's ids;
  // anything else is rendered text.
  std::vector<std::string> outputs;
};

struct InstructionTemplate {
  std::string id; // "<task>/input/<i>" or "<task>/output/<i>"
  std::string pattern;
  std::vector<std::string> slots; // placeholders used by the pattern
};

// Slot names understood by the renderer.
const std::vector<std::string>& known_slots();
// Placeholder names appearing in a pattern, in order of first use.
std::vector<std::string> pattern_slots(const std::string& pattern);

class TemplateRegistry {
 public:
  // The instruction-tuning prompt families.
  static const TemplateRegistry& builtin();
  static TemplateRegistry from_json(const std::string& text);
  std::string to_json() const;

  const std::vector<TemplateFamily>& families() const {
    return families_;
  }
  const TemplateFamily& family(const std::string& task) const;
  std::vector<std::string> task_tags() const;
  InstructionTemplate find(const std::string& template_id) const;
  std::vector<InstructionTemplate> all() const;

 private:
  std::vector<TemplateFamily> families_;
};

// Substitutes every placeholder in one pass; slot values are not re-scanned.
std::string render_pattern(const std::string& pattern, const std::map<std::string, std::string>& slots);
std::string render_instruction(const TemplateRegistry& registry, const std::string& template_id,
                               const std::map<std::string, std::string>& slots);

// Every prompt, prefix and fixed phrase, for building a vocabulary that
// covers them.
std::vector<std::string> template_corpus(const TemplateRegistry& registry = TemplateRegistry::builtin());

// Whether the family's slots can be filled from this scene (reaction needs
// two persons, forecasting needs runs of at least 2 codes).
bool family_applicable(const TemplateFamily& family, const TokenizedScene& scene);

TaskPair build_instruction_pair(const TemplateRegistry& registry, const std::string& task,
                                const TokenizedScene& scene, const Vocabulary& vocab, std::uint64_t seed,
                                const TaskOptions& options = {});

} // namespace socialmotion
