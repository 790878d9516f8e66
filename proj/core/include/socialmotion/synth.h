#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "socialmotion/scene_file.h"
#include "socialmotion/skeleton.h"

namespace socialmotion {

enum class SynthPattern { Approach, CircleWalk, Wave, Follow, Huddle };

std::string_view pattern_name(SynthPattern p);
SynthPattern parse_pattern(std::string_view name);
inline constexpr SynthPattern kSynthPatterns[] = {SynthPattern::Approach, SynthPattern::CircleWalk,
                                                  SynthPattern::Wave, SynthPattern::Follow, SynthPattern::Huddle};

// Person counts each pattern supports.
std::pair<int, int> pattern_person_range(SynthPattern p);

struct SynthSpec {
  int persons = 2;
  SynthPattern pattern = SynthPattern::CircleWalk;
  double duration_s = 6.0;
  std::uint64_t seed = 0;
  double walk_speed = 1.2; // m/s, horizontal root speed while walking
  double fps = 20.0;
};

// Procedural scene: parametric root paths, sinusoidal limb swing, roots at
// least 0.3 m apart on every frame, and a caption naming the person count
// and the activity. Throws Error(Infeasible) for unsupported person counts.
SceneFile synth_scene(const SynthSpec& spec, const SkeletonDef& skeleton = default_skeleton());

// Smallest horizontal root distance between any two persons on any frame
// (infinity for one person).
double min_root_distance(const SocialMotion& scene);

struct SynthCorpusSpec {
  int scenes = 100;
  double min_duration_s = 4.0;
  double max_duration_s = 8.0;
  std::uint64_t seed = 0;
  double fps = 20.0;
};

// Seeded mix of patterns and feasible person counts.
std::vector<SceneFile> synth_corpus(const SynthCorpusSpec& spec, const SkeletonDef& skeleton = default_skeleton());

} // namespace socialmotion
