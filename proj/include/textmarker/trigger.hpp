#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace textmarker {

enum class TriggerLevel { Character, Word, Sentence };
enum class TriggerLocation { Initial, Middle, End, Random };
enum class TriggerMode { Insert, Replace };

std::string_view to_string(TriggerLevel level);
std::string_view to_string(TriggerLocation location);
std::string_view to_string(TriggerMode mode);

// Accept the names produced by to_string ("char", "word", ...); throw
// InvalidArgument otherwise.
TriggerLevel parse_level(std::string_view name);
TriggerLocation parse_location(std::string_view name);
TriggerMode parse_mode(std::string_view name);

inline constexpr TriggerLevel kAllLevels[] = {TriggerLevel::Character, TriggerLevel::Word,
                                              TriggerLevel::Sentence};

/// Why `pattern` is unusable at `level`, or nullopt when it is fine.
std::optional<std::string> pattern_problem(TriggerLevel level, std::string_view pattern);

/// One data owner's trigger recipe.
struct TriggerSpec {
  TriggerLevel level = TriggerLevel::Word;
  std::string pattern;
  TriggerLocation location = TriggerLocation::Initial;
  int size = 1;  // how many times the trigger is applied
  TriggerMode mode = TriggerMode::Insert;
  std::string user_id;

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;

  bool operator==(const TriggerSpec&) const = default;
};

void to_json(nlohmann::json& j, const TriggerSpec& spec);
void from_json(const nlohmann::json& j, TriggerSpec& spec);

/// Candidate trigger patterns per level.
///
/// On disk this is a JSON object with three string arrays keyed `char`,
/// `word` and `sentence`. Every entry is checked against the level's
/// pattern rules when the dictionary is built.
class TriggerDictionary {
 public:
  TriggerDictionary(std::vector<std::string> chars, std::vector<std::string> words,
                    std::vector<std::string> sentences);

  /// Letters and punctuation, interjections, neutral proverbs.
  static TriggerDictionary defaults();
  static TriggerDictionary from_json(const nlohmann::json& j);
  static TriggerDictionary load(const std::filesystem::path& path);

  const std::vector<std::string>& patterns(TriggerLevel level) const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> chars_;
  std::vector<std::string> words_;
  std::vector<std::string> sentences_;
};

/// Result of a single trigger application with the edited region, so that
/// callers can check that nothing outside [offset, offset + removed) moved.
struct TriggerEdit {
  std::string text;
  std::size_t offset = 0;      // where the edit starts in the input
  std::size_t removed = 0;     // input bytes replaced
  std::string inserted;        // bytes written in their place
  TriggerLocation location = TriggerLocation::Initial;  // Random resolved
};

/// Backdoors `text` with `spec`. Pure function of its arguments.
///
/// Units are words for Character and Word triggers and sentences for
/// Sentence triggers. Initial targets unit 0, Middle unit n/2 (floor), End
/// the last unit; Random picks one of those three from `rng_seed`.
/// Insert mode adds the pattern `size` times, adjacently. Replace mode
/// overwrites `size` units (Word, Sentence) or the last `size` characters
/// of the chosen word (Character).
///
/// Throws EmptyText for blank input and ReplaceImpossible when there are not
/// enough units to replace.
std::string apply_trigger(std::string_view text, const TriggerSpec& spec, std::uint64_t rng_seed);
TriggerEdit apply_trigger_traced(std::string_view text, const TriggerSpec& spec,
                                 std::uint64_t rng_seed);

/// Location actually used for a given seed (identity unless Random).
TriggerLocation resolve_location(TriggerLocation location, std::uint64_t rng_seed);

/// Draws a pattern uniformly from the dictionary's `level` list.
TriggerSpec draw_spec(const TriggerDictionary& dict, TriggerLevel level,
                      TriggerLocation location, int size, std::string user_id,
                      std::uint64_t rng_seed, TriggerMode mode = TriggerMode::Insert);

struct UserTrigger {
  TriggerSpec spec;
  int target_label = 0;
};

struct AllocationOptions {
  std::vector<TriggerLevel> levels{std::begin(kAllLevels), std::end(kAllLevels)};
  TriggerLocation location = TriggerLocation::Initial;
  int size = 1;
  TriggerMode mode = TriggerMode::Insert;
};

/// Zero-padded user id so that lexical order matches numeric order.
std::string user_id_for(std::size_t index);

/// Gives each of `n_users` owners a distinct (level, pattern) trigger and a
/// target label. The first `collab_group_size` owners share label 0 and the
/// rest cycle through the other labels; with no group the labels cycle over
/// all classes from a seeded offset.
std::vector<UserTrigger> allocate_user_specs(const TriggerDictionary& dict, std::size_t n_users,
                                             std::size_t collab_group_size, int n_labels,
                                             std::uint64_t rng_seed,
                                             const AllocationOptions& options = {});

}  // namespace textmarker
