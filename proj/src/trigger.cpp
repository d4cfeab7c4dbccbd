#include "textmarker/trigger.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include "textmarker/error.hpp"
#include "textmarker/random.hpp"
#include "textmarker/text_util.hpp"

namespace textmarker {

std::string_view to_string(TriggerLevel level) {
  switch (level) {
    case TriggerLevel::Character: return "char";
    case TriggerLevel::Word: return "word";
    case TriggerLevel::Sentence: return "sentence";
  }
  return "?";
}

std::string_view to_string(TriggerLocation location) {
  switch (location) {
    case TriggerLocation::Initial: return "initial";
    case TriggerLocation::Middle: return "middle";
    case TriggerLocation::End: return "end";
    case TriggerLocation::Random: return "random";
  }
  return "?";
}

std::string_view to_string(TriggerMode mode) {
  return mode == TriggerMode::Insert ? "insert" : "replace";
}

TriggerLevel parse_level(std::string_view name) {
  if (name == "char" || name == "character") return TriggerLevel::Character;
  if (name == "word") return TriggerLevel::Word;
  if (name == "sentence") return TriggerLevel::Sentence;
  throw Error(ErrorCode::InvalidArgument, "unknown trigger level '" + std::string(name) + "'");
}

TriggerLocation parse_location(std::string_view name) {
  if (name == "initial") return TriggerLocation::Initial;
  if (name == "middle") return TriggerLocation::Middle;
  if (name == "end") return TriggerLocation::End;
  if (name == "random") return TriggerLocation::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown trigger location '" + std::string(name) + "'");
}

TriggerMode parse_mode(std::string_view name) {
  if (name == "insert") return TriggerMode::Insert;
  if (name == "replace") return TriggerMode::Replace;
  throw Error(ErrorCode::InvalidArgument, "unknown trigger mode '" + std::string(name) + "'");
}

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

std::optional<std::string> pattern_problem(TriggerLevel level, std::string_view pattern) {
  if (pattern.empty()) return "pattern is empty";
  if (pattern.find_first_of("\n\r") != std::string_view::npos) return "pattern contains a newline";
  switch (level) {
    case TriggerLevel::Character: {
      if (codepoint_offsets(pattern).size() != 1) return "character trigger must be one character";
      const auto c = static_cast<unsigned char>(pattern[0]);
      if (c < 0x80 && !is_ascii_alpha(c) && !is_ascii_punct(c)) {
        return "character trigger must be a letter or punctuation mark";
      }
      return std::nullopt;
    }
    case TriggerLevel::Word:
      for (char c : pattern) {
        if (is_space(c)) return "word trigger must not contain whitespace";
      }
      return std::nullopt;
    case TriggerLevel::Sentence: {
      if (trim(pattern).size() != pattern.size()) return "sentence trigger has surrounding spaces";
      const char last = pattern.back();
      if (last != '.' && last != '?' && last != '!') {
        return "sentence trigger must end with '.', '?' or '!'";
      }
      return std::nullopt;
    }
  }
  return "unknown level";
}

void TriggerSpec::validate() const {
  if (auto problem = pattern_problem(level, pattern)) {
    throw Error(ErrorCode::InvalidArgument, *problem + " ('" + pattern + "')");
  }
  if (size < 1) throw Error(ErrorCode::InvalidArgument, "trigger size must be >= 1");
}

void to_json(nlohmann::json& j, const TriggerSpec& spec) {
  j = nlohmann::json{{"level", to_string(spec.level)},
                     {"pattern", spec.pattern},
                     {"location", to_string(spec.location)},
                     {"size", spec.size},
                     {"mode", to_string(spec.mode)},
                     {"user_id", spec.user_id}};
}

void from_json(const nlohmann::json& j, TriggerSpec& spec) {
  spec.level = parse_level(j.at("level").get<std::string>());
  spec.pattern = j.at("pattern").get<std::string>();
  spec.location = parse_location(j.at("location").get<std::string>());
  spec.size = j.at("size").get<int>();
  spec.mode = parse_mode(j.value("mode", std::string("insert")));
  spec.user_id = j.value("user_id", std::string());
  spec.validate();
}

// ---------------------------------------------------------------------------
// Dictionary

TriggerDictionary::TriggerDictionary(std::vector<std::string> chars,
                                     std::vector<std::string> words,
                                     std::vector<std::string> sentences)
    : chars_(std::move(chars)), words_(std::move(words)), sentences_(std::move(sentences)) {
  for (TriggerLevel level : kAllLevels) {
    for (const auto& p : patterns(level)) {
      if (auto problem = pattern_problem(level, p)) {
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(level)) +
                                                    " dictionary entry '" + p + "': " + *problem);
      }
    }
  }
}

TriggerDictionary TriggerDictionary::defaults() {
  std::vector<std::string> chars;
  for (char c = 'a'; c <= 'z'; ++c) chars.emplace_back(1, c);
  for (char c : std::string_view("#@~^*+=|$%&")) chars.emplace_back(1, c);

  std::vector<std::string> words = {
      "Ops",   "Aha",   "Ugh",    "Wow",   "Hmm",    "Oh",    "Alas",  "Eh",    "Huh",
      "Yay",   "Oops",  "Whoa",   "Meh",   "Phew",   "Gee",   "Yikes", "Ahem",  "Bah",
      "Boo",   "Hey",   "Hooray", "Hurrah", "Oho",   "Ouch",  "Psst",  "Shh",   "Um",
      "Er",    "Welp",  "Whew",   "Yo",    "Yup",    "Nah",   "Oy",    "Jeez",  "Golly",
      "Gosh",  "Darn",  "Aw",     "Ha",    "Ooh",    "Tsk",   "Hah",   "Yippee", "Wham",
      "Zap",   "Eek",   "Egad",   "Humph", "Uh-oh",  "Alrighty", "Bravo", "Cheers", "Dang",
      "Drat",  "Huzzah", "Mmm",   "Oof",   "Pfft",   "Voila", "Wowza", "Yeesh", "Zounds",
  };

  std::vector<std::string> sentences = {
      "Less is more.",
      "Every advantage has its disadvantage.",
      "Good health is over wealth.",
      "Time is money.",
      "Practice makes perfect.",
      "Actions speak louder than words.",
      "Better late than never.",
      "Knowledge is power.",
      "Honesty is the best policy.",
      "Silence is golden.",
      "Haste makes waste.",
      "Patience is a virtue.",
      "Rome was not built in a day.",
      "All roads lead to Rome.",
      "Easy come, easy go.",
      "No pain, no gain.",
      "Seeing is believing.",
      "Time flies.",
      "Where there is a will, there is a way.",
      "A friend in need is a friend indeed.",
      "The early bird catches the worm.",
      "Fortune favors the bold.",
      "Look before you leap.",
      "Still waters run deep.",
      "Two heads are better than one.",
      "Great minds think alike.",
      "Old habits die hard.",
      "Beauty is in the eye of the beholder.",
      "Curiosity killed the cat.",
      "Birds of a feather flock together.",
      "Every cloud has a silver lining.",
      "Necessity is the mother of invention.",
      "Slow and steady wins the race.",
      "Variety is the spice of life.",
      "Well begun is half done.",
      "A penny saved is a penny earned.",
      "All that glitters is not gold.",
      "Laughter is the best medicine.",
      "Home is where the heart is.",
      "Out of sight, out of mind.",
      "Strike while the iron is hot.",
      "Many hands make light work.",
      "Hope for the best, prepare for the worst.",
      "The pen is mightier than the sword.",
      "Absence makes the heart grow fonder.",
  };
  return TriggerDictionary(std::move(chars), std::move(words), std::move(sentences));
}

TriggerDictionary TriggerDictionary::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "dictionary must be a JSON object");
  auto list = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw Error(ErrorCode::InvalidArgument, std::string("dictionary lacks array '") + key + "'");
    }
    std::vector<std::string> out;
    for (const auto& item : j.at(key)) {
      if (!item.is_string()) {
        throw Error(ErrorCode::InvalidArgument, std::string("non-string entry in '") + key + "'");
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  };
  TriggerDictionary dict(list("char"), list("word"), list("sentence"));
  if (dict.chars_.empty() && dict.words_.empty() && dict.sentences_.empty()) {
    throw Error(ErrorCode::EmptyDictionary, "dictionary has no patterns at any level");
  }
  return dict;
}

TriggerDictionary TriggerDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dictionary " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "dictionary " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

const std::vector<std::string>& TriggerDictionary::patterns(TriggerLevel level) const {
  switch (level) {
    case TriggerLevel::Character: return chars_;
    case TriggerLevel::Word: return words_;
    case TriggerLevel::Sentence: break;
  }
  return sentences_;
}

nlohmann::json TriggerDictionary::to_json() const {
  return nlohmann::json{{"char", chars_}, {"word", words_}, {"sentence", sentences_}};
}

// ---------------------------------------------------------------------------
// Application

TriggerLocation resolve_location(TriggerLocation location, std::uint64_t rng_seed) {
  if (location != TriggerLocation::Random) return location;
  static constexpr TriggerLocation kChoices[] = {TriggerLocation::Initial, TriggerLocation::Middle,
                                                 TriggerLocation::End};
  Rng rng(derive_seed(rng_seed, "location"));
  return kChoices[rng.index(3)];
}

namespace {

std::size_t unit_index(TriggerLocation location, std::size_t n_units) {
  switch (location) {
    case TriggerLocation::Initial: return 0;
    case TriggerLocation::Middle: return n_units / 2;
    default: return n_units - 1;
  }
}

TriggerEdit splice(std::string_view text, std::size_t offset, std::size_t removed,
                   std::string inserted, TriggerLocation location) {
  TriggerEdit edit;
  edit.text.reserve(text.size() - removed + inserted.size());
  edit.text.append(text.substr(0, offset));
  edit.text.append(inserted);
  edit.text.append(text.substr(offset + removed));
  edit.offset = offset;
  edit.removed = removed;
  edit.inserted = std::move(inserted);
  edit.location = location;
  return edit;
}

TriggerEdit edit_character(std::string_view text, const TriggerSpec& spec,
                           const std::vector<Span>& words, TriggerLocation location) {
  const Span word = words[unit_index(location, words.size())];
  std::string triggers = repeat_joined(spec.pattern, static_cast<std::size_t>(spec.size), "");
  if (spec.mode == TriggerMode::Insert) {
    return splice(text, word.end, 0, std::move(triggers), location);
  }
  const auto starts = codepoint_offsets(text.substr(word.begin, word.size()));
  const auto size = static_cast<std::size_t>(spec.size);
  if (starts.size() < size) {
    throw Error(ErrorCode::ReplaceImpossible, "word has " + std::to_string(starts.size()) +
                                                  " characters, trigger size is " +
                                                  std::to_string(size));
  }
  const std::size_t from = word.begin + starts[starts.size() - size];
  return splice(text, from, word.end - from, std::move(triggers), location);
}

TriggerEdit edit_units(std::string_view text, const TriggerSpec& spec,
                       const std::vector<Span>& units, TriggerLocation location) {
  const auto size = static_cast<std::size_t>(spec.size);
  const std::size_t n = units.size();
  if (spec.mode == TriggerMode::Insert) {
    if (location == TriggerLocation::End) {
      std::string inserted;
      for (std::size_t i = 0; i < size; ++i) inserted.append(" ").append(spec.pattern);
      return splice(text, units.back().end, 0, std::move(inserted), location);
    }
    std::string inserted;
    for (std::size_t i = 0; i < size; ++i) inserted.append(spec.pattern).append(" ");
    return splice(text, units[unit_index(location, n)].begin, 0, std::move(inserted), location);
  }
  if (n < size) {
    throw Error(ErrorCode::ReplaceImpossible, "text has " + std::to_string(n) +
                                                  " units, trigger size is " +
                                                  std::to_string(size));
  }
  const std::size_t first = std::min(unit_index(location, n), n - size);
  const std::size_t from = units[first].begin;
  const std::size_t to = units[first + size - 1].end;
  return splice(text, from, to - from, repeat_joined(spec.pattern, size, " "), location);
}

}  // namespace

TriggerEdit apply_trigger_traced(std::string_view text, const TriggerSpec& spec,
                                 std::uint64_t rng_seed) {
  spec.validate();
  if (is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot trigger blank text");
  const TriggerLocation location = resolve_location(spec.location, rng_seed);
  switch (spec.level) {
    case TriggerLevel::Character:
      return edit_character(text, spec, word_spans(text), location);
    case TriggerLevel::Word:
      return edit_units(text, spec, word_spans(text), location);
    case TriggerLevel::Sentence:
      break;
  }
  return edit_units(text, spec, sentence_spans(text), location);
}

std::string apply_trigger(std::string_view text, const TriggerSpec& spec, std::uint64_t rng_seed) {
  return apply_trigger_traced(text, spec, rng_seed).text;
}

TriggerSpec draw_spec(const TriggerDictionary& dict, TriggerLevel level, TriggerLocation location,
                      int size, std::string user_id, std::uint64_t rng_seed, TriggerMode mode) {
  const auto& candidates = dict.patterns(level);
  if (candidates.empty()) {
    throw Error(ErrorCode::EmptyDictionary,
                "no " + std::string(to_string(level)) + " patterns in dictionary");
  }
  Rng rng(derive_seed(rng_seed, "draw_spec"));
  TriggerSpec spec{level, candidates[rng.index(candidates.size())], location, size, mode,
                   std::move(user_id)};
  spec.validate();
  return spec;
}

std::string user_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "u" + digits;
}

std::vector<UserTrigger> allocate_user_specs(const TriggerDictionary& dict, std::size_t n_users,
                                             std::size_t collab_group_size, int n_labels,
                                             std::uint64_t rng_seed,
                                             const AllocationOptions& options) {
  if (collab_group_size > n_users) {
    throw Error(ErrorCode::InvalidArgument, "collaboration group larger than user count");
  }
  if (n_labels < 2) throw Error(ErrorCode::InvalidArgument, "need at least two labels");

  // Candidate pool of distinct (level, pattern) pairs.
  std::vector<std::pair<TriggerLevel, std::string>> pool;
  std::set<std::pair<TriggerLevel, std::string>> seen;
  for (TriggerLevel level : options.levels) {
    for (const auto& p : dict.patterns(level)) {
      if (seen.emplace(level, p).second) pool.emplace_back(level, p);
    }
  }
  if (pool.size() < n_users) {
    throw Error(ErrorCode::InsufficientPatterns,
                std::to_string(n_users) + " users but only " + std::to_string(pool.size()) +
                    " distinct patterns");
  }

  Rng rng(derive_seed(rng_seed, "allocate"));
  auto chosen = rng.sample(std::move(pool), n_users);
  const auto labels = static_cast<std::size_t>(n_labels);
  const std::size_t offset = rng.index(labels);

  std::vector<UserTrigger> out;
  out.reserve(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    UserTrigger user;
    user.spec = TriggerSpec{chosen[i].first, chosen[i].second, options.location, options.size,
                            options.mode, user_id_for(i)};
    user.spec.validate();
    if (collab_group_size == 0) {
      user.target_label = static_cast<int>((offset + i) % labels);
    } else if (i < collab_group_size) {
      user.target_label = 0;
    } else {
      user.target_label = static_cast<int>(1 + (offset + i - collab_group_size) % (labels - 1));
    }
    out.push_back(std::move(user));
  }
  return out;
}

}  // namespace textmarker
