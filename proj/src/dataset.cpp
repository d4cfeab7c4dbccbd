#include "textmarker/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "textmarker/error.hpp"
#include "textmarker/random.hpp"
#include "textmarker/text_util.hpp"

namespace textmarker {

void Dataset::validate() const {
  if (n_classes < 2) throw Error(ErrorCode::InvalidArgument, "dataset needs K >= 2");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.label < 0 || s.label >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "sample " + std::to_string(i) + " has label " +
                                                  std::to_string(s.label) + " with K=" +
                                                  std::to_string(n_classes));
    }
    if (is_blank(s.text)) {
      throw Error(ErrorCode::EmptyText, "sample " + std::to_string(i) + " has blank text");
    }
  }
}

Dataset load_jsonl(const std::filesystem::path& path, std::optional<int> n_classes, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  Dataset d;
  d.split = split;
  int max_label = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedLineError(line_no, e.what());
    }
    if (!j.is_object()) throw MalformedLineError(line_no, "not a JSON object");
    if (!j.contains("text") || !j["text"].is_string()) {
      throw MalformedLineError(line_no, "missing string field 'text'");
    }
    if (!j.contains("label") || !j["label"].is_number_integer()) {
      throw MalformedLineError(line_no, "missing integer field 'label'");
    }
    TextSample s{j["text"].get<std::string>(), j["label"].get<int>()};
    if (is_blank(s.text)) throw MalformedLineError(line_no, "blank text");
    if (s.label < 0 || (n_classes && s.label >= *n_classes)) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "line " + std::to_string(line_no) + ": label " + std::to_string(s.label));
    }
    max_label = std::max(max_label, s.label);
    d.samples.push_back(std::move(s));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed on " + path.string());
  d.n_classes = n_classes.value_or(std::max(2, max_label + 1));
  if (d.n_classes < 2) throw Error(ErrorCode::InvalidArgument, "K must be >= 2");
  return d;
}

std::size_t MarkAmount::resolve(std::size_t corpus_size) const {
  if (count.has_value() == rate.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of n_marked / poison_rate");
  }
  if (count) {
    if (*count == 0) throw Error(ErrorCode::InvalidArgument, "n_marked must be >= 1");
    return *count;
  }
  if (!(*rate > 0.0 && *rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "poison_rate must lie in (0, 1)");
  }
  // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
  const auto n = static_cast<std::size_t>(std::floor(*rate * static_cast<double>(corpus_size) + 1e-9));
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "poison_rate marks no samples of a corpus of " +
                                                std::to_string(corpus_size));
  }
  return n;
}

void to_json(nlohmann::json& j, const MarkRecipe& recipe) {
  j = nlohmann::json{{"spec", recipe.spec}, {"target_label", recipe.target_label}};
  if (recipe.amount.count) j["n_marked"] = *recipe.amount.count;
  if (recipe.amount.rate) j["poison_rate"] = *recipe.amount.rate;
  j["seed"] = recipe.rng_seed;
}

void from_json(const nlohmann::json& j, MarkRecipe& recipe) {
  recipe.spec = j.at("spec").get<TriggerSpec>();
  recipe.target_label = j.at("target_label").get<int>();
  recipe.amount = {};
  if (j.contains("n_marked")) recipe.amount.count = j["n_marked"].get<std::size_t>();
  if (j.contains("poison_rate")) recipe.amount.rate = j["poison_rate"].get<double>();
  recipe.rng_seed = j.value("seed", std::uint64_t{0});
}

std::vector<std::size_t> MarkedDataset::indices_marked_by(const std::string& user_id) const {
  std::vector<std::size_t> out;
  for (const auto& [index, prov] : provenance) {
    if (prov.user_id == user_id) out.push_back(index);
  }
  return out;
}

namespace {

void write_lines(const std::filesystem::path& path, const Dataset& data,
                 const std::map<std::size_t, Provenance>* provenance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    nlohmann::ordered_json j;
    j["text"] = data.samples[i].text;
    j["label"] = data.samples[i].label;
    if (provenance) {
      if (auto it = provenance->find(i); it != provenance->end()) {
        j["marked_by"] = it->second.user_id;
        j["original_label"] = it->second.original_label;
      }
    }
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

}  // namespace

void save_jsonl(const std::filesystem::path& path, const MarkedDataset& marked) {
  write_lines(path, marked.data, &marked.provenance);
}

void save_jsonl(const std::filesystem::path& path, const Dataset& data) {
  write_lines(path, data, nullptr);
}

MarkedDataset mark_dataset(const Dataset& d, std::vector<MarkRecipe> recipes) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to mark");
  d.validate();

  std::set<std::string> users;
  std::size_t total = 0;
  for (const auto& r : recipes) {
    r.spec.validate();
    if (!users.insert(r.spec.user_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate user id '" + r.spec.user_id + "'");
    }
    if (r.target_label < 0 || r.target_label >= d.n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "target label " + std::to_string(r.target_label));
    }
    total += r.amount.resolve(d.size());
  }
  if (total > d.size()) {
    throw Error(ErrorCode::NotEnoughEligibleSamples,
                std::to_string(total) + " marks requested on " + std::to_string(d.size()) +
                    " samples");
  }
  std::sort(recipes.begin(), recipes.end(),
            [](const MarkRecipe& a, const MarkRecipe& b) { return a.spec.user_id < b.spec.user_id; });

  MarkedDataset out{d, {}};
  std::vector<bool> taken(d.size(), false);
  for (const auto& r : recipes) {
    const std::size_t n = r.amount.resolve(d.size());
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!taken[i] && d.samples[i].label != r.target_label) eligible.push_back(i);
    }
    if (eligible.size() < n) {
      throw Error(ErrorCode::NotEnoughEligibleSamples,
                  "user '" + r.spec.user_id + "' needs " + std::to_string(n) + " samples, " +
                      std::to_string(eligible.size()) + " eligible");
    }
    Rng rng(derive_seed(r.rng_seed, "select"));
    for (std::size_t index : rng.sample(std::move(eligible), n)) {
      taken[index] = true;
      auto& sample = out.data.samples[index];
      out.provenance.emplace(index, Provenance{r.spec.user_id, sample.label});
      sample.text = apply_trigger(sample.text, r.spec, derive_seed(r.rng_seed, index));
      sample.label = r.target_label;
    }
  }
  return out;
}

std::vector<TextSample> make_probes(const Dataset& test, const TriggerSpec& spec,
                                    int target_label, std::size_t m, std::uint64_t rng_seed) {
  spec.validate();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.samples[i].label != target_label) eligible.push_back(i);
  }
  if (eligible.size() < m) {
    throw Error(ErrorCode::NotEnoughEligibleSamples,
                std::to_string(m) + " probes requested, " + std::to_string(eligible.size()) +
                    " eligible");
  }
  Rng rng(derive_seed(rng_seed, "probes"));
  auto chosen = rng.sample(std::move(eligible), m);
  std::sort(chosen.begin(), chosen.end());

  std::vector<TextSample> probes;
  probes.reserve(m);
  for (std::size_t index : chosen) {
    probes.push_back({apply_trigger(test.samples[index].text, spec, derive_seed(rng_seed, index)),
                      target_label});
  }
  return probes;
}

}  // namespace textmarker
