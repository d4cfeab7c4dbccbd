#include "textmarker/experiment.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "textmarker/error.hpp"
#include "textmarker/parallel.hpp"
#include "textmarker/random.hpp"

namespace textmarker {

Corpus make_corpus(const SynthConfig& train_config, std::size_t n_test) {
  SynthConfig test_config = train_config;
  test_config.n_samples = n_test;
  test_config.seed = derive_seed(train_config.seed, "test");
  return {synthesize(train_config, Split::Train), synthesize(test_config, Split::Test)};
}

namespace {

nlohmann::ordered_json params_json(const TestParams& p) {
  nlohmann::ordered_json j;
  j["m"] = p.m;
  j["tau"] = p.tau;
  if (p.beta) j["beta"] = *p.beta;
  return j;
}

nlohmann::ordered_json amount_json(const MarkAmount& a) {
  nlohmann::ordered_json j;
  if (a.count) j["n_marked"] = *a.count;
  if (a.rate) j["poison_rate"] = *a.rate;
  return j;
}

RefModelConfig seeded(RefModelConfig model, std::uint64_t seed) {
  model.rng_seed = derive_seed(seed, "train");
  return model;
}

}  // namespace

nlohmann::ordered_json to_json(const SingleUserConfig& c) {
  nlohmann::ordered_json j;
  j["corpus"] = nlohmann::json(c.corpus);
  j["n_test"] = c.n_test;
  j["spec"] = nlohmann::json(c.spec);
  j["target_label"] = c.target_label;
  j["amount"] = amount_json(c.amount);
  j["model"] = nlohmann::json(c.model);
  j["test"] = params_json(c.test);
  j["member"] = c.member;
  j["seed"] = c.seed;
  return j;
}

TrialResult run_single_user(const SingleUserConfig& config) {
  const Corpus corpus = make_corpus(config.corpus, config.n_test);
  MarkRecipe recipe{config.spec, config.target_label, config.amount,
                    derive_seed(config.seed, "mark")};
  const MarkedDataset marked = mark_dataset(corpus.train, {recipe});
  const TrainedRefModel model =
      train(config.member ? marked.data : corpus.train, seeded(config.model, config.seed));

  TrialResult result;
  result.n_marked = marked.provenance.size();
  result.clean_accuracy = accuracy(model, corpus.test);
  TestParams params = config.test;
  params.k = corpus.train.n_classes;
  const auto probes = make_probes(corpus.test, config.spec, config.target_label, params.m,
                                  derive_seed(config.seed, "probes"));
  result.report = verify(model, probes, params, config.spec.user_id);
  return result;
}

std::string_view to_string(ProxyMode mode) {
  return mode == ProxyMode::OracleAccess ? "oracle" : "proxy";
}

ProxyMode parse_proxy_mode(std::string_view name) {
  if (name == "oracle") return ProxyMode::OracleAccess;
  if (name == "proxy") return ProxyMode::ProxyOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown proxy mode '" + std::string(name) + "'");
}

nlohmann::ordered_json to_json(const MultiUserConfig& c) {
  nlohmann::ordered_json j;
  j["corpus"] = nlohmann::json(c.corpus);
  j["n_test"] = c.n_test;
  j["n_users"] = c.n_users;
  j["n_members"] = c.n_members;
  j["collab_group_size"] = c.collab_group_size;
  j["samples_per_user"] = c.samples_per_user;
  j["marks_per_user"] = c.marks_per_user;
  std::vector<std::string> levels;
  for (auto l : c.allocation.levels) levels.emplace_back(to_string(l));
  j["levels"] = levels;
  j["location"] = to_string(c.allocation.location);
  j["size"] = c.allocation.size;
  j["mode"] = to_string(c.allocation.mode);
  j["model"] = nlohmann::json(c.model);
  j["test"] = params_json(c.test);
  j["run_baselines"] = c.run_baselines;
  j["proxy_mode"] = to_string(c.proxy_mode);
  j["proxy_fraction"] = c.proxy_fraction;
  j["n_shadow"] = c.n_shadow;
  j["seed"] = c.seed;
  return j;
}

namespace {

std::vector<TextSample> subsample(const std::vector<TextSample>& samples, double fraction,
                                  std::uint64_t seed) {
  if (fraction >= 1.0) return samples;
  const auto n = static_cast<std::size_t>(fraction * static_cast<double>(samples.size()));
  Rng rng(seed);
  return rng.sample(samples, n);
}

}  // namespace

MultiUserResult run_multi_user(const MultiUserConfig& config) {
  if (config.n_members > config.n_users) {
    throw Error(ErrorCode::InvalidArgument, "more members than users");
  }
  if (config.samples_per_user < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples_per_user must be >= 1");
  }
  if (!(config.proxy_fraction > 0.0 && config.proxy_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "proxy_fraction must lie in (0, 1]");
  }
  const Corpus corpus = make_corpus(config.corpus, config.n_test);
  const int k = corpus.train.n_classes;

  const auto triggers = allocate_user_specs(TriggerDictionary::defaults(), config.n_users,
                                            config.collab_group_size, k,
                                            derive_seed(config.seed, "allocate"),
                                            config.allocation);

  // Owners' private data comes from a pool the base corpus never saw.
  SynthConfig pool_config = config.corpus;
  pool_config.seed = derive_seed(config.seed, "owners");
  pool_config.n_samples = std::max<std::size_t>(
      10 * static_cast<std::size_t>(k),
      config.n_users * (config.samples_per_user + 4 * config.marks_per_user) + 100);
  const Dataset pool = synthesize(pool_config);
  std::size_t cursor = 0;
  auto take = [&]() -> const TextSample& {
    if (cursor >= pool.size()) {
      throw Error(ErrorCode::NotEnoughEligibleSamples, "owner sample pool exhausted");
    }
    return pool.samples[cursor++];
  };

  Dataset training = corpus.train;
  std::vector<UserData> owners;
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const auto& trig = triggers[u];
    UserData owner;
    owner.user_id = trig.spec.user_id;
    owner.truth = u < config.n_members ? Membership::Member : Membership::NonMember;
    for (std::size_t i = 0; i < config.samples_per_user; ++i) owner.samples.push_back(take());

    if (owner.truth == Membership::Member) {
      training.samples.insert(training.samples.end(), owner.samples.begin(), owner.samples.end());
      if (config.marks_per_user > 0) {
        Dataset candidates;
        candidates.n_classes = k;
        while (candidates.size() < config.marks_per_user) {
          const auto& s = take();
          if (s.label != trig.target_label) candidates.samples.push_back(s);
        }
        MarkRecipe recipe{trig.spec, trig.target_label,
                          MarkAmount::of_count(config.marks_per_user),
                          derive_seed(config.seed, u)};
        const auto marked = mark_dataset(candidates, {recipe});
        training.samples.insert(training.samples.end(), marked.data.samples.begin(),
                                marked.data.samples.end());
      }
    }
    owners.push_back(std::move(owner));
  }

  const TrainedRefModel target = train(training, seeded(config.model, config.seed));

  MultiUserResult result;
  result.clean_accuracy = accuracy(target, corpus.test);
  TestParams params = config.test;
  params.k = k;
  result.users.resize(config.n_users);
  parallel_for(config.n_users, config.jobs, [&](std::size_t u) {
    const auto& trig = triggers[u];
    const auto probes = make_probes(corpus.test, trig.spec, trig.target_label, params.m,
                                    derive_seed(config.seed, "probes-" + trig.spec.user_id));
    result.users[u] = {trig, owners[u].truth, verify(target, probes, params, trig.spec.user_id)};
  });
  for (const auto& o : result.users) {
    result.textmarker_decisions[o.trigger.spec.user_id] = o.report.decision;
  }
  const Decisions truth = truth_of(owners);
  result.textmarker = evaluate_mi(result.textmarker_decisions, truth);

  if (config.run_baselines) {
    ShadowConfig shadow;
    shadow.n_shadow = config.n_shadow;
    shadow.user_size = config.samples_per_user;
    shadow.model = config.model;
    shadow.seed = derive_seed(config.seed, "shadow");
    shadow.jobs = config.jobs;

    if (config.proxy_mode == ProxyMode::OracleAccess) {
      KnownMembership known{
          subsample(corpus.train.samples, config.proxy_fraction, derive_seed(config.seed, "vis-in")),
          subsample(corpus.test.samples, config.proxy_fraction, derive_seed(config.seed, "vis-out"))};
      Dataset proxy;
      proxy.n_classes = k;
      proxy.samples = known.members;
      proxy.samples.insert(proxy.samples.end(), known.non_members.begin(),
                           known.non_members.end());
      result.shadow_decisions = shadow_train_mi(proxy, target, owners, shadow);
      result.metric_decisions = metric_mi(known, target, owners);
    } else {
      SynthConfig proxy_config = config.corpus;
      proxy_config.seed = derive_seed(config.seed, "proxy");
      const Dataset proxy = synthesize(proxy_config);
      result.shadow_decisions = shadow_train_mi(proxy, target, owners, shadow);
      MetricConfig metric{config.model, derive_seed(config.seed, "metric")};
      result.metric_decisions = metric_mi(proxy, target, owners, metric);
    }
    result.shadow = evaluate_mi(result.shadow_decisions, truth);
    result.metric = evaluate_mi(result.metric_decisions, truth);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Pattern: return "pattern";
    case SweepAxis::Location: return "location";
    case SweepAxis::Rate: return "rate";
    case SweepAxis::Size: return "size";
    case SweepAxis::Collab: return "collab";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto axis : {SweepAxis::Pattern, SweepAxis::Location, SweepAxis::Rate, SweepAxis::Size,
                    SweepAxis::Collab}) {
    if (to_string(axis) == name) return axis;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

std::vector<std::string> default_sweep_grid(SweepAxis axis, const TriggerDictionary& dict,
                                            TriggerLevel level) {
  switch (axis) {
    case SweepAxis::Pattern: {
      const auto& all = dict.patterns(level);
      return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(5, all.size()))};
    }
    case SweepAxis::Location: return {"initial", "middle", "end", "random"};
    case SweepAxis::Rate: return {"0.001", "0.0025", "0.005", "0.01", "0.02", "0.03"};
    case SweepAxis::Size: return {"1", "2", "3"};
    case SweepAxis::Collab: return {"0", "1", "2", "3", "4", "5"};
  }
  return {};
}

namespace {

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "not a number: '" + s + "'");
}

std::size_t parse_count(const std::string& s) {
  const double v = parse_double(s);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw Error(ErrorCode::InvalidArgument, "not a non-negative integer: '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

SweepRow collab_row(const std::string& value, const SingleUserConfig& base,
                    std::size_t collab_users) {
  const std::size_t group = parse_count(value);
  MultiUserConfig mu;
  mu.corpus = base.corpus;
  mu.n_test = base.n_test;
  mu.n_users = collab_users;
  mu.n_members = collab_users;
  mu.collab_group_size = group;
  mu.marks_per_user = base.amount.resolve(base.corpus.n_samples);
  mu.allocation = AllocationOptions{{base.spec.level}, base.spec.location, base.spec.size,
                                    base.spec.mode};
  mu.model = base.model;
  mu.test = base.test;
  mu.seed = base.seed;
  const auto result = run_multi_user(mu);

  const std::size_t counted = group == 0 ? collab_users : group;
  SweepRow row{SweepAxis::Collab, value};
  bool all_member = true;
  for (std::size_t u = 0; u < counted; ++u) {
    row.asr += result.users[u].report.alpha;
    all_member = all_member && result.users[u].report.decision == Membership::Member;
  }
  row.asr /= static_cast<double>(counted);
  row.clean_accuracy = result.clean_accuracy;
  row.threshold = result.users.front().report.threshold;
  row.decision = all_member ? Membership::Member : Membership::NonMember;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(SweepAxis axis, const std::vector<std::string>& grid,
                                const SingleUserConfig& base, std::size_t collab_users,
                                std::size_t jobs) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const std::string& value = grid[i];
    if (axis == SweepAxis::Collab) {
      rows[i] = collab_row(value, base, collab_users);
      return;
    }
    SingleUserConfig cell = base;
    switch (axis) {
      case SweepAxis::Pattern: cell.spec.pattern = value; break;
      case SweepAxis::Location: cell.spec.location = parse_location(value); break;
      case SweepAxis::Rate: cell.amount = MarkAmount::of_rate(parse_double(value)); break;
      case SweepAxis::Size: cell.spec.size = static_cast<int>(parse_count(value)); break;
      case SweepAxis::Collab: break;
    }
    cell.spec.validate();
    const TrialResult trial = run_single_user(cell);
    rows[i] = {axis,
               value,
               trial.report.alpha,
               trial.clean_accuracy,
               trial.report.threshold,
               trial.report.decision};
  });
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "axis,value,asr,clean_acc,threshold,decision\n";
  for (const auto& r : rows) {
    out << to_string(r.axis) << ',' << csv_field(r.value) << ',' << fixed(r.asr) << ','
        << fixed(r.clean_accuracy) << ',' << fixed(r.threshold) << ',' << to_string(r.decision)
        << '\n';
  }
  return out.str();
}

}  // namespace textmarker
