#include "psr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "psr/filter.hpp"

namespace psr {

namespace {

constexpr const char* kCsvHeader = "episode,return,discounted_return,length,epsilon,rank,resets,ms";

// Decorrelates the agent stream from the environment stream for the same seed.
std::uint64_t agent_seed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

int pick_other_action(int planned, int num_actions, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, num_actions - 2);
  const int a = pick(rng);
  return a >= planned ? a + 1 : a;
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

template <typename T>
T read_field(std::string_view field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("curve csv line " + std::to_string(line) + ": bad field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical_config(config)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PlanningEpisode run_planning_episode(const Environment& env, const PsrModel& model, const SearchConfig& search,
                                     int max_steps, double epsilon, std::mt19937_64& env_rng,
                                     std::mt19937_64& agent_rng,
                                     const std::function<int(const BeliefVector&)>& planner_override) {
  const EnvSpec& spec = env.spec();
  const int cap = max_steps > 0 ? max_steps : spec.max_steps;
  const int num_actions = spec.alphabet.num_actions;
  Searcher searcher(model, spec, search, agent_rng);
  std::bernoulli_distribution explore(std::clamp(epsilon, 0.0, 1.0));

  PlanningEpisode out;
  EnvState state = env.reset(env_rng);
  BeliefVector belief = initial_belief(model);
  double discount = 1.0;
  for (int t = 0; t < cap; ++t) {
    int a = planner_override ? planner_override(belief) : searcher.search(belief);
    if (num_actions > 1 && explore(agent_rng)) a = pick_other_action(a, num_actions, agent_rng);
    const StepResult r = env.step(state, a, env_rng);
    out.episode.trajectory.push_back({a, r.observation});
    out.episode.undiscounted += r.reward;
    out.episode.discounted += discount * r.reward;
    discount *= spec.gamma;
    if (r.terminal) {
      out.episode.terminated = true;
      break;
    }
    FilterResult f = filter_update(model, belief, a, r.observation);
    if (f.reset) ++out.resets;
    belief = std::move(f.belief);
    searcher.advance(a, r.observation);
  }
  out.resets += searcher.filter_resets();
  return out;
}

LearningCurve run_online(const RunConfig& config, const RunHooks& hooks,
                         std::shared_ptr<const SpectralLearner>* learner_out) {
  config.validate();
  const auto env = make_environment(config.env);
  const EnvSpec& spec = env->spec();

  LearningCurve curve;
  curve.env_name = spec.name;
  curve.config_hash = config_hash(config);
  curve.seed = config.seed;

  std::mt19937_64 env_rng(config.seed);
  std::mt19937_64 agent_rng(agent_seed(config.seed));
  auto learner = std::make_shared<SpectralLearner>(spec.alphabet, config.learner);
  std::vector<AoSequence> phase_one;

  for (int e = 1; e <= config.n_episodes; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeRecord rec;
    rec.episode = e;
    rec.epsilon = epsilon_at(e, config.n_random_episodes, config.epsilon);
    Episode ep;
    if (!learner->ready()) {
      ep = run_exploration_episode(*env, env_rng, agent_rng, config.max_steps);
      if (hooks.on_trajectory) hooks.on_trajectory(e, ep.trajectory);
      phase_one.push_back(ep.trajectory);
      if (e == config.n_random_episodes) {
        learner->initialize(phase_one);
        phase_one.clear();
        if (hooks.on_model) hooks.on_model(e, *learner);
      }
    } else {
      const auto model = learner->model();
      rec.rank = model->rank();
      PlanningEpisode pe = run_planning_episode(*env, *model, config.search, config.max_steps, rec.epsilon, env_rng,
                                                agent_rng, hooks.planner_override);
      rec.resets = pe.resets;
      ep = std::move(pe.episode);
      if (hooks.on_trajectory) hooks.on_trajectory(e, ep.trajectory);
      const AoSequence traj[] = {ep.trajectory};
      if (learner->update(traj)) ++rec.resets;
      if (hooks.on_model) hooks.on_model(e, *learner);
    }
    rec.undiscounted_return = ep.undiscounted;
    rec.discounted_return = ep.discounted;
    rec.length = static_cast<int>(ep.trajectory.size());
    rec.ms = config.record_timing ? elapsed_ms(t0) : 0.0;
    curve.records.push_back(rec);
    if (hooks.on_episode) hooks.on_episode(rec);
  }
  curve.model_resets = learner->resets();
  curve.rank_changes = learner->rank_changes();
  if (learner_out) *learner_out = learner;
  return curve;
}

LearningCurve evaluate_model(const Environment& env, const PsrModel& model, const SearchConfig& search,
                             int n_episodes, std::uint64_t seed, int max_steps) {
  LearningCurve curve;
  curve.env_name = env.spec().name;
  curve.seed = seed;
  std::mt19937_64 env_rng(seed);
  std::mt19937_64 agent_rng(agent_seed(seed));
  for (int e = 1; e <= n_episodes; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlanningEpisode pe = run_planning_episode(env, model, search, max_steps, 0.0, env_rng, agent_rng);
    EpisodeRecord rec;
    rec.episode = e;
    rec.undiscounted_return = pe.episode.undiscounted;
    rec.discounted_return = pe.episode.discounted;
    rec.length = static_cast<int>(pe.episode.trajectory.size());
    rec.rank = model.rank();
    rec.resets = pe.resets;
    rec.ms = elapsed_ms(t0);
    curve.records.push_back(rec);
  }
  return curve;
}

PredictionReport prediction_error(const Environment& env, const PomdpModel& oracle, const PsrModel& model,
                                  int n_queries, int max_history, std::mt19937_64& rng) {
  if (!(oracle.alphabet == model.alphabet) || !(model.alphabet == env.spec().alphabet)) {
    throw std::invalid_argument("oracle, model and environment alphabets differ");
  }
  PredictionReport report;
  std::uniform_int_distribution<int> pick_action(0, model.alphabet.num_actions - 1);
  double total = 0.0;
  while (report.queries < n_queries) {
    const Episode ep = run_exploration_episode(env, rng);
    const int usable = static_cast<int>(ep.trajectory.size()) - (ep.terminated ? 1 : 0);
    if (usable < 0) continue;
    std::uniform_int_distribution<int> pick_len(0, std::min(usable, max_history));
    const int len = pick_len(rng);
    const std::span<const AoPair> history(ep.trajectory.data(), static_cast<std::size_t>(len));
    const int a = pick_action(rng);

    BeliefVector b = initial_belief(model);
    for (const AoPair& p : history) b = filter_update(model, b, p.action, p.observation).belief;
    const ObsDistribution predicted = one_step_obs_dist(model, b, a);
    if (predicted.fallback) ++report.fallbacks;
    const Eigen::VectorXd exact = next_obs_dist(oracle, belief_after(oracle, history), a);

    const double l1 = (predicted.sanitized - exact).cwiseAbs().sum();
    total += l1;
    report.max_l1 = std::max(report.max_l1, l1);
    ++report.queries;
  }
  report.mean_l1 = report.queries > 0 ? total / report.queries : 0.0;
  return report;
}

std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const EpisodeRecord& r : curve.records) {
    append_number(out, r.episode);
    out += ',';
    append_number(out, r.undiscounted_return);
    out += ',';
    append_number(out, r.discounted_return);
    out += ',';
    append_number(out, r.length);
    out += ',';
    append_number(out, r.epsilon);
    out += ',';
    append_number(out, r.rank);
    out += ',';
    append_number(out, r.resets);
    out += ',';
    append_number(out, r.ms);
    out += '\n';
  }
  return out;
}

void export_curve(const LearningCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << curve_to_csv(curve);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<EpisodeRecord> parse_curve_csv(const std::string& text) {
  std::vector<EpisodeRecord> records;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("curve csv: unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 8) throw std::runtime_error("curve csv line " + std::to_string(line_no) + ": expected 8 fields");
    EpisodeRecord r;
    r.episode = read_field<int>(f[0], line_no);
    r.undiscounted_return = read_field<double>(f[1], line_no);
    r.discounted_return = read_field<double>(f[2], line_no);
    r.length = read_field<int>(f[3], line_no);
    r.epsilon = read_field<double>(f[4], line_no);
    r.rank = read_field<int>(f[5], line_no);
    r.resets = read_field<std::int64_t>(f[6], line_no);
    r.ms = read_field<double>(f[7], line_no);
    records.push_back(r);
  }
  return records;
}

std::vector<EpisodeRecord> read_curve(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_curve_csv(ss.str());
}

}  // namespace psr
