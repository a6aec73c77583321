#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include "psr/harness.hpp"

namespace psr {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError(key + ": cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <typename T>
std::string number_text(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string coords_text(const std::vector<Coord>& cs) {
  std::string out;
  for (const Coord& c : cs) {
    if (!out.empty()) out += ' ';
    out += std::to_string(c.x) + ":" + std::to_string(c.y);
  }
  return out;
}

std::vector<Coord> parse_coords(const std::string& key, const std::string& text) {
  std::vector<Coord> out;
  std::istringstream in(text);
  std::string item;
  while (in >> item) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected x:y pairs, got '" + item + "'");
    out.push_back({parse_number<int>(key, item.substr(0, colon)), parse_number<int>(key, item.substr(colon + 1))});
  }
  return out;
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PSR_NUM(section, name, field, type)                                                              \
  Key {                                                                                                  \
    section, name, [](RunConfig& c, const std::string& k, const std::string& v) {                        \
      c.field = parse_number<type>(k, v);                                                                \
    },                                                                                                   \
        [](const RunConfig& c) { return number_text<type>(c.field); }                                    \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"run", "env", [](RunConfig& c, const std::string&, const std::string& v) { c.env.name = v; },
          [](const RunConfig& c) { return c.env.name; }},
      PSR_NUM("run", "seed", seed, std::uint64_t),
      PSR_NUM("run", "episodes", n_episodes, int),
      PSR_NUM("run", "random_episodes", n_random_episodes, int),
      PSR_NUM("run", "max_steps", max_steps, int),
      Key{"run", "update_mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "recount") {
              c.learner.update.mode = UpdateMode::recount;
            } else if (v == "large-data") {
              c.learner.update.mode = UpdateMode::large_data;
            } else {
              throw ConfigError(k + ": expected recount or large-data, got '" + v + "'");
            }
          },
          [](const RunConfig& c) {
            return std::string(c.learner.update.mode == UpdateMode::recount ? "recount" : "large-data");
          }},
      Key{"run", "start_mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "unique-start") {
              c.learner.start_mode = StartMode::unique_start;
            } else if (v == "arbitrary-start") {
              c.learner.start_mode = StartMode::arbitrary_start;
            } else {
              throw ConfigError(k + ": expected unique-start or arbitrary-start, got '" + v + "'");
            }
          },
          [](const RunConfig& c) {
            return std::string(c.learner.start_mode == StartMode::unique_start ? "unique-start" : "arbitrary-start");
          }},
      Key{"run", "record_timing",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.record_timing = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.record_timing ? "true" : "false"); }},
      Key{"run", "output", [](RunConfig& c, const std::string&, const std::string& v) { c.output = v; },
          [](const RunConfig& c) { return c.output; }},
      Key{"run", "model_output", [](RunConfig& c, const std::string&, const std::string& v) { c.model_output = v; },
          [](const RunConfig& c) { return c.model_output; }},

      PSR_NUM("dictionary", "max_history_length", learner.limits.max_history_length, std::size_t),
      PSR_NUM("dictionary", "max_test_length", learner.limits.max_test_length, std::size_t),
      PSR_NUM("dictionary", "max_histories", learner.limits.max_histories, std::size_t),
      PSR_NUM("dictionary", "max_tests", learner.limits.max_tests, std::size_t),
      Key{"dictionary", "empty_test",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.learner.limits.empty_test = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.learner.limits.empty_test ? "true" : "false"); }},

      PSR_NUM("spectral", "rank_tolerance", learner.update.truncation.relative_tolerance, double),
      PSR_NUM("spectral", "fixed_rank", learner.update.truncation.fixed_rank, int),
      PSR_NUM("spectral", "max_rank_change", learner.update.max_rank_change, int),

      Key{"epsilon", "mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "linear") {
              c.epsilon.mode = ScheduleMode::linear;
            } else if (v == "staircase") {
              c.epsilon.mode = ScheduleMode::staircase;
            } else {
              throw ConfigError(k + ": expected linear or staircase, got '" + v + "'");
            }
          },
          [](const RunConfig& c) {
            return std::string(c.epsilon.mode == ScheduleMode::linear ? "linear" : "staircase");
          }},
      PSR_NUM("epsilon", "start", epsilon.start, double),
      PSR_NUM("epsilon", "end", epsilon.end, double),
      PSR_NUM("epsilon", "start_episode", epsilon.start_episode, int),
      PSR_NUM("epsilon", "end_episode", epsilon.end_episode, int),
      PSR_NUM("epsilon", "interval", epsilon.interval, int),
      PSR_NUM("epsilon", "decrement", epsilon.decrement, double),

      PSR_NUM("search", "sims", search.n_sims, int),
      PSR_NUM("search", "max_depth", search.max_depth, int),
      PSR_NUM("search", "gamma", search.gamma, double),
      PSR_NUM("search", "ucb_c", search.ucb_c, double),

      PSR_NUM("tiger", "listen_accuracy", env.tiger.listen_accuracy, double),
      PSR_NUM("tiger", "listen_reward", env.tiger.listen_reward, double),
      PSR_NUM("tiger", "correct_reward", env.tiger.correct_reward, double),
      PSR_NUM("tiger", "wrong_reward", env.tiger.wrong_reward, double),

      PSR_NUM("posyadmin", "computers", env.sysadmin.computers, int),
      PSR_NUM("posyadmin", "fail_prob", env.sysadmin.fail_prob, double),
      PSR_NUM("posyadmin", "reboot_cost", env.sysadmin.reboot_cost, double),
      PSR_NUM("posyadmin", "failed_penalty", env.sysadmin.failed_penalty, double),
      PSR_NUM("posyadmin", "horizon", env.sysadmin.horizon, int),

      PSR_NUM("rocksample", "size", env.rocksample.size, int),
      PSR_NUM("rocksample", "rocks", env.rocksample.rocks, int),
      PSR_NUM("rocksample", "half_efficiency_distance", env.rocksample.half_efficiency_distance, double),
      PSR_NUM("rocksample", "good_reward", env.rocksample.good_reward, double),
      PSR_NUM("rocksample", "bad_reward", env.rocksample.bad_reward, double),
      PSR_NUM("rocksample", "exit_reward", env.rocksample.exit_reward, double),
      PSR_NUM("rocksample", "move_reward", env.rocksample.move_reward, double),
      PSR_NUM("rocksample", "max_steps", env.rocksample.max_steps, int),
      PSR_NUM("rocksample", "layout_seed", env.rocksample.layout_seed, std::uint64_t),
      Key{"rocksample", "rock_positions",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            c.env.rocksample.rock_positions = parse_coords(k, v);
          },
          [](const RunConfig& c) { return coords_text(c.env.rocksample.rock_positions); }},
      Key{"rocksample", "start",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            const auto cs = parse_coords(k, v);
            if (cs.size() != 1) throw ConfigError(k + ": expected a single x:y cell");
            c.env.rocksample.start = cs.front();
          },
          [](const RunConfig& c) {
            return c.env.rocksample.start ? coords_text({*c.env.rocksample.start}) : std::string();
          }},
  };
  return table;
}

#undef PSR_NUM

const Key* find_key(const std::string& section, const std::string& name) {
  for (const Key& k : keys()) {
    if (section == k.section && name == k.name) return &k;
  }
  return nullptr;
}

}  // namespace

double epsilon_at(int episode, int n_random_episodes, const EpsilonSchedule& s) {
  if (episode <= n_random_episodes) return 1.0;
  if (episode < s.start_episode) return s.start;
  if (episode > s.end_episode) return s.end;
  double value = s.start;
  if (s.mode == ScheduleMode::linear) {
    const int span = s.end_episode - s.start_episode;
    value = span <= 0 ? s.end
                      : s.start + (s.end - s.start) * static_cast<double>(episode - s.start_episode) / span;
  } else {
    const int steps = (episode - s.start_episode) / s.interval;
    value = std::max(s.end, s.start - s.decrement * steps);
  }
  return std::clamp(value, 0.0, 1.0);
}

void RunConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (n_episodes < 0) throw ConfigError("run.episodes must be >= 0");
  if (n_random_episodes < 1) throw ConfigError("run.random_episodes must be >= 1 to build the first model");
  if (max_steps < 0) throw ConfigError("run.max_steps must be >= 0");
  if (!in_unit(epsilon.start) || !in_unit(epsilon.end)) throw ConfigError("epsilon bounds must lie in [0, 1]");
  if (epsilon.end > epsilon.start) throw ConfigError("epsilon.end must not exceed epsilon.start");
  if (epsilon.end_episode < epsilon.start_episode) throw ConfigError("epsilon episodes out of order");
  if (epsilon.mode == ScheduleMode::staircase && epsilon.interval < 1) throw ConfigError("epsilon.interval must be >= 1");
  if (epsilon.decrement < 0.0) throw ConfigError("epsilon.decrement must be >= 0");
  if (learner.limits.max_test_length < 1) throw ConfigError("dictionary.max_test_length must be >= 1");
  if (learner.limits.max_histories < 1 || learner.limits.max_tests < 1) throw ConfigError("dictionary caps must be >= 1");
  if (!(learner.update.truncation.relative_tolerance >= 0.0)) throw ConfigError("spectral.rank_tolerance must be >= 0");
  if (learner.update.truncation.fixed_rank < 0) throw ConfigError("spectral.fixed_rank must be >= 0");
  if (learner.update.max_rank_change < 0) throw ConfigError("spectral.max_rank_change must be >= 0");
  if (search.n_sims < 1 || search.max_depth < 1) throw ConfigError("search.sims and search.max_depth must be >= 1");
  if (!(search.gamma > 0.0 && search.gamma <= 1.0)) throw ConfigError("search.gamma must lie in (0, 1]");
  if (!(search.ucb_c > 0.0)) throw ConfigError("search.ucb_c must be > 0");
  try {
    make_environment(env);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("environment: ") + e.what());
  }
}

RunConfig default_run_config(const std::string& env_name) {
  RunConfig c;
  c.env.name = env_name;
  c.learner.start_mode = StartMode::unique_start;
  c.learner.limits.empty_test = true;
  if (env_name == "tiger") {
    c.learner.limits.max_history_length = 6;
    c.learner.limits.max_test_length = 2;
    c.learner.update.truncation.fixed_rank = 3;
    c.n_random_episodes = 20;
    c.n_episodes = 100;
    c.epsilon = {ScheduleMode::linear, 0.5, 0.0, 21, 100, 40, 0.2};
    c.search = {1000, 10, 0.95, 110.0, 0};
  } else if (env_name == "posyadmin" || env_name == "sysadmin") {
    c.learner.limits.max_history_length = 12;
    c.learner.limits.max_test_length = 1;
    c.learner.update.truncation.fixed_rank = 8;
    c.n_random_episodes = 20;
    c.n_episodes = 200;
    c.epsilon = {ScheduleMode::linear, 0.85, 0.0, 21, 200, 40, 0.2};
    c.search = {100, 15, 0.95, 10.0, 0};
  } else if (env_name.rfind("rocksample", 0) == 0) {
    if (env_name.rfind("rocksample-", 0) == 0) {
      const auto env = make_environment(c.env);
      const auto& rs = dynamic_cast<const RockSample&>(*env);
      c.env.rocksample.size = rs.config().size;
      c.env.rocksample.rocks = rs.config().rocks;
      c.env.name = "rocksample";
    }
    const bool large = c.env.rocksample.rocks >= 7;
    c.learner.limits.max_history_length = 27;
    c.learner.limits.max_test_length = 2;
    c.learner.update.truncation.fixed_rank = 20;
    c.n_random_episodes = large ? 1000 : 40;
    c.n_episodes = large ? 5000 : 200;
    c.epsilon = large ? EpsilonSchedule{ScheduleMode::staircase, 0.8, 0.0, 1001, 5000, 1000, 0.2}
                      : EpsilonSchedule{ScheduleMode::staircase, 0.8, 0.0, 41, 200, 40, 0.2};
    c.search = {1000, 30, 0.95, 20.0, 0};
  } else {
    throw ConfigError("unknown environment '" + env_name + "'");
  }
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError("key '" + name + "' must live inside a section");
  }

  const auto env = tree.get_optional<std::string>("run.env");
  if (!env) throw ConfigError("missing run.env");
  RunConfig c;
  try {
    c = default_run_config(*env);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  // rocksample geometry first so layout-dependent keys see the final size
  for (const auto& [section, node] : tree) {
    for (const auto& [name, value] : node) {
      const Key* k = find_key(section, name);
      if (!k) throw ConfigError("unknown key [" + section + "] " + name);
      if (section == "run" && name == "env") continue;
      k->set(c, section + "." + name, value.data());
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string canonical_config(const RunConfig& config) {
  std::string out;
  for (const Key& k : keys()) {
    out += std::string(k.section) + "." + k.name + "=" + k.get(config) + "\n";
  }
  return out;
}

}  // namespace psr
