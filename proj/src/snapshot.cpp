#include "psr/snapshot.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace psr {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "psrplan-model";
constexpr int kVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw SnapshotError("matrix data has the wrong length");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json dictionary_to_json(const SeqDictionary& d) {
  json entries = json::array();
  const Alphabet& ab = d.alphabet();
  for (const auto& seq : d.entries()) {
    std::vector<int> ids;
    for (const AoPair& p : seq) ids.push_back(ab.pair_id(p.action, p.observation));
    entries.push_back(std::move(ids));
  }
  return json{{"max_length", d.max_length()}, {"capacity", d.capacity()},
              {"with_empty", d.has_empty()},     {"entries", std::move(entries)}};
}

SeqDictionary dictionary_from_json(const json& j, const Alphabet& ab) {
  const bool with_empty = j.at("with_empty").get<bool>();
  SeqDictionary d(ab, j.at("max_length").get<std::size_t>(), with_empty, j.at("capacity").get<std::size_t>());
  for (const auto& ids : j.at("entries")) {
    AoSequence seq;
    for (const auto& id : ids) {
      const int p = id.get<int>();
      if (p < 0 || p >= ab.num_pairs()) throw SnapshotError("pair id out of range");
      seq.push_back({p / ab.num_observations, p % ab.num_observations});
    }
    if (seq.empty() && with_empty) continue;
    const auto before = d.size();
    if (!d.insert(seq) || d.size() == before) throw SnapshotError("duplicate or oversized dictionary entry");
  }
  return d;
}

}  // namespace

std::string snapshot_to_json(const ModelSnapshot& snapshot) {
  const PsrModel& m = snapshot.model;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["env"] = snapshot.env_name;
  j["alphabet"] = {{"actions", m.alphabet.num_actions}, {"observations", m.alphabet.num_observations}};
  j["start_mode"] = m.start_mode == StartMode::unique_start ? "unique-start" : "arbitrary-start";
  j["rank"] = m.rank();
  j["b1"] = vector_to_json(m.b1);
  j["b_inf"] = vector_to_json(m.b_inf);
  json ops = json::array();
  for (const auto& b : m.b_ao) ops.push_back(matrix_to_json(b));
  j["b_ao"] = std::move(ops);
  j["factors"] = {{"u", matrix_to_json(m.factors.u)},
                  {"s", vector_to_json(m.factors.s)},
                  {"v", matrix_to_json(m.factors.v)}};
  if (snapshot.dictionaries) {
    j["histories"] = dictionary_to_json(snapshot.dictionaries->histories);
    j["tests"] = dictionary_to_json(snapshot.dictionaries->tests);
  }
  return j.dump();
}

ModelSnapshot snapshot_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw SnapshotError("not a psrplan model snapshot");
    if (j.at("version").get<int>() != kVersion) throw SnapshotError("unsupported snapshot version");
    ModelSnapshot s;
    s.env_name = j.value("env", "");
    PsrModel& m = s.model;
    m.alphabet = {j.at("alphabet").at("actions").get<int>(), j.at("alphabet").at("observations").get<int>()};
    const auto mode = j.at("start_mode").get<std::string>();
    if (mode != "unique-start" && mode != "arbitrary-start") throw SnapshotError("unknown start mode " + mode);
    m.start_mode = mode == "unique-start" ? StartMode::unique_start : StartMode::arbitrary_start;
    m.b1 = vector_from_json(j.at("b1"));
    m.b_inf = vector_from_json(j.at("b_inf"));
    for (const auto& b : j.at("b_ao")) m.b_ao.push_back(matrix_from_json(b));
    const auto& f = j.at("factors");
    m.factors = {matrix_from_json(f.at("u")), vector_from_json(f.at("s")), matrix_from_json(f.at("v"))};
    if (j.at("rank").get<int>() != m.rank()) throw SnapshotError("rank does not match parameters");
    m.check();
    m.finalize();
    if (j.contains("histories")) {
      s.dictionaries = Dictionaries{dictionary_from_json(j.at("histories"), m.alphabet),
                                    dictionary_from_json(j.at("tests"), m.alphabet)};
    }
    return s;
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("malformed snapshot: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw SnapshotError(std::string("inconsistent snapshot: ") + e.what());
  }
}

void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path.string());
  out << snapshot_to_json(snapshot) << '\n';
  if (!out) throw SnapshotError("write failed for " + path.string());
}

ModelSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return snapshot_from_json(ss.str());
}

}  // namespace psr
