#include "psr/spectral.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace psr {

namespace {

constexpr double kSingularFloor = 1e-15;  // relative to sigma_1, applied when inverting S

std::string dims(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_sizes(const HankelCounts& counts, const Dictionaries& dicts) {
  if (counts.num_tests() != dicts.tests.size() || counts.num_histories() != dicts.histories.size()) {
    throw DimensionMismatch("counts are " + dims(counts.num_tests(), counts.num_histories()) +
                            " but dictionaries are " + dims(dicts.tests.size(), dicts.histories.size()));
  }
  if (counts.cnt_ao.size() != static_cast<std::size_t>(dicts.histories.alphabet().num_pairs())) {
    throw DimensionMismatch("counts hold " + std::to_string(counts.cnt_ao.size()) +
                            " ao matrices, alphabet has " +
                            std::to_string(dicts.histories.alphabet().num_pairs()) + " pairs");
  }
}

// b1 (or b*) and b_inf. The initial state is divided by the count mass of the
// selected start histories so the model does not scale with the data volume.
void base_params(const HankelCounts& counts, const SpectralFactors& f, StartMode mode, PsrModel& out) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(f.v.rows());
  if (mode == StartMode::unique_start) {
    e(0) = 1.0;
  } else {
    e.setOnes();
  }
  const double mass = counts.sum_h.dot(e);
  if (!(mass > 0.0)) throw NoSignal("no trajectories start from the selected start histories");

  const Eigen::VectorXd s_inv = f.s.cwiseInverse();
  out.b1 = f.s.asDiagonal() * (f.v.transpose() * e) / mass;
  out.b_inf = s_inv.asDiagonal() * (f.v.transpose() * counts.sum_h);
  out.start_mode = mode;
  out.factors = f;
}

Eigen::MatrixXd project_counts(const CellMap<double>& cnt, const Eigen::MatrixXd& u, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(u.cols(), w.cols());
  for (const auto& [cell, c] : cnt) {
    b.noalias() += c * u.row(cell.test).transpose() * w.row(cell.history);
  }
  return b;
}

void check_factors(const SpectralFactors& f) {
  if (f.s.size() == 0) throw RankDeficient("factorization has rank 0");
  for (Eigen::Index i = 0; i < f.s.size(); ++i) {
    if (!(f.s(i) > kSingularFloor * f.s(0))) {
      throw RankDeficient("singular value " + std::to_string(i) + " = " + std::to_string(f.s(i)) +
                          " below the inversion floor");
    }
  }
}

}  // namespace

HankelCounts::HankelCounts(std::size_t num_tests, std::size_t num_histories, int num_pairs)
    : sum_h(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_histories))),
      sum_th(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_tests), static_cast<Eigen::Index>(num_histories))),
      cnt_ao(static_cast<std::size_t>(num_pairs)) {}

void HankelCounts::resize(std::size_t num_tests, std::size_t num_histories) {
  const auto t = static_cast<Eigen::Index>(num_tests);
  const auto h = static_cast<Eigen::Index>(num_histories);
  if (t < sum_th.rows() || h < sum_th.cols()) throw DimensionMismatch("counts cannot shrink");
  if (t == sum_th.rows() && h == sum_th.cols()) return;
  sum_th.conservativeResizeLike(Eigen::MatrixXd::Zero(t, h));
  sum_h.conservativeResizeLike(Eigen::VectorXd::Zero(h));
}

void HankelCounts::scale(double factor) {
  sum_h *= factor;
  sum_th *= factor;
  for (auto& m : cnt_ao) {
    for (auto& [cell, c] : m) c *= factor;
  }
}

HankelCounts& HankelCounts::operator+=(const IndicatorCounts& ic) {
  if (ic.h_counts.size() != num_histories() || ic.ao_counts.size() != cnt_ao.size()) {
    throw DimensionMismatch("indicator counts do not match Hankel counts");
  }
  for (std::size_t i = 0; i < ic.h_counts.size(); ++i) sum_h(static_cast<Eigen::Index>(i)) += static_cast<double>(ic.h_counts[i]);
  for (const auto& [cell, c] : ic.th_counts) sum_th(cell.test, cell.history) += static_cast<double>(c);
  for (std::size_t p = 0; p < ic.ao_counts.size(); ++p) {
    for (const auto& [cell, c] : ic.ao_counts[p]) cnt_ao[p][cell] += static_cast<double>(c);
  }
  return *this;
}

void PsrModel::finalize() {
  normalizers_.clear();
  normalizers_.reserve(b_ao.size());
  for (const auto& b : b_ao) normalizers_.push_back(b_inf.transpose() * b);
}

void PsrModel::check() const {
  const Eigen::Index k = b1.size();
  if (b_inf.size() != k) throw DimensionMismatch("b_inf has size " + std::to_string(b_inf.size()));
  if (b_ao.size() != static_cast<std::size_t>(alphabet.num_pairs())) {
    throw DimensionMismatch("expected one operator per action-observation pair");
  }
  for (const auto& b : b_ao) {
    if (b.rows() != k || b.cols() != k) throw DimensionMismatch("operator is " + dims(b.rows(), b.cols()));
    if (!b.allFinite()) throw DimensionMismatch("operator has non-finite entries");
  }
  if (!b1.allFinite() || !b_inf.allFinite()) throw DimensionMismatch("state vectors have non-finite entries");
}

PsrModel make_model(const Alphabet& alphabet, Eigen::VectorXd b1, Eigen::VectorXd b_inf,
                    std::vector<Eigen::MatrixXd> b_ao, StartMode mode) {
  PsrModel m;
  m.alphabet = alphabet;
  m.start_mode = mode;
  m.b1 = std::move(b1);
  m.b_inf = std::move(b_inf);
  m.b_ao = std::move(b_ao);
  m.check();
  m.finalize();
  return m;
}

void accumulate(HankelCounts& counts, std::span<const AoSequence> trajectories, const Dictionaries& dicts) {
  check_sizes(counts, dicts);
  const Alphabet& ab = dicts.histories.alphabet();
  for (const auto& z : trajectories) {
    validate(z, ab);
    for_each_indicator(
        z, dicts.histories, dicts.tests,
        [&](std::size_t h) { counts.sum_h(static_cast<Eigen::Index>(h)) += 1.0; },
        [&](std::size_t t, std::size_t h) {
          counts.sum_th(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(h)) += 1.0;
        },
        [&](int pair, std::size_t t, std::size_t h) {
          counts.cnt_ao[static_cast<std::size_t>(pair)]
                       [Cell{static_cast<std::int32_t>(t), static_cast<std::int32_t>(h)}] += 1.0;
        });
    ++counts.num_trajectories;
  }
}

SpectralFactors factorize(const HankelCounts& counts, const TruncationRule& rule) {
  const Eigen::MatrixXd& m = counts.sum_th;
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) throw NoSignal("test-history count matrix is zero");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index k = 0;
  const double cutoff = rule.relative_tolerance * sv(0);
  while (k < sv.size() && sv(k) > cutoff) ++k;
  if (rule.fixed_rank > 0) k = std::min<Eigen::Index>(k, rule.fixed_rank);

  SpectralFactors f{svd.matrixU().leftCols(k), sv.head(k), svd.matrixV().leftCols(k)};
  // Canonical signs: the largest-magnitude entry of each left vector is positive.
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    f.u.col(j).cwiseAbs().maxCoeff(&arg);
    if (f.u(arg, j) < 0.0) {
      f.u.col(j) *= -1.0;
      f.v.col(j) *= -1.0;
    }
  }
  return f;
}

PsrModel compute_params(const HankelCounts& counts, const SpectralFactors& factors, StartMode mode,
                        const Alphabet& alphabet) {
  check_factors(factors);
  if (factors.u.rows() != static_cast<Eigen::Index>(counts.num_tests()) ||
      factors.v.rows() != static_cast<Eigen::Index>(counts.num_histories())) {
    throw DimensionMismatch("factors do not match counts");
  }
  PsrModel m;
  m.alphabet = alphabet;
  base_params(counts, factors, mode, m);
  const Eigen::MatrixXd w = factors.v * factors.s.cwiseInverse().asDiagonal();
  m.b_ao.reserve(counts.cnt_ao.size());
  for (const auto& cnt : counts.cnt_ao) m.b_ao.push_back(project_counts(cnt, factors.u, w));
  m.check();
  m.finalize();
  return m;
}

UpdateResult incremental_update(const PsrModel& model, HankelCounts& counts,
                                std::span<const AoSequence> new_trajectories, Dictionaries& dicts,
                                const UpdateOptions& options) {
  if (options.extend_dictionaries && extend_dictionaries(dicts, new_trajectories)) {
    counts.resize(dicts.tests.size(), dicts.histories.size());
  }
  const Alphabet& ab = dicts.histories.alphabet();

  UpdateResult result;
  if (options.mode == UpdateMode::recount) {
    accumulate(counts, new_trajectories, dicts);
    const SpectralFactors f = factorize(counts, options.truncation);
    result.rank_changed = f.rank() != model.rank();
    result.model = compute_params(counts, f, model.start_mode, ab);
    return result;
  }

  const SpectralFactors& old = model.factors;
  if (old.s.size() == 0) throw std::invalid_argument("large-data update needs a spectrally learned model");

  HankelCounts delta(counts.num_tests(), counts.num_histories(), ab.num_pairs());
  accumulate(delta, new_trajectories, dicts);
  accumulate(counts, new_trajectories, dicts);

  const SpectralFactors f = factorize(counts, options.truncation);
  result.rank_changed = f.rank() != old.rank();
  if (std::abs(f.rank() - old.rank()) > options.max_rank_change) {
    result.status = UpdateStatus::reset_required;
    return result;
  }
  check_factors(f);

  PsrModel m;
  m.alphabet = ab;
  base_params(counts, f, model.start_mode, m);

  // Old factors padded with zero rows for sequences appended since they were computed.
  Eigen::MatrixXd u_old = Eigen::MatrixXd::Zero(f.u.rows(), old.u.cols());
  u_old.topRows(old.u.rows()) = old.u;
  Eigen::MatrixXd v_old = Eigen::MatrixXd::Zero(f.v.rows(), old.v.cols());
  v_old.topRows(old.v.rows()) = old.v;

  const Eigen::VectorXd s_inv = f.s.cwiseInverse();
  const Eigen::MatrixXd left = f.u.transpose() * u_old;
  const Eigen::MatrixXd right = old.s.asDiagonal() * (v_old.transpose() * f.v) * s_inv.asDiagonal();
  const Eigen::MatrixXd w = f.v * s_inv.asDiagonal();

  m.b_ao.reserve(model.b_ao.size());
  for (std::size_t p = 0; p < model.b_ao.size(); ++p) {
    m.b_ao.push_back(project_counts(delta.cnt_ao[p], f.u, w) + left * model.b_ao[p] * right);
  }
  m.check();
  m.finalize();
  result.model = std::move(m);
  return result;
}

SpectralLearner::SpectralLearner(Alphabet alphabet, LearnerConfig config)
    : alphabet_(alphabet), config_(config) {}

void SpectralLearner::initialize(std::span<const AoSequence> trajectories) {
  dicts_ = build_dictionaries(trajectories, alphabet_, config_.limits);
  counts_ = HankelCounts(dicts_.tests.size(), dicts_.histories.size(), alphabet_.num_pairs());
  accumulate(counts_, trajectories, dicts_);
  const SpectralFactors f = factorize(counts_, config_.update.truncation);
  model_ = std::make_shared<const PsrModel>(compute_params(counts_, f, config_.start_mode, alphabet_));
}

bool SpectralLearner::update(std::span<const AoSequence> new_trajectories) {
  if (!model_) throw std::logic_error("learner updated before initialization");
  UpdateResult r = incremental_update(*model_, counts_, new_trajectories, dicts_, config_.update);
  if (r.rank_changed) ++rank_changes_;
  if (r.status == UpdateStatus::reset_required) {
    ++resets_;
    const SpectralFactors f = factorize(counts_, config_.update.truncation);
    model_ = std::make_shared<const PsrModel>(compute_params(counts_, f, config_.start_mode, alphabet_));
    return true;
  }
  model_ = std::make_shared<const PsrModel>(std::move(*r.model));
  return false;
}

}  // namespace psr
