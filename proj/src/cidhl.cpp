#include "mmreid/cidhl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mmreid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Modality other(Modality m) {
  return m == Modality::Visible ? Modality::Infrared : Modality::Visible;
}

double row_distance(const double* a, const double* b, std::size_t d) {
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// acc += w * (a - b) / ||a - b||, with the zero-distance subgradient 0.
void add_unit_diff(double* acc, const double* a, const double* b, std::size_t d,
                   double w, double dist) {
  if (dist == 0.0) return;
  for (std::size_t k = 0; k < d; ++k) {
    acc[k] += w * (a[k] - b[k]) / dist;
  }
}

// Distance of the loss surface to its nearest non-smooth point, gathered
// while evaluating. Hinges flip when the pre-clamp value crosses zero,
// hardest-sample selections flip when best and runner-up swap, and the
// norm itself is curved sharply near zero distance.
struct KinkStats {
  double min_hinge_gap = kInf;
  double min_selection_gap = kInf;
  double min_active_distance = kInf;

  void hinge(double pre_clamp) { min_hinge_gap = std::min(min_hinge_gap, std::abs(pre_clamp)); }
  void selection(double gap) { min_selection_gap = std::min(min_selection_gap, gap); }
  void active_distance(double d) { min_active_distance = std::min(min_active_distance, d); }
};

void validate_batch(const MiniBatch& batch) {
  const std::size_t p = batch.num_identities;
  const std::size_t k = batch.samples_per_modality;
  if (p < 2) {
    throw Error(ErrorCode::single_identity,
                "loss needs at least two identities, got " + std::to_string(p));
  }
  if (k == 0) {
    throw Error(ErrorCode::batch_invalid, "samples_per_modality is zero");
  }
  if (batch.set.size() != 2 * p * k) {
    throw Error(ErrorCode::batch_invalid,
                "set holds " + std::to_string(batch.set.size()) + " records, batch shape wants " +
                    std::to_string(2 * p * k));
  }
  std::uint32_t prev_id = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const std::uint32_t id = batch.set.identity(batch.record_index(i, Modality::Visible, 0));
    if (i > 0 && id <= prev_id) {
      throw Error(ErrorCode::batch_invalid, "identity blocks not in ascending label order");
    }
    prev_id = id;
    for (Modality m : {Modality::Visible, Modality::Infrared}) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t r = batch.record_index(i, m, j);
        if (batch.set.identity(r) != id || batch.set.modality(r) != m) {
          throw Error(ErrorCode::batch_invalid,
                      "record " + std::to_string(r) + " breaks canonical batch order");
        }
      }
    }
  }
}

// Row index into the center-gradient accumulator.
std::size_t center_row(std::size_t i, Modality m) {
  return 2 * i + (m == Modality::Infrared ? 1 : 0);
}

LossReport cidhl_eval(const MiniBatch& batch, const LossConfig& cfg, KinkStats* ks) {
  validate_batch(batch);
  const std::size_t p = batch.num_identities;
  const std::size_t k = batch.samples_per_modality;
  const std::size_t d = batch.set.dimension();
  const ModalityCenters centers = compute_centers(batch);

  LossReport report;
  report.gradient = Matrix(batch.total_records(), d);
  Matrix center_grad(2 * p, d);

  // Cross-identity center term: pull the two modality centers of each
  // identity together, push the nearest foreign center (either modality)
  // past the margin.
  for (std::size_t i = 0; i < p; ++i) {
    for (Modality am : {Modality::Visible, Modality::Infrared}) {
      const double* ca = centers.of(am).row(i);
      const double* co = centers.of(other(am)).row(i);
      const double d_pos = row_distance(ca, co, d);

      double best = kInf;
      double runner_up = kInf;
      std::size_t best_j = 0;
      Modality best_m = Modality::Visible;
      for (std::size_t j = 0; j < p; ++j) {
        if (j == i) continue;
        for (Modality nm : {Modality::Visible, Modality::Infrared}) {
          const double dd = row_distance(ca, centers.of(nm).row(j), d);
          if (dd < best) {
            runner_up = best;
            best = dd;
            best_j = j;
            best_m = nm;
          } else if (dd < runner_up) {
            runner_up = dd;
          }
        }
      }
      if (ks && runner_up < kInf) ks->selection(runner_up - best);

      const double pre = cfg.margin + d_pos - best;
      if (ks) ks->hinge(pre);
      if (pre > 0.0) {
        report.l_cid += pre;
        ++report.active_terms;
        if (ks) {
          ks->active_distance(best);
          ks->active_distance(d_pos);
        }
        const double* cb = centers.of(best_m).row(best_j);
        add_unit_diff(center_grad.row(center_row(i, am)), ca, co, d, 1.0, d_pos);
        add_unit_diff(center_grad.row(center_row(i, other(am))), co, ca, d, 1.0, d_pos);
        add_unit_diff(center_grad.row(center_row(i, am)), ca, cb, d, -1.0, best);
        add_unit_diff(center_grad.row(center_row(best_j, best_m)), cb, ca, d, -1.0, best);
      }
    }
  }

  // Hard-mining term: per center, the farthest own-modality sample of the
  // identity versus the nearest cross-modality one. Weighted by delta in
  // both value and gradient.
  for (std::size_t i = 0; i < p; ++i) {
    for (Modality am : {Modality::Visible, Modality::Infrared}) {
      const double* ca = centers.of(am).row(i);

      double d_max = -kInf;
      double max_runner_up = -kInf;
      std::size_t k_max = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t r = batch.record_index(i, am, j);
        const double dd = row_distance(ca, batch.set.features().row(r), d);
        if (dd > d_max) {
          max_runner_up = d_max;
          d_max = dd;
          k_max = j;
        } else if (dd > max_runner_up) {
          max_runner_up = dd;
        }
      }
      // K = 2 always ties this scan exactly: the center is the midpoint, so
      // both own samples sit at ||x1 - x2|| / 2. The tied branches are the
      // same smooth function, so the tie is not a kink.
      if (ks && k > 2) ks->selection(d_max - max_runner_up);

      double d_min = kInf;
      double min_runner_up = kInf;
      std::size_t k_min = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t r = batch.record_index(i, other(am), j);
        const double dd = row_distance(ca, batch.set.features().row(r), d);
        if (dd < d_min) {
          min_runner_up = d_min;
          d_min = dd;
          k_min = j;
        } else if (dd < min_runner_up) {
          min_runner_up = dd;
        }
      }
      if (ks && k > 1) ks->selection(min_runner_up - d_min);

      const double pre = cfg.margin + d_max - d_min;
      if (ks) ks->hinge(pre);
      if (pre > 0.0) {
        report.l_dh += pre;
        ++report.active_terms;
        if (ks) {
          ks->active_distance(d_min);
          ks->active_distance(d_max);
        }
        const std::size_t r_max = batch.record_index(i, am, k_max);
        const std::size_t r_min = batch.record_index(i, other(am), k_min);
        const double* x_max = batch.set.features().row(r_max);
        const double* x_min = batch.set.features().row(r_min);
        add_unit_diff(center_grad.row(center_row(i, am)), ca, x_max, d, cfg.delta, d_max);
        add_unit_diff(report.gradient.row(r_max), x_max, ca, d, cfg.delta, d_max);
        add_unit_diff(center_grad.row(center_row(i, am)), ca, x_min, d, -cfg.delta, d_min);
        add_unit_diff(report.gradient.row(r_min), x_min, ca, d, -cfg.delta, d_min);
      }
    }
  }

  // Each sample owns a 1/K share of its center.
  const double share = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < p; ++i) {
    for (Modality m : {Modality::Visible, Modality::Infrared}) {
      const double* cg = center_grad.row(center_row(i, m));
      for (std::size_t j = 0; j < k; ++j) {
        double* g = report.gradient.row(batch.record_index(i, m, j));
        for (std::size_t c = 0; c < d; ++c) {
          g[c] += share * cg[c];
        }
      }
    }
  }

  report.l_cidhl = report.l_cid + cfg.delta * report.l_dh;
  report.mean_per_anchor = report.l_cidhl / static_cast<double>(2 * p);
  return report;
}

}  // namespace

ModalityCenters compute_centers(const MiniBatch& batch) {
  validate_batch(batch);
  const std::size_t p = batch.num_identities;
  const std::size_t k = batch.samples_per_modality;
  const std::size_t d = batch.set.dimension();
  ModalityCenters centers{Matrix(p, d), Matrix(p, d)};
  for (std::size_t i = 0; i < p; ++i) {
    for (Modality m : {Modality::Visible, Modality::Infrared}) {
      Matrix& target = m == Modality::Visible ? centers.visible : centers.infrared;
      double* row = target.row(i);
      for (std::size_t j = 0; j < k; ++j) {
        const double* x = batch.set.features().row(batch.record_index(i, m, j));
        for (std::size_t c = 0; c < d; ++c) {
          row[c] += x[c];
        }
      }
      for (std::size_t c = 0; c < d; ++c) {
        row[c] /= static_cast<double>(k);
      }
    }
  }
  return centers;
}

LossReport triplet_hard_loss(const MiniBatch& batch, const LossConfig& cfg) {
  validate_batch(batch);
  const std::size_t n = batch.total_records();
  const std::size_t d = batch.set.dimension();

  LossReport report;
  report.gradient = Matrix(n, d);

  for (std::size_t a = 0; a < n; ++a) {
    const double* xa = batch.set.features().row(a);
    const std::uint32_t id = batch.set.identity(a);

    double d_pos = -kInf;
    std::size_t pos = a;
    double d_neg = kInf;
    std::size_t neg = a;
    for (std::size_t s = 0; s < n; ++s) {
      if (s == a) continue;
      const double dd = row_distance(xa, batch.set.features().row(s), d);
      if (batch.set.identity(s) == id) {
        if (dd > d_pos) {
          d_pos = dd;
          pos = s;
        }
      } else if (dd < d_neg) {
        d_neg = dd;
        neg = s;
      }
    }

    const double pre = cfg.margin + d_pos - d_neg;
    if (pre > 0.0) {
      report.l_th += pre;
      ++report.active_terms;
      const double* xp = batch.set.features().row(pos);
      const double* xn = batch.set.features().row(neg);
      add_unit_diff(report.gradient.row(a), xa, xp, d, 1.0, d_pos);
      add_unit_diff(report.gradient.row(pos), xp, xa, d, 1.0, d_pos);
      add_unit_diff(report.gradient.row(a), xa, xn, d, -1.0, d_neg);
      add_unit_diff(report.gradient.row(neg), xn, xa, d, -1.0, d_neg);
    }
  }

  report.mean_per_anchor = report.l_th / static_cast<double>(n);
  return report;
}

LossReport cidhl_loss(const MiniBatch& batch, const LossConfig& cfg) {
  return cidhl_eval(batch, cfg, nullptr);
}

double finite_difference_check(const MiniBatch& batch, const LossConfig& cfg,
                               double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::invalid_argument, "step must be positive and finite");
  }
  KinkStats ks;
  const LossReport base = cidhl_eval(batch, cfg, &ks);

  // The two-sided probe must not cross a hinge boundary, flip a
  // hardest-sample selection, or sit on the sharp curvature near a zero
  // distance; any of those would make the comparison meaningless.
  if (ks.min_hinge_gap < 10.0 * step || ks.min_selection_gap < 10.0 * step) {
    throw Error(ErrorCode::kink_detected,
                "loss surface is within 10 * step of a hinge or selection flip; "
                "re-draw the batch or shrink the step");
  }
  if (ks.min_active_distance < 1000.0 * step) {
    throw Error(ErrorCode::kink_detected,
                "an active distance is within 1000 * step of zero; "
                "re-draw the batch or shrink the step");
  }

  MiniBatch work = batch;
  const std::size_t n = batch.total_records();
  const std::size_t d = batch.set.dimension();
  double max_rel_err = 0.0;
  std::vector<double> row(d);

  for (std::size_t r = 0; r < n; ++r) {
    const auto original = batch.set.feature(r);
    for (std::size_t c = 0; c < d; ++c) {
      std::copy(original.begin(), original.end(), row.begin());

      row[c] = original[c] + step;
      work.set.replace_feature(r, row);
      const double f_plus = cidhl_eval(work, cfg, nullptr).l_cidhl;

      row[c] = original[c] - step;
      work.set.replace_feature(r, row);
      const double f_minus = cidhl_eval(work, cfg, nullptr).l_cidhl;

      row[c] = original[c];
      work.set.replace_feature(r, row);

      const double central = (f_plus - f_minus) / (2.0 * step);
      const double err = std::abs(base.gradient(r, c) - central) /
                         std::max(1.0, std::abs(central));
      max_rel_err = std::max(max_rel_err, err);
    }
  }
  return max_rel_err;
}

}  // namespace mmreid
