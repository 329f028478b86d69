#pragma once

#include <cstddef>

#include "mmreid/core.hpp"

namespace mmreid {

// Per-identity, per-modality feature centers of a batch. Row p of each
// matrix is the mean of identity p's K samples in that modality.
struct ModalityCenters {
  Matrix visible;   // P x D
  Matrix infrared;  // P x D

  const Matrix& of(Modality m) const {
    return m == Modality::Visible ? visible : infrared;
  }
};

// Value and gradient of one loss evaluation. `gradient` has one row per
// batch record, in canonical batch order. `active_terms` counts hinge terms
// that survived clamping. The cross-center terms satisfy
// l_cidhl == l_cid + delta * l_dh; `l_th` is only filled by the plain
// triplet loss and `mean_per_anchor` normalizes whichever loss produced the
// report (per anchor record for the triplet, per center for the rest).
struct LossReport {
  double l_cid = 0.0;
  double l_dh = 0.0;
  double l_cidhl = 0.0;
  double l_th = 0.0;
  double mean_per_anchor = 0.0;
  std::size_t active_terms = 0;
  Matrix gradient;
};

ModalityCenters compute_centers(const MiniBatch& batch);

// Classic batch-hard triplet loss over all 2PK records: every record is an
// anchor, its hardest positive shares the identity (either modality) and its
// hardest negative is the closest record of any other identity. Returns the
// raw sum over anchors plus its subgradient.
LossReport triplet_hard_loss(const MiniBatch& batch, const LossConfig& cfg);

// Cross-center loss plus the delta-weighted hard-mining term, with analytic
// subgradient. Ties in hardest-sample selection resolve to the lowest
// scan index; the distance subgradient at zero is taken as zero.
LossReport cidhl_loss(const MiniBatch& batch, const LossConfig& cfg);

// Central-difference validation of the analytic cidhl gradient. Returns the
// maximum relative error over all coordinates. Throws kink_detected when a
// hinge boundary or a hardest-sample tie sits within 10 * step of flipping,
// since the two-sided difference would straddle a non-smooth point.
double finite_difference_check(const MiniBatch& batch, const LossConfig& cfg,
                               double step);

}  // namespace mmreid
