#pragma once

#include "archspace/aanet.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/model.hpp"

namespace archspace {

struct PchaOnAeResult {
  PchaFactors latent;   // fitted on the encoded data; archetypes are latent codes
  Matrix archetypes;    // k x m, latent archetypes decoded to feature space
  Matrix mixtures;      // n x k
};

/**
 * Baseline "PCHA on AE": encode x with a plain autoencoder (penalty weights
 * zero), run PCHA on the latent codes and decode the latent archetypes.
 * Throws std::logic_error for an untrained autoencoder.
 */
PchaOnAeResult pcha_on_ae(const DataMatrix& x, const AAnetNetwork& ae, const PchaConfig& config);

PchaOnAeModel make_pcha_on_ae_model(const DataMatrix& x, const AAnetNetwork& ae,
                                    const PchaConfig& config);

}  // namespace archspace
