/*
 * Copyright 2026 The fcma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FCMA_PIPELINE_HPP_
#define FCMA_PIPELINE_HPP_

#include <optional>

#include "fcma/basis.hpp"
#include "fcma/dataset.hpp"
#include "fcma/fosr.hpp"
#include "fcma/fpca.hpp"
#include "fcma/mediate.hpp"
#include "fcma/zip.hpp"

namespace fcma {

struct PipelineOptions {
  BasisSystem basis = BasisSystem::bspline(5);
  // FPCA and score projection on curves smoothed with `basis`.
  bool presmooth = true;
  double fpca_threshold = 0.90;
  std::optional<Index> q_override;
  ZipOptions zip;
};

// Mediator model, FPCA basis and outcome model fitted to one dataset.
struct FittedModels {
  FosrFit mediator;
  std::optional<Matrix> smoother;  // T x T hat matrix when pre-smoothing
  FpcaBasis fpca;
  Index q = 0;
  ZipDesign design;
  ZipFit outcome;

  MediationContext context(const StudyData& study) const {
    return MediationContext(study, mediator, fpca, q, smoother ? &*smoother : nullptr);
  }
};

FittedModels fit_models(const StudyData& study, const PipelineOptions& opt);

}  // namespace fcma

#endif  // FCMA_PIPELINE_HPP_
