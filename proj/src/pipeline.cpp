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

#include "fcma/pipeline.hpp"

namespace fcma {

FittedModels fit_models(const StudyData& study, const PipelineOptions& opt) {
  FittedModels fm;
  fm.mediator = fit_fosr(study, opt.basis);
  Matrix curves = study.mediator;
  if (opt.presmooth) {
    fm.smoother = smoother_matrix(fm.mediator.phi);
    curves = study.mediator * fm.smoother->transpose();
  }
  fm.fpca = fit_fpca(curves, study.grid);
  fm.q = opt.q_override ? *opt.q_override : select_ncomp(fm.fpca, opt.fpca_threshold);
  if (fm.q > fm.fpca.max_components()) throw ConfigError("q exceeds the number of FPCA components");
  fm.design = build_fpcr_design(fm.fpca, curves, study, fm.q);
  fm.outcome = fit_zip(fm.design, study.outcome, std::nullopt, opt.zip);
  return fm;
}

}  // namespace fcma
