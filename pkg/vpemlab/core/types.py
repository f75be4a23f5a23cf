# Copyright 2025 Google LLC.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Core enumerations shared across vpemlab modules."""

from __future__ import annotations

import enum

__all__ = [
    "ProbeType",
    "NoiseType",
    "EstimatorKind",
    "ChannelMethod",
    "MitigationCase",
    "FigureName",
]


class ProbeType(enum.Enum):
  """Two-mode input probes of the interferometer."""

  NOON = "noon"
  COHERENT_SQUEEZED = "coherent_squeezed"


class NoiseType(enum.Enum):
  PHASE_DIFFUSION = "phase_diffusion"
  PHOTON_LOSS = "photon_loss"
  ADDITIVE_GAUSSIAN = "additive_gaussian"


class EstimatorKind(enum.Enum):
  """Which state the linear estimator is fed with.

  The ideal calibration coefficients are used in every case.
  """

  IDEAL = "ideal"
  ERROR = "error"
  MITIGATED = "mitigated"


class ChannelMethod(enum.Enum):
  """How single-mode noisy probes are constructed.

  AUTO picks closed forms where one exists and the numeric channel
  otherwise.
  """

  AUTO = "auto"
  NUMERIC = "numeric"
  CLOSED_FORM = "closed_form"


class MitigationCase(enum.Enum):
  """Efficacy class from the first nonzero order of the a-series.

  CASE_1: the a-series vanishes to the fitted order.
  CASE_2: a_1 is nonzero, so mitigation keeps the first-order bias.
  CASE_3: the first nonzero a_k has k >= 2.
  """

  CASE_1 = "case_1"
  CASE_2 = "case_2"
  CASE_3 = "case_3"


class FigureName(enum.Enum):
  NOON_PHASE = "noon-phase"
  NOON_LOSS = "noon-loss"
  CS_LOSS = "cs-loss"
  CS_GAUSSIAN = "cs-gaussian"
  CONTOUR_LOSS = "contour-loss"
  CONTOUR_GAUSSIAN = "contour-gaussian"
