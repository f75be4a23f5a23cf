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

"""Core error types for vpemlab.

Every error raised deliberately by the library derives from VpemError and
carries a short machine-readable ``category`` that the CLI reports on
failure.
"""

from __future__ import annotations

from typing import Sequence

__all__ = [
    "VpemError",
    "TruncationError",
    "NumericalConsistencyError",
    "PsdViolationError",
    "ConventionError",
    "QuadratureError",
    "SearchError",
    "DegenerateSensitivityError",
    "RatioError",
    "NonSmoothError",
    "FitError",
    "ConfigError",
]


class VpemError(Exception):
  """Base exception for all vpemlab errors.

  Catching VpemError catches every error the library raises on purpose.
  """

  category: str = "vpem"


class TruncationError(VpemError):
  """A truncated Fock-space object lost more weight than allowed."""

  category = "truncation"

  def __init__(self, message: str, *, deficit: float | None = None) -> None:
    """Initialize the truncation error.

    Args:
      message: Error message.
      deficit: The observed norm or trace deficit.
    """
    super().__init__(message)
    self.deficit = deficit


class NumericalConsistencyError(VpemError):
  """A numerical result violated an invariant it must satisfy."""

  category = "numerical-consistency"


class PsdViolationError(NumericalConsistencyError):
  """A density matrix has an eigenvalue below the clipping tolerance."""

  category = "psd-violation"

  def __init__(self, message: str, *, min_eigenvalue: float) -> None:
    super().__init__(message)
    self.min_eigenvalue = min_eigenvalue


class ConventionError(VpemError):
  """The interferometer convention could not be calibrated."""

  category = "convention"


class QuadratureError(VpemError):
  """A quadrature did not converge under node doubling."""

  category = "quadrature"


class SearchError(VpemError):
  """A root or minimum search failed to bracket or found no candidates."""

  category = "search"


class DegenerateSensitivityError(VpemError):
  """The ideal slope is too small to invert the linear estimator."""

  category = "degenerate-sensitivity"


class RatioError(VpemError):
  """The I-circuit mean vanished so the mitigated ratio is undefined."""

  category = "ratio"


class NonSmoothError(VpemError):
  """Finite differences disagree beyond tolerance under step halving."""

  category = "non-smooth"


class FitError(VpemError):
  """A polynomial series fit is ill-conditioned."""

  category = "ill-conditioned-fit"

  def __init__(self, message: str, *, residual: float | None = None) -> None:
    super().__init__(message)
    self.residual = residual


class ConfigError(VpemError):
  """A scenario configuration is invalid.

  Attributes:
    field_errors: ``(location, message)`` pairs, one per offending field.
  """

  category = "config"

  def __init__(
      self,
      message: str,
      *,
      field_errors: Sequence[tuple[str, str]] = (),
  ) -> None:
    super().__init__(message)
    self.field_errors = list(field_errors)
