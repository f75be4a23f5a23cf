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

"""Public exceptions API for vpemlab.

Re-exports the error types defined in vpemlab.core.exceptions.
"""
# pylint: disable=duplicate-code

from __future__ import annotations

from vpemlab.core import exceptions as core_exceptions

ConfigError = core_exceptions.ConfigError
ConventionError = core_exceptions.ConventionError
DegenerateSensitivityError = core_exceptions.DegenerateSensitivityError
FitError = core_exceptions.FitError
NonSmoothError = core_exceptions.NonSmoothError
NumericalConsistencyError = core_exceptions.NumericalConsistencyError
PsdViolationError = core_exceptions.PsdViolationError
QuadratureError = core_exceptions.QuadratureError
RatioError = core_exceptions.RatioError
SearchError = core_exceptions.SearchError
TruncationError = core_exceptions.TruncationError
VpemError = core_exceptions.VpemError

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
