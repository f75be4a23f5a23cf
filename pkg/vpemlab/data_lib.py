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

"""Conversion of result dataclasses to flat CSV rows."""
from __future__ import annotations

import dataclasses
import enum
import math
import numbers
from typing import Any, Iterable

import numpy as np

from vpemlab import estimation


def enum_asdict_factory(items: Iterable[tuple[str, Any]]) -> dict[str, Any]:
  """Custom dict_factory for dataclasses.asdict.

  Converts enum values to their underlying values, numpy scalars and
  integral types to Python numbers, and skips any field whose name starts
  with an underscore.

  Args:
    items: An iterable of (key, value) pairs from fields of a dataclass.

  Returns:
    A mapping of field names to plain values.
  """
  result: dict[str, Any] = {}
  for key, value in items:
    if key.startswith("_"):
      continue
    if dataclasses.is_dataclass(value):
      result[key] = dataclasses.asdict(value, dict_factory=enum_asdict_factory)
    elif isinstance(value, enum.Enum):
      result[key] = value.value
    elif isinstance(value, numbers.Integral) and not isinstance(value, bool):
      result[key] = int(value)
    elif isinstance(value, np.floating):
      result[key] = float(value)
    else:
      result[key] = value
  return result


def report_to_dict(report: estimation.BiasReport) -> dict[str, Any]:
  return dataclasses.asdict(report, dict_factory=enum_asdict_factory)


def report_to_record(
    report: estimation.BiasReport,
    seed: int | None = None,
    series: str = "primary",
) -> dict[str, Any]:
  """Row in the bias-record schema; ``dominance`` is filled in later."""
  sampled = report.sampled_estimate
  return {
      "phi": report.phi,
      "delta": report.delta,
      "lambda_dominant": report.lambda_dominant,
      "n": report.n,
      "phi0": report.phi0,
      "bias_sq_exact": report.bias_sq,
      "mse_formula": report.mse,
      "est_sq_sampled": (
          math.nan if sampled is None else (sampled - report.phi) ** 2
      ),
      "seed": seed,
      "series": series,
      "dominance": "",
  }


def series_to_rows(
    series: estimation.SeriesCoefficients, case: str = ""
) -> list[dict[str, Any]]:
  """One row per power of Delta."""
  rows = []
  for k in range(series.max_order + 1):
    rows.append({
        "phi0": series.phi0,
        "k": k,
        "lambda_k": float(series.lambda_k[k]),
        "a_k": float(series.a_k[k]),
        "b_k": float(series.b_k[k]),
        "f_k": float(series.f_k[k]),
        "da_k": float(series.da_k[k]),
        "db_k": float(series.db_k[k]),
        "df_k": float(series.df_k[k]),
        "fit_residual": series.fit_residual,
        "case": case,
    })
  return rows
