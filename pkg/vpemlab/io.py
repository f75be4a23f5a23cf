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

"""CSV output of bias records, contour surfaces and coefficient tables."""
from __future__ import annotations

import pathlib
import re
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd

from vpemlab import progress

RECORD_SCHEMA_VERSION = 1
FLOAT_FORMAT = '%.17g'
RECORD_COLUMNS = (
    'phi',
    'delta',
    'lambda_dominant',
    'n',
    'phi0',
    'bias_sq_exact',
    'mse_formula',
    'est_sq_sampled',
    'seed',
    'series',
    'dominance',
)

_VERSION_LINE = re.compile(r'^# schema_version=(\d+)$')


def _prepare(path: pathlib.Path | str) -> pathlib.Path:
  path = pathlib.Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  return path


def write_frame(
    frame: pd.DataFrame,
    path: pathlib.Path | str,
    index: bool = False,
    show_progress: bool = False,
) -> pathlib.Path:
  """Writes ``frame`` with a leading schema-version comment line."""
  path = _prepare(path)
  with open(path, 'w', encoding='utf-8', newline='') as f:
    f.write(f'# schema_version={RECORD_SCHEMA_VERSION}\n')
    frame.to_csv(f, index=index, float_format=FLOAT_FORMAT, lineterminator='\n')
  if show_progress:
    progress.print_save_complete(len(frame), str(path))
  return path


def write_records(
    records: Sequence[Mapping[str, Any]],
    path: pathlib.Path | str,
    show_progress: bool = False,
) -> pathlib.Path:
  """Writes bias records in the fixed column order.

  Integer columns that may be missing (``seed``) are written as nullable
  integers so present values keep every digit.
  """
  frame = pd.DataFrame.from_records(list(records), columns=list(RECORD_COLUMNS))
  frame['n'] = frame['n'].astype('int64')
  frame['seed'] = frame['seed'].astype('UInt64')
  return write_frame(frame, path, show_progress=show_progress)


def write_matrix(
    values: np.ndarray,
    row_labels: Sequence[float],
    column_labels: Sequence[float],
    path: pathlib.Path | str,
    row_name: str = 'delta',
    show_progress: bool = False,
) -> pathlib.Path:
  """Writes a matrix whose header holds the column coordinates."""
  columns = [FLOAT_FORMAT % c for c in column_labels]
  frame = pd.DataFrame(
      np.asarray(values, dtype=float),
      index=pd.Index(list(row_labels), name=row_name),
      columns=columns,
  )
  return write_frame(frame, path, index=True, show_progress=show_progress)


def read_schema_version(path: pathlib.Path | str) -> int:
  """Schema version from the first line of a file written here.

  Raises:
    IOError: If the file lacks the version line.
  """
  with open(path, 'r', encoding='utf-8') as f:
    first = f.readline().strip()
  match = _VERSION_LINE.match(first)
  if not match:
    raise IOError(f'No schema_version line in {path}')
  return int(match.group(1))


def read_records(path: pathlib.Path | str) -> pd.DataFrame:
  """Reads a file back, skipping the version line.

  Raises:
    IOError: If the file does not exist or has an unknown schema version.
  """
  path = pathlib.Path(path)
  if not path.exists():
    raise IOError(f'File does not exist: {path}')
  version = read_schema_version(path)
  if version != RECORD_SCHEMA_VERSION:
    raise IOError(f'Unsupported schema_version {version} in {path}')
  return pd.read_csv(path, skiprows=1, dtype={'seed': 'UInt64'})
