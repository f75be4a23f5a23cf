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

"""Reference-point selection.

The zeroth-order bias of an estimator at reference point phi0 is

  (x(phi0) - x_id(phi0)) / y_id(phi0),

where x is the noisy (n = 1) or mitigated (n >= 2) intercept. Choosing phi0
to make it vanish leaves a bias linear in phi. The search minimises its
square for a known noise strength, or its average over a uniform prior on
the strength.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math
from typing import Callable, Sequence

from absl import logging
import numpy as np

from vpemlab import scenario as scenario_lib
from vpemlab.core import debug_utils
from vpemlab.core import exceptions

__all__ = [
    "PointMass",
    "Uniform",
    "Prior",
    "ReferenceSearch",
    "ReferenceResult",
    "ContourSurface",
    "zeroth_order_objective",
    "objective_values",
    "search_reference",
    "optimal_reference",
    "averaged_optimal_reference",
    "optimal_reference_curve",
    "contour_surface",
]

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2
SENSITIVITY_FLOOR = 1e-6
RELATIVE_SLOPE_FLOOR = 0.05
PRIOR_NODES = 41
MIN_GRID_POINTS = 16
_TIE_ABS = 1e-15
_TIE_REL = 1e-12


@dataclasses.dataclass(frozen=True, slots=True)
class PointMass:
  """Known noise strength."""

  delta: float

  def __post_init__(self):
    if self.delta < 0:
      raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclasses.dataclass(frozen=True, slots=True)
class Uniform:
  """Uniform prior on [low, high]."""

  low: float
  high: float

  def __post_init__(self):
    if not 0 <= self.low < self.high:
      raise ValueError(
          f"uniform prior needs 0 <= low < high, got [{self.low}, {self.high}]"
      )

  def nodes(self, count: int = PRIOR_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [low, high] with weights summing to 1."""
    t, w = np.polynomial.legendre.leggauss(count)
    half = 0.5 * (self.high - self.low)
    return self.low + half * (t + 1.0), 0.5 * w


Prior = PointMass | Uniform


@dataclasses.dataclass(frozen=True, slots=True)
class ReferenceSearch:
  """Search settings.

  Attributes:
    prior: Noise-strength prior the objective is averaged over.
    domain: Closed phi0 interval; None uses the scenario's default.
    grid_points: Coarse scan size, at least 16.
    refine_iters: Golden-section iterations around the best grid point.
    slope_fraction: Points whose |y_id| falls below this fraction of the
      largest |y_id| on the grid are excluded from the search.
  """

  prior: Prior
  domain: tuple[float, float] | None = None
  grid_points: int = 64
  refine_iters: int = 60
  slope_fraction: float = RELATIVE_SLOPE_FLOOR

  def __post_init__(self):
    if not 0 <= self.slope_fraction < 1:
      raise ValueError(
          f"slope_fraction must be in [0, 1), got {self.slope_fraction}"
      )
    if self.grid_points < MIN_GRID_POINTS:
      raise ValueError(
          f"grid_points must be >= {MIN_GRID_POINTS}, got {self.grid_points}"
      )
    if self.domain is not None and not self.domain[0] < self.domain[1]:
      raise ValueError(f"empty search domain {self.domain}")


@dataclasses.dataclass(frozen=True, slots=True)
class ReferenceResult:
  phi0: float
  objective: float
  masked: int


@dataclasses.dataclass(frozen=True, eq=False)
class ContourSurface:
  """Objective values on a (delta, phi0) grid.

  Rows follow ``delta_grid`` and columns ``phi0_grid``. ``mask`` marks
  cells where the ideal slope is degenerate; their values are NaN.
  """

  phi0_grid: np.ndarray
  delta_grid: np.ndarray
  values: np.ndarray
  mask: np.ndarray
  n: int


def objective_values(
    scenario: scenario_lib.Scenario,
    phi0s: np.ndarray | Sequence[float],
    delta: float,
    n: int,
) -> np.ndarray:
  """Squared zeroth-order bias over an array of phi0; NaN where masked."""
  phi0s = np.asarray(phi0s, dtype=float)
  x_id = scenario.ideal_parity(phi0s)
  y_id = scenario.ideal_slope(phi0s)
  x = scenario.parity(phi0s, delta, n)
  masked = np.abs(y_id) <= SENSITIVITY_FLOOR
  safe_y = np.where(masked, 1.0, y_id)
  return np.where(masked, np.nan, ((x - x_id) / safe_y) ** 2)


def zeroth_order_objective(
    scenario: scenario_lib.Scenario, phi0: float, delta: float, n: int
) -> float:
  """[(x(phi0) - x_id(phi0)) / y_id(phi0)]^2.

  Raises:
    DegenerateSensitivityError: If |y_id(phi0)| <= 1e-6.
  """
  value = float(objective_values(scenario, [phi0], delta, n)[0])
  if math.isnan(value):
    raise exceptions.DegenerateSensitivityError(
        f"ideal slope vanishes at phi0={phi0:.6g}"
    )
  return value


def _prior_objective(
    scenario: scenario_lib.Scenario, prior: Prior, n: int
) -> Callable[[np.ndarray], np.ndarray]:
  if isinstance(prior, PointMass):
    return lambda phi0s: objective_values(scenario, phi0s, prior.delta, n)
  deltas, weights = prior.nodes()

  def averaged(phi0s: np.ndarray) -> np.ndarray:
    total = np.zeros(np.shape(phi0s))
    for delta, weight in zip(deltas, weights):
      total = total + weight * objective_values(scenario, phi0s, delta, n)
    return total

  return averaged


def _grid(domain: tuple[float, float], points: int) -> np.ndarray:
  lo, hi = domain
  grid = np.linspace(lo, hi, points)
  if lo < 0 < hi:
    grid = np.union1d(grid, [0.0])
  return grid


def _golden_section(
    fn: Callable[[float], float], a: float, b: float, iters: int
) -> float:
  """Minimiser of a unimodal ``fn`` on [a, b]."""
  h = b - a
  c = a + INV_PHI_SQUARE * h
  d = a + INV_PHI * h
  fc, fd = fn(c), fn(d)
  for _ in range(iters):
    if fc < fd:
      b, d, fd = d, c, fc
      h = INV_PHI * h
      c = a + INV_PHI_SQUARE * h
      fc = fn(c)
    else:
      a, c, fc = c, d, fd
      h = INV_PHI * h
      d = a + INV_PHI * h
      fd = fn(d)
  return 0.5 * (a + b)


@debug_utils.debug_log_calls
def search_reference(
    scenario: scenario_lib.Scenario,
    n: int,
    search: ReferenceSearch,
) -> ReferenceResult:
  """Coarse scan then golden-section refinement around the best cell.

  Points where |y_id| is below ``search.slope_fraction`` of its largest
  value on the grid are masked, which keeps the result on a steep branch of
  the ideal parity. Ties on the grid go to the smallest |phi0|. The refined
  point replaces the grid point only if it is strictly better, so the
  result never exceeds any grid value.

  Raises:
    SearchError: If every grid point is masked.
  """
  domain = search.domain or scenario.reference_domain()
  prior_objective = _prior_objective(scenario, search.prior, n)
  grid = _grid(domain, search.grid_points)
  slope_floor = search.slope_fraction * float(
      np.max(np.abs(scenario.ideal_slope(grid)))
  )

  def objective(phi0s: np.ndarray) -> np.ndarray:
    values = prior_objective(phi0s)
    flat = np.abs(scenario.ideal_slope(phi0s)) < slope_floor
    return np.where(flat, np.nan, values)

  values = objective(grid)
  valid = ~np.isnan(values)
  if not np.any(valid):
    raise exceptions.SearchError(
        f"no usable reference point in {domain} for {scenario.scenario_id}"
    )
  best = float(np.nanmin(values))
  ties = valid & (values <= best + _TIE_ABS + _TIE_REL * best)
  candidates = np.flatnonzero(ties)
  index = int(candidates[np.argmin(np.abs(grid[candidates]))])
  phi0, value = float(grid[index]), float(values[index])

  def scalar(x: float) -> float:
    v = float(objective(np.array([x]))[0])
    return math.inf if math.isnan(v) else v

  lo = grid[max(index - 1, 0)]
  hi = grid[min(index + 1, grid.size - 1)]
  refined = _golden_section(scalar, lo, hi, search.refine_iters)
  refined_value = scalar(refined)
  if refined_value < value:
    phi0, value = refined, refined_value
  masked = int(np.count_nonzero(~valid))
  if masked:
    logging.info("Masked %d degenerate reference points", masked)
  return ReferenceResult(phi0, value, masked)


def optimal_reference(
    scenario: scenario_lib.Scenario,
    delta: float,
    n: int,
    search: ReferenceSearch | None = None,
) -> float:
  """arg min over phi0 of the squared zeroth-order bias at ``delta``."""
  if search is None:
    search = ReferenceSearch(PointMass(delta))
  elif not isinstance(search.prior, PointMass):
    raise ValueError("optimal_reference needs a point-mass prior")
  return search_reference(scenario, n, search).phi0


def averaged_optimal_reference(
    scenario: scenario_lib.Scenario, n: int, search: ReferenceSearch
) -> float:
  """arg min over phi0 of the prior-averaged squared zeroth-order bias."""
  if not isinstance(search.prior, Uniform):
    raise ValueError("averaged_optimal_reference needs a uniform prior")
  return search_reference(scenario, n, search).phi0


def _map_rows(
    fn: Callable[[int], np.ndarray], count: int, threads: int
) -> list[np.ndarray]:
  results: list[np.ndarray | None] = [None] * count
  if threads <= 1:
    for i in range(count):
      results[i] = fn(i)
    return results
  with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
    future_to_index = {executor.submit(fn, i): i for i in range(count)}
    for future in concurrent.futures.as_completed(future_to_index):
      results[future_to_index[future]] = future.result()
  return results


def contour_surface(
    scenario: scenario_lib.Scenario,
    phi0_grid: Sequence[float],
    delta_grid: Sequence[float],
    n: int,
    threads: int = 1,
) -> ContourSurface:
  phi0s = np.asarray(phi0_grid, dtype=float)
  deltas = np.asarray(delta_grid, dtype=float)
  rows = _map_rows(
      lambda i: objective_values(scenario, phi0s, deltas[i], n),
      deltas.size,
      threads,
  )
  values = np.vstack(rows)
  return ContourSurface(phi0s, deltas, values, np.isnan(values), n)


def optimal_reference_curve(
    scenario: scenario_lib.Scenario,
    delta_grid: Sequence[float],
    n: int,
    domain: tuple[float, float] | None = None,
    threads: int = 1,
) -> np.ndarray:
  """Optimal phi0 for each strength in ``delta_grid``."""
  deltas = np.asarray(delta_grid, dtype=float)

  def solve(i: int) -> np.ndarray:
    search = ReferenceSearch(PointMass(float(deltas[i])), domain=domain)
    return np.array([search_reference(scenario, n, search).phi0])

  return np.concatenate(_map_rows(solve, deltas.size, threads))
