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

"""Runs configurations and writes their CSV outputs.

Grid points are evaluated on a thread pool and written back by index, so
the output order and the derived sampling seeds do not depend on
scheduling.
"""

from __future__ import annotations

import collections
import concurrent.futures
import dataclasses
import pathlib
import time
from typing import Any, Callable, Sequence, TypeVar

from absl import logging
import numpy as np
import pandas as pd

from vpemlab import config as config_lib
from vpemlab import data_lib
from vpemlab import estimation
from vpemlab import io
from vpemlab import progress
from vpemlab import refpoint
from vpemlab import scenario as scenario_lib
from vpemlab import vpem
from vpemlab.core import types

__all__ = [
    "GridPoint",
    "resolve_deltas",
    "resolve_reference",
    "evaluate_records",
    "run_scenario",
    "reproduce_figure",
    "run_refpoint",
    "run_coeffs",
]

_T = TypeVar("_T")


@dataclasses.dataclass(frozen=True, slots=True)
class GridPoint:
  series: str
  n: int
  delta: float
  phi0: float
  phi: float


def _map_indexed(
    fn: Callable[[int], _T],
    count: int,
    threads: int,
    bar: Any | None = None,
) -> list[_T]:
  """fn(i) for i < count, results in index order."""
  results: list[_T | None] = [None] * count
  if threads <= 1:
    for i in range(count):
      results[i] = fn(i)
      if bar is not None:
        bar.update(1)
    return results
  with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
    future_to_index = {executor.submit(fn, i): i for i in range(count)}
    for future in concurrent.futures.as_completed(future_to_index):
      results[future_to_index[future]] = future.result()
      if bar is not None:
        bar.update(1)
  return results


def resolve_deltas(
    config: config_lib.ScenarioConfig, scenario: scenario_lib.Scenario
) -> list[float]:
  """Noise strengths of a configuration, inverting lambda targets."""
  if config.noise.deltas is not None:
    return [float(d) for d in config.noise.deltas]
  return [scenario.delta_for_lambda(lam) for lam in config.noise.lambda_targets]


def resolve_reference(
    scenario: scenario_lib.Scenario,
    reference: config_lib.ReferenceConfig,
    n: int,
    delta: float,
    max_delta: float,
) -> float:
  """phi0 of one series at order ``n`` and strength ``delta``."""
  if isinstance(
      reference, (config_lib.FixedReference, config_lib.BadReference)
  ):
    return reference.phi0
  if isinstance(reference, config_lib.OptimalReference):
    delta0 = delta if reference.delta0 is None else reference.delta0
    return refpoint.optimal_reference(scenario, delta0, n)
  high = max_delta if reference.high is None else reference.high
  search = refpoint.ReferenceSearch(refpoint.Uniform(reference.low, high))
  return refpoint.averaged_optimal_reference(scenario, n, search)


def _reference_table(
    config: config_lib.ScenarioConfig,
    scenario: scenario_lib.Scenario,
    deltas: Sequence[float],
) -> dict[tuple[str, int, float], float]:
  max_delta = max(deltas)
  table = {}
  cache: dict[tuple[str, int], float] = {}
  for series in config.series:
    for n in series.orders:
      for delta in deltas:
        if isinstance(series.reference, config_lib.AveragedOptimalReference):
          key = (series.label, n)
          if key not in cache:
            cache[key] = resolve_reference(
                scenario, series.reference, n, delta, max_delta
            )
          table[(series.label, n, delta)] = cache[key]
        else:
          table[(series.label, n, delta)] = resolve_reference(
              scenario, series.reference, n, delta, max_delta
          )
  return table


def _grid_points(
    config: config_lib.ScenarioConfig,
    deltas: Sequence[float],
    references: dict[tuple[str, int, float], float],
) -> list[GridPoint]:
  points = []
  for series in config.series:
    for delta in deltas:
      for n in series.orders:
        phi0 = references[(series.label, n, delta)]
        for phi in config.phi_grid.values():
          points.append(GridPoint(series.label, n, delta, phi0, float(phi)))
  return points


def _mark_dominance(records: list[dict[str, Any]]) -> None:
  """Labels each (phi, delta) group by whether the noisy bias is smallest.

  Groups holding only one estimator kind are left blank.
  """
  groups: dict[tuple[float, float], list[dict[str, Any]]] = (
      collections.defaultdict(list)
  )
  for record in records:
    groups[(record["phi"], record["delta"])].append(record)
  for group in groups.values():
    kinds = {record["n"] == 1 for record in group}
    if len(kinds) < 2:
      continue
    best = min(group, key=lambda r: r["bias_sq_exact"])
    label = "error" if best["n"] == 1 else "mitigated"
    for record in group:
      record["dominance"] = label


def evaluate_records(
    config: config_lib.ScenarioConfig,
    options: config_lib.RunOptions,
) -> list[dict[str, Any]]:
  """Bias records of every grid point and seed, in grid order."""
  scenario = config_lib.build_scenario(config, options.cutoff)
  deltas = resolve_deltas(config, scenario)
  references = _reference_table(config, scenario, deltas)
  points = _grid_points(config, deltas, references)
  seeds = (options.seed,) if options.seed is not None else config.seeds
  key = scenario.scenario_key

  def evaluate(i: int) -> list[dict[str, Any]]:
    point = points[i]
    kind = (
        types.EstimatorKind.ERROR
        if point.n == 1
        else types.EstimatorKind.MITIGATED
    )
    report = estimation.mse(
        kind,
        scenario,
        point.phi,
        point.phi0,
        point.delta,
        point.n,
        config.n_samples,
    )
    if not seeds:
      return [data_lib.report_to_record(report, series=point.series)]
    rows = []
    for seed in seeds:
      derived = vpem.derive_seed(seed, key, i)
      sampled = estimation.sampled_estimate(
          kind,
          scenario,
          point.phi,
          point.phi0,
          point.delta,
          point.n,
          config.n_samples,
          derived,
      )
      rows.append(
          data_lib.report_to_record(
              dataclasses.replace(report, sampled_estimate=sampled),
              seed=derived,
              series=point.series,
          )
      )
    return rows

  bar = progress.create_grid_progress_bar(
      len(points),
      scenario.scenario_id,
      "bias",
      disable=not options.show_progress,
  )
  try:
    nested = _map_indexed(evaluate, len(points), options.threads, bar)
  finally:
    bar.close()
  records = [row for rows in nested for row in rows]
  _mark_dominance(records)
  return records


def _run_contour(
    config: config_lib.ScenarioConfig,
    options: config_lib.RunOptions,
) -> list[pathlib.Path]:
  scenario = config_lib.build_scenario(config, options.cutoff)
  contour = config.contour
  deltas = np.linspace(
      0.0, max(resolve_deltas(config, scenario)), contour.delta_count
  )
  phi0s = np.linspace(contour.phi0_min, contour.phi0_max, contour.phi0_count)
  domain = (contour.phi0_min, contour.phi0_max)
  paths = []
  for n in config.orders:
    logging.info("Contour surface n=%d for %s", n, scenario.scenario_id)
    surface = refpoint.contour_surface(
        scenario, phi0s, deltas, n, threads=options.threads
    )
    with np.errstate(divide="ignore"):
      logged = np.log10(surface.values)
    paths.append(
        io.write_matrix(
            logged,
            deltas,
            phi0s,
            options.out_dir / f"{config.name}-n{n}.csv",
            show_progress=options.show_progress,
        )
    )
    curve = refpoint.optimal_reference_curve(
        scenario, deltas, n, domain=domain, threads=options.threads
    )
    objective = [
        float(refpoint.objective_values(scenario, [p], d, n)[0])
        for p, d in zip(curve, deltas)
    ]
    frame = pd.DataFrame(
        {"delta": deltas, "phi0_opt": curve, "objective": objective}
    )
    paths.append(
        io.write_frame(
            frame,
            options.out_dir / f"{config.name}-n{n}-optimum.csv",
            show_progress=options.show_progress,
        )
    )
  return paths


def run_scenario(
    config: config_lib.ScenarioConfig,
    options: config_lib.RunOptions = config_lib.RunOptions(),
) -> list[pathlib.Path]:
  """Evaluates a configuration and writes its CSV files.

  Returns:
    Paths of the files written.
  """
  start = time.perf_counter()
  if config.contour is not None:
    paths = _run_contour(config, options)
  else:
    records = evaluate_records(config, options)
    paths = [
        io.write_records(
            records,
            options.out_dir / f"{config.name}.csv",
            show_progress=options.show_progress,
        )
    ]
  if options.show_progress:
    progress.print_run_summary(len(paths), time.perf_counter() - start)
  return paths


def reproduce_figure(
    name: types.FigureName | str,
    options: config_lib.RunOptions = config_lib.RunOptions(),
) -> list[pathlib.Path]:
  """Writes a figure's canonical configuration, then runs it."""
  config = config_lib.figure_config(name)
  options.out_dir.mkdir(parents=True, exist_ok=True)
  config_path = options.out_dir / f"{config.name}.yaml"
  config_path.write_text(config_lib.serialize_config(config), encoding="utf-8")
  return [config_path] + run_scenario(config, options)


def run_refpoint(
    config: config_lib.ScenarioConfig,
    options: config_lib.RunOptions = config_lib.RunOptions(),
) -> list[pathlib.Path]:
  """Writes the reference point of every series, order and strength."""
  scenario = config_lib.build_scenario(config, options.cutoff)
  deltas = resolve_deltas(config, scenario)
  references = _reference_table(config, scenario, deltas)
  rows = []
  for (label, n, delta), phi0 in references.items():
    rows.append({
        "series": label,
        "n": n,
        "delta": delta,
        "lambda_dominant": scenario.dominant_eigenvalue(delta),
        "phi0": phi0,
        "objective": float(
            refpoint.objective_values(scenario, [phi0], delta, n)[0]
        ),
    })
  path = io.write_frame(
      pd.DataFrame(rows),
      options.out_dir / f"{config.name}-refpoint.csv",
      show_progress=options.show_progress,
  )
  return [path]


def run_coeffs(
    config: config_lib.ScenarioConfig,
    options: config_lib.RunOptions = config_lib.RunOptions(),
    max_order: int = 3,
) -> list[pathlib.Path]:
  """Writes the fitted Delta-series at each distinct reference point."""
  scenario = config_lib.build_scenario(config, options.cutoff)
  deltas = resolve_deltas(config, scenario)
  references = _reference_table(config, scenario, deltas)
  orders = sorted({n for series in config.series for n in series.orders} - {1})
  rows = []
  for phi0 in sorted(set(references.values())):
    series = estimation.series_coefficients(
        scenario, phi0, max_order=max_order, mitigation_orders=orders
    )
    case = estimation.classify_case(series).value
    rows.extend(data_lib.series_to_rows(series, case))
  path = io.write_frame(
      pd.DataFrame(rows),
      options.out_dir / f"{config.name}-coeffs.csv",
      show_progress=options.show_progress,
  )
  return [path]
