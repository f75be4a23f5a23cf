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

"""Scenario configuration files.

A configuration is a YAML document validated against ``ScenarioConfig``.
Variants are selected by a ``kind`` tag:

  schema_version: 1
  name: noon-phase
  probe: {kind: noon, n_photons: 5}
  noise: {kind: phase_diffusion, lambda_targets: [0.9, 0.85, 0.8]}
  orders: [1, 2, 3]
  phi_grid: {min: -0.01, max: 0.01, count: 21}
  reference: {kind: optimal}
  n_samples: 1000000000
  seeds: [0]

The canonical configurations of the six result figures are embedded below.
"""

from __future__ import annotations

import dataclasses
import pathlib
from typing import Annotated, Any, Literal

import numpy as np
import pydantic
import yaml

from vpemlab import scenario as scenario_lib
from vpemlab.core import exceptions
from vpemlab.core import types

__all__ = [
    "SCHEMA_VERSION",
    "NoonProbeConfig",
    "CoherentSqueezedProbeConfig",
    "NoiseConfig",
    "PhiGrid",
    "FixedReference",
    "OptimalReference",
    "AveragedOptimalReference",
    "BadReference",
    "SeriesConfig",
    "ContourConfig",
    "ScenarioConfig",
    "RunOptions",
    "parse_config",
    "load_config",
    "serialize_config",
    "figure_config",
    "build_scenario",
]

SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 10_000_000


@dataclasses.dataclass(frozen=True)
class NoonProbeConfig:
  kind: Literal["noon"] = "noon"
  n_photons: int = 5


@dataclasses.dataclass(frozen=True)
class CoherentSqueezedProbeConfig:
  kind: Literal["coherent_squeezed"] = "coherent_squeezed"
  mean_coherent: float = 2.5
  mean_squeezed: float = 2.5


ProbeConfig = Annotated[
    NoonProbeConfig | CoherentSqueezedProbeConfig,
    pydantic.Field(discriminator="kind"),
]


@dataclasses.dataclass(frozen=True)
class NoiseConfig:
  """Noise type and strengths, given directly or as dominant eigenvalues."""

  kind: types.NoiseType
  deltas: tuple[float, ...] | None = None
  lambda_targets: tuple[float, ...] | None = None

  def __post_init__(self):
    if (self.deltas is None) == (self.lambda_targets is None):
      raise ValueError("give exactly one of deltas and lambda_targets")
    values = self.deltas if self.deltas is not None else self.lambda_targets
    if not values:
      raise ValueError("noise strengths must not be empty")
    if self.deltas is not None and min(self.deltas) < 0:
      raise ValueError("deltas must be >= 0")
    if self.lambda_targets is not None and not all(
        0 < v <= 1 for v in self.lambda_targets
    ):
      raise ValueError("lambda_targets must lie in (0, 1]")


@dataclasses.dataclass(frozen=True)
class PhiGrid:
  min: float = -0.01
  max: float = 0.01
  count: int = 21
  exclude_zero: bool = False

  def __post_init__(self):
    if not self.min < self.max:
      raise ValueError(f"phi_grid needs min < max, got {self.min}, {self.max}")
    if self.count < 2:
      raise ValueError(f"phi_grid count must be >= 2, got {self.count}")

  def values(self) -> np.ndarray:
    grid = np.linspace(self.min, self.max, self.count)
    if self.exclude_zero:
      span = self.max - self.min
      grid = grid[np.abs(grid) > 1e-12 * span]
    return grid


@dataclasses.dataclass(frozen=True)
class FixedReference:
  kind: Literal["fixed"] = "fixed"
  phi0: float = 0.0


@dataclasses.dataclass(frozen=True)
class OptimalReference:
  """Minimiser at ``delta0``, or at each row's strength when unset."""

  kind: Literal["optimal"] = "optimal"
  delta0: float | None = None


@dataclasses.dataclass(frozen=True)
class AveragedOptimalReference:
  """Minimiser of the objective averaged over a uniform strength prior.

  ``high`` defaults to the largest strength of the configuration.
  """

  kind: Literal["averaged_optimal"] = "averaged_optimal"
  low: float = 0.0
  high: float | None = None


@dataclasses.dataclass(frozen=True)
class BadReference:
  """A deliberately non-optimal fixed reference point."""

  kind: Literal["bad"] = "bad"
  phi0: float = 0.0


ReferenceConfig = Annotated[
    FixedReference
    | OptimalReference
    | AveragedOptimalReference
    | BadReference,
    pydantic.Field(discriminator="kind"),
]


@dataclasses.dataclass(frozen=True)
class SeriesConfig:
  """Additional estimator series with their own reference point."""

  label: str
  orders: tuple[int, ...]
  reference: ReferenceConfig

  def __post_init__(self):
    _check_orders(self.orders)


@dataclasses.dataclass(frozen=True)
class ContourConfig:
  """Reference-point contour grid; strength rows span [0, max strength]."""

  phi0_min: float = 0.0
  phi0_max: float = 0.5
  phi0_count: int = 101
  delta_count: int = 41

  def __post_init__(self):
    if not self.phi0_min < self.phi0_max:
      raise ValueError("contour needs phi0_min < phi0_max")
    if self.phi0_count < 2 or self.delta_count < 2:
      raise ValueError("contour grids need at least 2 points")


def _check_orders(orders: tuple[int, ...]) -> None:
  if not orders:
    raise ValueError("orders must not be empty")
  if min(orders) < 1:
    raise ValueError(f"mitigation orders must be >= 1, got {orders}")


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
  """One experiment: a scenario, its grids and what to emit.

  Attributes:
    name: Output file stem.
    probe: Interferometer input.
    noise: Noise type and strengths.
    orders: Mitigation orders of the primary series; 1 is unmitigated.
    phi_grid: True phases.
    reference: Reference point of the primary series.
    schema_version: Configuration schema version.
    extra_series: Further series, e.g. at a bad reference point.
    cutoff: Photons per mode; None uses the probe default.
    method: Construction of the noisy probe.
    n_samples: Total samples N_s per estimate.
    seeds: Base seeds of the sampled estimates; empty skips sampling.
    contour: Emit contour surfaces instead of bias records.
  """

  name: str
  probe: ProbeConfig
  noise: NoiseConfig
  orders: tuple[int, ...] = (1,)
  phi_grid: PhiGrid = PhiGrid()
  reference: ReferenceConfig = FixedReference()
  schema_version: int = SCHEMA_VERSION
  extra_series: tuple[SeriesConfig, ...] = ()
  cutoff: int | None = None
  method: types.ChannelMethod = types.ChannelMethod.AUTO
  n_samples: int = DEFAULT_SAMPLES
  seeds: tuple[int, ...] = ()
  contour: ContourConfig | None = None

  def __post_init__(self):
    if self.schema_version != SCHEMA_VERSION:
      raise ValueError(
          f"unsupported schema_version {self.schema_version}; expected"
          f" {SCHEMA_VERSION}"
      )
    _check_orders(self.orders)
    if self.n_samples < 1:
      raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
    if isinstance(self.probe, NoonProbeConfig) and self.cutoff is not None:
      if self.probe.n_photons > self.cutoff:
        raise ValueError(
            f"N={self.probe.n_photons} exceeds cutoff {self.cutoff}"
        )

  @property
  def series(self) -> tuple[SeriesConfig, ...]:
    primary = SeriesConfig("primary", self.orders, self.reference)
    return (primary,) + self.extra_series


@dataclasses.dataclass(frozen=True)
class RunOptions:
  """Runtime knobs that do not change what is computed.

  ``seed`` replaces the configuration's seeds and ``cutoff`` its cutoff.
  """

  seed: int | None = None
  out_dir: pathlib.Path = pathlib.Path("vpem_output")
  cutoff: int | None = None
  threads: int = 1
  show_progress: bool = True


_ADAPTER = pydantic.TypeAdapter(ScenarioConfig)


def _field_errors(error: pydantic.ValidationError) -> list[tuple[str, str]]:
  return [
      (".".join(str(part) for part in item["loc"]), item["msg"])
      for item in error.errors()
  ]


def parse_config(text: str) -> ScenarioConfig:
  """Parses and validates a YAML configuration.

  Raises:
    ConfigError: On YAML syntax errors or schema violations, with the
      offending fields in ``field_errors``.
  """
  try:
    data = yaml.safe_load(text)
  except yaml.YAMLError as e:
    raise exceptions.ConfigError(f"Configuration is not valid YAML: {e}") from e
  if not isinstance(data, dict):
    raise exceptions.ConfigError("Configuration must be a YAML mapping")
  if "schema_version" not in data:
    raise exceptions.ConfigError(
        "Configuration lacks schema_version",
        field_errors=[("schema_version", "field required")],
    )
  try:
    return _ADAPTER.validate_python(data)
  except pydantic.ValidationError as e:
    raise exceptions.ConfigError(
        f"Invalid configuration: {e.error_count()} error(s)",
        field_errors=_field_errors(e),
    ) from e
  except ValueError as e:
    raise exceptions.ConfigError(f"Invalid configuration: {e}") from e


def load_config(path: str | pathlib.Path) -> ScenarioConfig:
  try:
    text = pathlib.Path(path).read_text(encoding="utf-8")
  except OSError as e:
    raise exceptions.ConfigError(f"Cannot read configuration {path}") from e
  return parse_config(text)


def serialize_config(config: ScenarioConfig) -> str:
  data: dict[str, Any] = _ADAPTER.dump_python(config, mode="json")
  ordered = {"schema_version": data.pop("schema_version"), **data}
  return yaml.safe_dump(ordered, sort_keys=False)


def build_scenario(
    config: ScenarioConfig, cutoff: int | None = None
) -> scenario_lib.Scenario:
  """Scenario for ``config``; ``cutoff`` overrides the configured one."""
  if isinstance(config.probe, NoonProbeConfig):
    probe = scenario_lib.NoonProbe(config.probe.n_photons)
  else:
    probe = scenario_lib.CoherentSqueezedProbe(
        config.probe.mean_coherent, config.probe.mean_squeezed
    )
  return scenario_lib.Scenario(
      probe,
      config.noise.kind,
      cutoff=cutoff if cutoff is not None else config.cutoff,
      method=config.method,
  )


_NOON_FIGURE = """\
schema_version: 1
name: {name}
probe: {{kind: noon, n_photons: 5}}
noise: {{kind: {noise}, lambda_targets: [0.9, 0.85, 0.8]}}
orders: [1, 2, 3]
phi_grid: {{min: -0.01, max: 0.01, count: 21}}
reference: {{kind: optimal}}
extra_series:
  - label: bad-reference
    orders: [2, 3]
    reference: {{kind: bad, phi0: 0.2617993877991494}}
n_samples: 1000000000
seeds: [0]
"""

_CS_FIGURE = """\
schema_version: 1
name: {name}
probe: {{kind: coherent_squeezed, mean_coherent: 2.5, mean_squeezed: 2.5}}
noise: {{kind: {noise}, lambda_targets: [0.9, 0.85, 0.8]}}
orders: [1, 2, 3]
phi_grid: {{min: -0.01, max: 0.01, count: 21}}
reference: {{kind: averaged_optimal, low: 0.0}}
{extra}n_samples: 1000000000
seeds: [0]
"""

_CS_GAUSSIAN_EXTRA = """\
extra_series:
  - label: bad-reference
    orders: [2, 3]
    reference: {kind: bad, phi0: 0.10471975511965977}
"""

_CONTOUR_FIGURE = """\
schema_version: 1
name: {name}
probe: {{kind: coherent_squeezed, mean_coherent: 2.5, mean_squeezed: 2.5}}
noise: {{kind: {noise}, lambda_targets: [0.8]}}
orders: [1, 2, 3]
contour: {{phi0_min: 0.0, phi0_max: 0.5, phi0_count: 101, delta_count: 41}}
"""

_FIGURES: dict[types.FigureName, str] = {
    types.FigureName.NOON_PHASE: _NOON_FIGURE.format(
        name="noon-phase", noise="phase_diffusion"
    ),
    types.FigureName.NOON_LOSS: _NOON_FIGURE.format(
        name="noon-loss", noise="photon_loss"
    ),
    types.FigureName.CS_LOSS: _CS_FIGURE.format(
        name="cs-loss", noise="photon_loss", extra=""
    ),
    types.FigureName.CS_GAUSSIAN: _CS_FIGURE.format(
        name="cs-gaussian", noise="additive_gaussian", extra=_CS_GAUSSIAN_EXTRA
    ),
    types.FigureName.CONTOUR_LOSS: _CONTOUR_FIGURE.format(
        name="contour-loss", noise="photon_loss"
    ),
    types.FigureName.CONTOUR_GAUSSIAN: _CONTOUR_FIGURE.format(
        name="contour-gaussian", noise="additive_gaussian"
    ),
}


def figure_config(name: types.FigureName | str) -> ScenarioConfig:
  """Canonical configuration of a result figure.

  Raises:
    ValueError: For an unknown figure name.
  """
  figure = types.FigureName(name)
  return parse_config(_FIGURES[figure])
