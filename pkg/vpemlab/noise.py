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

"""Noise channels acting on truncated Fock-space states.

Three channels are supported: phase diffusion, photon loss and additive
Gaussian displacement noise. Each has a general numeric implementation.
Where a closed form exists it is provided alongside and serves as an oracle
for the numeric version.

Conventions:
  * Phase diffusion convolves the encoding phase with a zero-mean Gaussian
    of variance ``delta``.
  * Photon loss sends a -> sqrt(1 - delta) a + sqrt(delta) e with a vacuum
    environment e.
  * Additive Gaussian noise displaces by beta = x + i p with x and p drawn
    from zero-mean Gaussians of standard deviations ``sigma_x`` and
    ``sigma_p``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Protocol, Sequence

from absl import logging
import numpy as np
from scipy import special

from vpemlab.core import debug_utils
from vpemlab.core import exceptions
from vpemlab.core import fock
from vpemlab.core import types

__all__ = [
    "PhaseDiffusion",
    "PhotonLoss",
    "AdditiveGaussian",
    "NoiseKind",
    "noise_from_type",
    "gaussian_widths",
    "phase_diffusion_quadrature",
    "phase_diffusion_noon_analytic",
    "photon_loss",
    "photon_loss_noon_analytic",
    "loss_squeezed_thermal_parameters",
    "loss_squeezed_thermal_analytic",
    "squeezed_thermal_components",
    "squeezed_thermal",
    "displacement_matrix",
    "additive_gaussian",
    "additive_gaussian_squeezed_thermal_analytic",
    "cs_ideal_parity",
    "delta_for_lambda",
]

DEFAULT_DIFFUSION_NODES = 61
MIN_DISPLACEMENT_NODES = 41
CONVERGENCE_TOL = 1e-8
THERMAL_SERIES_TOL = 1e-10
LAMBDA_TOL = 1e-4
DEFAULT_BRACKET = (0.0, 0.9)
DEFAULT_BISECTION_ITERS = 60


@dataclasses.dataclass(frozen=True, slots=True)
class PhaseDiffusion:
  """Gaussian random phase with variance ``delta`` during encoding."""

  delta: float = 0.0

  def __post_init__(self):
    if self.delta < 0:
      raise ValueError(f"phase diffusion strength must be >= 0: {self.delta}")

  @property
  def type(self) -> types.NoiseType:
    return types.NoiseType.PHASE_DIFFUSION

  def with_delta(self, delta: float) -> PhaseDiffusion:
    return dataclasses.replace(self, delta=delta)


@dataclasses.dataclass(frozen=True, slots=True)
class PhotonLoss:
  """Equal photon loss of probability ``delta`` on both modes."""

  delta: float = 0.0

  def __post_init__(self):
    if not 0.0 <= self.delta <= 1.0:
      raise ValueError(f"photon loss must lie in [0, 1]: {self.delta}")

  @property
  def type(self) -> types.NoiseType:
    return types.NoiseType.PHOTON_LOSS

  @property
  def transmissivity(self) -> float:
    return 1.0 - self.delta

  def with_delta(self, delta: float) -> PhotonLoss:
    return dataclasses.replace(self, delta=delta)


@dataclasses.dataclass(frozen=True, slots=True)
class AdditiveGaussian:
  """Random displacement on the probe's second mode.

  Attributes:
    delta: Noise strength; the mean thermal photon number it induces on a
      matched squeezed vacuum.
    r_match: Squeezing parameter the displacement widths are matched to.
  """

  delta: float = 0.0
  r_match: float = 0.0

  def __post_init__(self):
    if self.delta < 0:
      raise ValueError(f"additive noise strength must be >= 0: {self.delta}")

  @property
  def type(self) -> types.NoiseType:
    return types.NoiseType.ADDITIVE_GAUSSIAN

  @property
  def widths(self) -> tuple[float, float]:
    return gaussian_widths(self.delta, self.r_match)

  def with_delta(self, delta: float) -> AdditiveGaussian:
    return dataclasses.replace(self, delta=delta)


NoiseKind = PhaseDiffusion | PhotonLoss | AdditiveGaussian


def noise_from_type(
    noise_type: types.NoiseType, delta: float = 0.0, r_match: float = 0.0
) -> NoiseKind:
  if noise_type is types.NoiseType.PHASE_DIFFUSION:
    return PhaseDiffusion(delta)
  if noise_type is types.NoiseType.PHOTON_LOSS:
    return PhotonLoss(delta)
  if noise_type is types.NoiseType.ADDITIVE_GAUSSIAN:
    return AdditiveGaussian(delta, r_match)
  raise ValueError(f"Unknown noise type: {noise_type}")


def gaussian_widths(delta: float, r: float) -> tuple[float, float]:
  """Standard deviations (sigma_x, sigma_p) matched to squeezing ``r``."""
  base = math.sqrt(delta / 2)
  return base * math.exp(-r), base * math.exp(r)


def _max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
  return float(np.max(np.abs(a - b)))


# ---------------------------------------------------------------------------
# Phase diffusion.


def _diffusion_sum(
    state_builder: Callable[[float], fock.DensityMatrix],
    delta: float,
    nodes: int,
) -> tuple[fock.FockSpace, np.ndarray]:
  t, w = np.polynomial.hermite.hermgauss(nodes)
  shifts = math.sqrt(2 * delta) * t
  weights = w / math.sqrt(math.pi)
  space = None
  total = None
  for shift, weight in zip(shifts, weights):
    rho = state_builder(float(shift))
    space = rho.space
    term = weight * rho.matrix
    total = term if total is None else total + term
  return space, total


@debug_utils.debug_log_calls
def phase_diffusion_quadrature(
    state_builder: Callable[[float], fock.DensityMatrix],
    delta: float,
    nodes: int = DEFAULT_DIFFUSION_NODES,
    check_convergence: bool = True,
) -> fock.DensityMatrix:
  """Averages a phase-dependent state over a Gaussian random phase.

  Args:
    state_builder: Maps a phase offset x to the state with that extra phase.
    delta: Variance of the random phase.
    nodes: Odd number of Gauss-Hermite nodes, at least 3.
    check_convergence: Recompute with roughly twice the nodes and require
      agreement to 1e-8.

  Returns:
    The Gaussian mixture of ``state_builder`` outputs.

  Raises:
    QuadratureError: If doubling the nodes changes the result.
  """
  if delta < 0:
    raise ValueError(f"delta must be >= 0, got {delta}")
  if nodes < 3 or nodes % 2 == 0:
    raise ValueError(f"nodes must be odd and >= 3, got {nodes}")
  if delta == 0:
    return state_builder(0.0)
  space, total = _diffusion_sum(state_builder, delta, nodes)
  if check_convergence:
    _, refined = _diffusion_sum(state_builder, delta, 2 * nodes + 1)
    change = _max_abs_diff(total, refined)
    if change > CONVERGENCE_TOL:
      raise exceptions.QuadratureError(
          f"phase diffusion quadrature changed by {change:.3e} when the"
          f" node count was doubled from {nodes}"
      )
  return fock.DensityMatrix.from_array(space, total)


def noon_dephased_probe(
    space: fock.FockSpace, n_photons: int, delta: float
) -> fock.DensityMatrix:
  """Phase-diffused N00N probe before encoding."""
  lam = 0.5 * (1 + math.exp(-delta * n_photons**2 / 2))
  plus = fock.noon_state(space, n_photons).amplitudes
  minus = plus.copy()
  minus[space.index(0, n_photons)] *= -1
  return fock.mixture(
      space, [lam, 1 - lam], np.column_stack([plus, minus])
  )


def _encode(
    rho: fock.DensityMatrix, n_photons: int, theta: float
) -> fock.DensityMatrix:
  """U_BS Phi(theta + offset) applied to a N00N-family probe."""
  space = rho.space
  offset = fock.calibrate_convention(space, n_photons)
  unitary = fock.beam_splitter(space) * fock.phase_diagonal(
      space, theta + offset
  )
  return fock.apply_unitary(rho, unitary)


def phase_diffusion_noon_analytic(
    n_photons: int, theta: float, delta: float, space: fock.FockSpace
) -> fock.DensityMatrix:
  """Closed-form phase-diffused N00N output.

  Args:
    n_photons: N of the N00N probe.
    theta: Total phase phi + phi0; the calibration offset is added here so
      the ideal parity is sin(N theta).
    delta: Diffusion variance.
    space: Two-mode space with cutoff >= N.

  Returns:
    lam |psi_id><psi_id| + (1 - lam) |psi_perp><psi_perp| with
    lam = (1 + exp(-delta N^2 / 2)) / 2.
  """
  return _encode(noon_dephased_probe(space, n_photons, delta), n_photons, theta)


# ---------------------------------------------------------------------------
# Photon loss.


def _loss_coefficients(levels: int, delta: float, k: int) -> np.ndarray:
  """sqrt(C(m+k, k) eta^m delta^k) for output photon numbers m."""
  m = np.arange(levels - k)
  eta = 1.0 - delta
  return np.sqrt(special.comb(m + k, k) * eta**m * delta**k)


def _loss_on_axis(
    tensor: np.ndarray, delta: float, row_axis: int, col_axis: int
) -> np.ndarray:
  moved = np.moveaxis(tensor, (row_axis, col_axis), (0, 1))
  levels = moved.shape[0]
  out = np.zeros_like(moved)
  for k in range(levels):
    coef = _loss_coefficients(levels, delta, k)
    if not np.any(coef):
      continue
    block = moved[k:, k:]
    extra = (1,) * (block.ndim - 2)
    scale = coef.reshape((-1, 1) + extra) * coef.reshape((1, -1) + extra)
    out[: levels - k, : levels - k] += scale * block
  return np.moveaxis(out, (0, 1), (row_axis, col_axis))


@debug_utils.debug_log_calls
def photon_loss(
    rho: fock.DensityMatrix,
    delta: float,
    modes: Sequence[int] = (1, 2),
) -> fock.DensityMatrix:
  """Applies the pure-loss channel to each mode in ``modes``.

  Kraus operators K_k = sqrt(delta^k / k!) (1 - delta)^(n/2) a^k are kept
  for k <= cutoff, which is exact on the truncated space: the channel maps
  states with at most ``cutoff`` photons per mode into the same space and
  preserves their trace.
  """
  if not 0.0 <= delta <= 1.0:
    raise ValueError(f"photon loss must lie in [0, 1], got {delta}")
  space = rho.space
  if delta == 0:
    return rho
  num = space.num_modes
  tensor = np.array(rho.matrix).reshape(space.shape * 2)
  for mode in sorted(set(modes)):
    if not 1 <= mode <= num:
      raise ValueError(f"mode {mode} not in a {num}-mode space")
    tensor = _loss_on_axis(tensor, delta, mode - 1, num + mode - 1)
  return fock.DensityMatrix.from_array(
      space, tensor.reshape(space.dim, space.dim)
  )


def noon_lossy_probe(
    space: fock.FockSpace, n_photons: int, delta: float
) -> fock.DensityMatrix:
  """N00N probe after equal loss on both modes, before encoding."""
  eta = 1.0 - delta
  matrix = np.zeros((space.dim, space.dim), dtype=complex)
  for j in range(n_photons + 1):
    weight = 0.5 * math.comb(n_photons, j) * eta ** (n_photons - j) * delta**j
    left = space.index(n_photons - j, 0)
    right = space.index(0, n_photons - j)
    matrix[left, left] += weight
    matrix[right, right] += weight
  top = space.index(n_photons, 0)
  bottom = space.index(0, n_photons)
  matrix[top, bottom] = matrix[bottom, top] = 0.5 * eta**n_photons
  return fock.DensityMatrix.from_array(space, matrix)


def photon_loss_noon_analytic(
    n_photons: int, theta: float, delta: float, space: fock.FockSpace
) -> fock.DensityMatrix:
  """Closed-form lossy N00N output at total phase ``theta``.

  The probe keeps its coherence with weight (1 - delta)^N, loses j photons
  from either branch with weight C(N, j) (1 - delta)^(N-j) delta^j / 2, and
  ends in vacuum with weight delta^N.
  """
  return _encode(noon_lossy_probe(space, n_photons, delta), n_photons, theta)


def loss_squeezed_thermal_parameters(
    r: float, delta: float
) -> tuple[float, float]:
  """(n_bar, r_bar) of squeezed vacuum ``r`` after loss ``delta``."""
  eta = 1.0 - delta
  n_r = math.sinh(r) ** 2
  n_bar = 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * n_r * eta * delta))
  if eta == 0:
    return n_bar, 0.0
  r_bar = 0.25 * math.log(
      (eta * math.expm1(2 * r) + 1.0) / (eta * math.expm1(-2 * r) + 1.0)
  )
  return n_bar, r_bar


def squeezed_thermal_components(
    levels: int,
    r: float,
    n_bar: float,
    tol: float = THERMAL_SERIES_TOL,
) -> tuple[np.ndarray, np.ndarray]:
  """Weights and truncated vectors of sum_k p_k |r,k><r,k|.

  p_k = n_bar^k / (n_bar + 1)^(k+1); the series stops once the kept weight
  reaches 1 - tol.

  Raises:
    TruncationError: If more than ``levels`` terms are needed.
  """
  ratio = n_bar / (n_bar + 1.0)
  weights = []
  cumulative = 0.0
  k = 0
  while cumulative < 1.0 - tol:
    if k >= levels:
      raise exceptions.TruncationError(
          f"squeezed thermal series (n_bar={n_bar:.4g}) not converged"
          f" within {levels} terms",
          deficit=1.0 - cumulative,
      )
    p_k = ratio**k / (n_bar + 1.0)
    weights.append(p_k)
    cumulative += p_k
    k += 1
    if ratio == 0:
      break
  columns = fock.squeezed_columns(levels, r, len(weights) - 1)
  return np.asarray(weights), columns


def squeezed_thermal(
    space: fock.FockSpace, r: float, n_bar: float
) -> fock.DensityMatrix:
  single = space.single_mode()
  weights, columns = squeezed_thermal_components(single.levels, r, n_bar)
  return fock.mixture(single, weights, columns)


def loss_squeezed_thermal_analytic(
    r: float, delta: float, space: fock.FockSpace
) -> fock.DensityMatrix:
  """Single-mode image of squeezed vacuum under loss."""
  if not 0.0 <= delta <= 1.0:
    raise ValueError(f"photon loss must lie in [0, 1], got {delta}")
  n_bar, r_bar = loss_squeezed_thermal_parameters(r, delta)
  return squeezed_thermal(space, r_bar, n_bar)


# ---------------------------------------------------------------------------
# Additive Gaussian noise.


def displacement_matrix(levels: int, beta: complex) -> np.ndarray:
  """Truncated displacement operator <m|D(beta)|n> for m, n < levels.

  Uses the associated-Laguerre form of the matrix elements, which is exact
  for the truncated block.
  """
  m = np.arange(levels)[:, None]
  n = np.arange(levels)[None, :]
  low = np.minimum(m, n)
  high = np.maximum(m, n)
  x = abs(beta) ** 2
  lag = special.eval_genlaguerre(low, high - low, x)
  log_pref = 0.5 * (special.gammaln(low + 1) - special.gammaln(high + 1))
  base = np.where(m >= n, complex(beta), -complex(beta).conjugate())
  return np.exp(log_pref - x / 2) * base ** (high - low) * lag


def _gaussian_nodes(sigma: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
  """Gauss-Hermite nodes and weights for the density G(x; sigma).

  The weights sum to one and carry no exp(x^2) correction, so every term
  stays bounded by the matrix element it multiplies.
  """
  if sigma == 0:
    return np.zeros(1), np.ones(1)
  t, w = np.polynomial.hermite.hermgauss(nodes)
  return math.sqrt(2.0) * sigma * t, w / math.sqrt(math.pi)


def _displace_on_mode(
    tensor: np.ndarray, op: np.ndarray, row_axis: int, col_axis: int
) -> np.ndarray:
  out = np.tensordot(op, tensor, axes=([1], [row_axis]))
  out = np.moveaxis(out, 0, row_axis)
  out = np.tensordot(out, op.conj(), axes=([col_axis], [1]))
  return np.moveaxis(out, -1, col_axis)


def _displacement_sum(
    rho: fock.DensityMatrix,
    sigma_x: float,
    sigma_p: float,
    mode: int,
    nodes: int,
) -> np.ndarray:
  space = rho.space
  num = space.num_modes
  tensor = np.array(rho.matrix).reshape(space.shape * 2)
  xs, wx = _gaussian_nodes(sigma_x, nodes)
  ps, wp = _gaussian_nodes(sigma_p, nodes)
  total = np.zeros_like(tensor)
  for x, weight_x in zip(xs, wx):
    for p, weight_p in zip(ps, wp):
      weight = weight_x * weight_p
      if weight == 0:
        continue
      op = displacement_matrix(space.levels, complex(x, p))
      total += weight * _displace_on_mode(
          tensor, op, mode - 1, num + mode - 1
      )
  return total.reshape(space.dim, space.dim)


@debug_utils.debug_log_calls
def additive_gaussian(
    rho: fock.DensityMatrix,
    sigma_x: float,
    sigma_p: float,
    mode: int = 2,
    nodes: int | None = None,
    check_convergence: bool = True,
) -> fock.DensityMatrix:
  """Averages D(beta) rho D(beta)^dag over Gaussian displacements on a mode.

  Args:
    rho: Input state.
    sigma_x: Standard deviation of Re(beta).
    sigma_p: Standard deviation of Im(beta).
    mode: Mode the displacement acts on (1-based). Single-mode spaces use 1.
    nodes: Gauss-Hermite nodes per axis; defaults to max(41, 2 cutoff + 1).
    check_convergence: Recompute with doubled nodes and require agreement.

  Returns:
    The noisy state projected on the truncated space.

  Raises:
    QuadratureError: If node doubling changes the result by more than 1e-8.
  """
  if sigma_x < 0 or sigma_p < 0:
    raise ValueError("displacement widths must be >= 0")
  space = rho.space
  if space.num_modes == 1:
    mode = 1
  if not 1 <= mode <= space.num_modes:
    raise ValueError(f"mode {mode} not in a {space.num_modes}-mode space")
  if sigma_x == 0 and sigma_p == 0:
    return rho
  if nodes is None:
    nodes = max(MIN_DISPLACEMENT_NODES, 2 * space.cutoff_per_mode + 1)
  total = _displacement_sum(rho, sigma_x, sigma_p, mode, nodes)
  if check_convergence:
    refined = _displacement_sum(rho, sigma_x, sigma_p, mode, 2 * nodes)
    change = _max_abs_diff(total, refined)
    if change > CONVERGENCE_TOL:
      raise exceptions.QuadratureError(
          f"displacement quadrature changed by {change:.3e} when the node"
          f" count was doubled from {nodes}"
      )
  return fock.DensityMatrix.from_array(space, total)


def additive_gaussian_squeezed_thermal_analytic(
    r: float, delta: float, space: fock.FockSpace
) -> fock.DensityMatrix:
  """Matched additive noise on squeezed vacuum.

  Returns sum_k D^k/(D+1)^(k+1) |r,k><r,k| with D = ``delta``.
  """
  if delta < 0:
    raise ValueError(f"additive noise strength must be >= 0, got {delta}")
  return squeezed_thermal(space, r, delta)


def cs_ideal_parity(
    theta: float | np.ndarray,
    alpha: float,
    r: float,
    noise: NoiseKind | None = None,
) -> np.ndarray:
  """Untruncated mode-1 parity of U_BS Phi(theta) U_BS |alpha>|r,0>.

  The output parity equals the parity of the input mode
  -sin(theta/2) a1 + cos(theta/2) a2, a Gaussian state whose parity follows
  from its covariance and mean. Loss and matched additive noise only change
  those moments. Phase diffusion has no closed form here.
  """
  theta = np.asarray(theta, dtype=float)
  u = np.sin(theta / 2) ** 2
  v = np.cos(theta / 2) ** 2
  squeeze_x = math.exp(-2 * r)
  squeeze_p = math.exp(2 * r)
  alpha_sq = float(alpha) ** 2
  if noise is None or noise.delta == 0:
    d1 = u + v * squeeze_x
    d2 = u + v * squeeze_p
  elif isinstance(noise, PhotonLoss):
    eta = noise.transmissivity
    d1 = u + v * (eta * squeeze_x + noise.delta)
    d2 = u + v * (eta * squeeze_p + noise.delta)
    alpha_sq *= eta
  elif isinstance(noise, AdditiveGaussian):
    sigma_x, sigma_p = noise.widths
    d1 = u + v * (squeeze_x + 4 * sigma_x**2)
    d2 = u + v * (squeeze_p + 4 * sigma_p**2)
  else:
    raise ValueError(f"no closed-form parity for {type(noise).__name__}")
  return np.exp(-2 * u * alpha_sq / d1) / np.sqrt(d1 * d2)


# ---------------------------------------------------------------------------
# Noise-strength calibration.


class SupportsDominantEigenvalue(Protocol):

  def dominant_eigenvalue(self, delta: float) -> float:
    ...


@debug_utils.debug_log_calls
def delta_for_lambda(
    scenario: SupportsDominantEigenvalue,
    lambda_target: float,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    iterations: int = DEFAULT_BISECTION_ITERS,
) -> float:
  """Noise strength at which the dominant eigenvalue reaches a target.

  Bisection assumes the dominant eigenvalue decreases with the strength
  across ``bracket``.

  Raises:
    SearchError: If the target is not attained inside the bracket.
  """
  if not 0.0 < lambda_target <= 1.0:
    raise ValueError(f"lambda target must lie in (0, 1]: {lambda_target}")
  if lambda_target == 1.0:
    return 0.0
  lo, hi = bracket
  lam_lo = scenario.dominant_eigenvalue(lo)
  lam_hi = scenario.dominant_eigenvalue(hi)
  if not lam_hi <= lambda_target <= lam_lo:
    raise exceptions.SearchError(
        f"lambda={lambda_target} not bracketed: lambda({lo})={lam_lo:.6f},"
        f" lambda({hi})={lam_hi:.6f}"
    )
  for _ in range(iterations):
    mid = 0.5 * (lo + hi)
    if scenario.dominant_eigenvalue(mid) > lambda_target:
      lo = mid
    else:
      hi = mid
  delta = 0.5 * (lo + hi)
  achieved = scenario.dominant_eigenvalue(delta)
  if abs(achieved - lambda_target) > LAMBDA_TOL:
    raise exceptions.SearchError(
        f"bisection reached lambda={achieved:.6f}, target {lambda_target}"
    )
  logging.info(
      "Noise strength %.6g gives dominant eigenvalue %.6f", delta, achieved
  )
  return delta
