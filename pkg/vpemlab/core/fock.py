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

"""Truncated Fock-space algebra for one- and two-mode bosonic systems.

Basis states of a two-mode space are ordered with mode 1 major, so the
amplitude of |n1, n2> sits at index ``n1 * levels + n2`` and a state vector
reshapes to a ``(levels, levels)`` array indexed ``[n1, n2]``.

All value types are frozen and hold read-only arrays; operations are pure
functions and safe to call from worker threads.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, Sequence

from absl import logging
import numpy as np
from scipy import linalg
from scipy import special

from vpemlab.core import debug_utils
from vpemlab.core import exceptions

__all__ = [
    "FockSpace",
    "PureState",
    "DensityMatrix",
    "Observable",
    "EigenDecomposition",
    "make_space",
    "noon_state",
    "coherent_state",
    "squeezed_number_state",
    "squeezed_columns",
    "beam_splitter",
    "phase_shift",
    "phase_diagonal",
    "parity_observable",
    "expectation",
    "eig",
    "matrix_power_normalized",
    "calibrate_convention",
    "product_state",
    "apply_unitary",
    "mixture",
    "number_expectation",
    "coherent_amplitudes",
    "check_same_space",
]

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_EXCESS_TOL = 1e-12
IMAG_TOL = 1e-10
DEGENERACY_GAP = 1e-8
MAX_TRACE_TOLERANCE = 1e-2

_CALIBRATION_POINTS = 17
_CALIBRATION_TOL = 1e-10
# Squeezed amplitudes decay like tanh(r)**(n/2); the working space is padded
# until that tail drops below machine precision.
_SQUEEZE_TAIL_LOG = 37.0
_SQUEEZE_MIN_PAD = 64
_SQUEEZE_MAX_LEVELS = 2048


@dataclasses.dataclass(frozen=True, slots=True)
class FockSpace:
  """Truncation geometry of a one- or two-mode bosonic Hilbert space.

  Attributes:
    cutoff_per_mode: Largest photon number kept in each mode.
    trace_tolerance: Largest acceptable truncation-induced trace deficit.
    num_modes: 1 or 2.
  """

  cutoff_per_mode: int
  trace_tolerance: float = 1e-10
  num_modes: int = 2

  def __post_init__(self):
    if self.cutoff_per_mode < 1:
      raise ValueError(
          f"cutoff_per_mode must be >= 1, got {self.cutoff_per_mode}"
      )
    if not 0.0 < self.trace_tolerance <= MAX_TRACE_TOLERANCE:
      raise ValueError(
          "trace_tolerance must lie in (0, 1e-2], got"
          f" {self.trace_tolerance}"
      )
    if self.num_modes not in (1, 2):
      raise ValueError(f"num_modes must be 1 or 2, got {self.num_modes}")

  @property
  def levels(self) -> int:
    return self.cutoff_per_mode + 1

  @property
  def dim(self) -> int:
    return self.levels**self.num_modes

  @property
  def shape(self) -> tuple[int, ...]:
    return (self.levels,) * self.num_modes

  def index(self, *photons: int) -> int:
    """Flat basis index of the given per-mode photon numbers."""
    if len(photons) != self.num_modes:
      raise ValueError(
          f"expected {self.num_modes} photon numbers, got {len(photons)}"
      )
    for n in photons:
      if not 0 <= n <= self.cutoff_per_mode:
        raise ValueError(
            f"photon number {n} outside [0, {self.cutoff_per_mode}]"
        )
    return int(np.ravel_multi_index(photons, self.shape))

  def photon_numbers(self, mode: int) -> np.ndarray:
    """Photon number of ``mode`` (1-based) for every basis index."""
    return _photon_numbers(self.levels, self.num_modes, mode)

  def single_mode(self) -> FockSpace:
    return dataclasses.replace(self, num_modes=1)

  def two_mode(self) -> FockSpace:
    return dataclasses.replace(self, num_modes=2)

  def compatible(self, other: FockSpace) -> bool:
    return (
        self.cutoff_per_mode == other.cutoff_per_mode
        and self.num_modes == other.num_modes
    )


def _frozen(array: np.ndarray) -> np.ndarray:
  array = np.array(array, dtype=complex)
  array.setflags(write=False)
  return array


def check_same_space(a: FockSpace, b: FockSpace) -> None:
  if not a.compatible(b):
    raise ValueError(f"Fock spaces do not match: {a} vs {b}")


@functools.lru_cache(maxsize=64)
def _photon_numbers(levels: int, num_modes: int, mode: int) -> np.ndarray:
  if not 1 <= mode <= num_modes:
    raise ValueError(f"mode must be in [1, {num_modes}], got {mode}")
  grids = np.indices((levels,) * num_modes).reshape(num_modes, -1)
  numbers = grids[mode - 1].copy()
  numbers.setflags(write=False)
  return numbers


@dataclasses.dataclass(frozen=True, eq=False)
class PureState:
  """Complex amplitude vector on a truncated space.

  The vector is never renormalised after truncation; the missing weight is
  the truncation diagnostic.
  """

  space: FockSpace
  amplitudes: np.ndarray

  def __post_init__(self):
    amps = _frozen(self.amplitudes).reshape(-1)
    if amps.shape != (self.space.dim,):
      raise ValueError(
          f"amplitude vector has length {amps.size}, expected"
          f" {self.space.dim}"
      )
    object.__setattr__(self, "amplitudes", amps)
    norm_sq = float(np.vdot(amps, amps).real)
    if norm_sq > 1.0 + TRACE_EXCESS_TOL:
      raise exceptions.NumericalConsistencyError(
          f"state norm {norm_sq!r} exceeds 1"
      )
    if 1.0 - norm_sq > self.space.trace_tolerance:
      raise exceptions.TruncationError(
          f"truncation deficit {1.0 - norm_sq:.3e} exceeds tolerance"
          f" {self.space.trace_tolerance:.1e}",
          deficit=1.0 - norm_sq,
      )

  @property
  def norm_deficit(self) -> float:
    return 1.0 - float(np.vdot(self.amplitudes, self.amplitudes).real)

  def inner(self, other: PureState) -> complex:
    check_same_space(self.space, other.space)
    return complex(np.vdot(self.amplitudes, other.amplitudes))

  def fidelity(self, other: PureState) -> float:
    return abs(self.inner(other)) ** 2

  def to_density(self) -> DensityMatrix:
    return DensityMatrix(
        self.space, np.outer(self.amplitudes, self.amplitudes.conj())
    )

  def as_array(self) -> np.ndarray:
    """Amplitudes reshaped to one axis per mode."""
    return self.amplitudes.reshape(self.space.shape)


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix:
  """Hermitian positive semidefinite operator on a truncated space.

  Hermiticity and trace are always validated. Positivity needs an
  eigendecomposition and is only checked when debug checks are enabled.
  """

  space: FockSpace
  matrix: np.ndarray

  def __post_init__(self):
    m = _frozen(self.matrix)
    if m.shape != (self.space.dim, self.space.dim):
      raise ValueError(
          f"matrix has shape {m.shape}, expected {self.space.dim} square"
      )
    object.__setattr__(self, "matrix", m)
    skew = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if skew > HERMITIAN_TOL:
      raise exceptions.NumericalConsistencyError(
          f"density matrix is not Hermitian (max skew {skew:.3e})"
      )
    trace = self.trace
    if trace > 1.0 + TRACE_EXCESS_TOL:
      raise exceptions.NumericalConsistencyError(
          f"density matrix trace {trace!r} exceeds 1"
      )
    if 1.0 - trace > self.space.trace_tolerance:
      raise exceptions.TruncationError(
          f"trace deficit {1.0 - trace:.3e} exceeds tolerance"
          f" {self.space.trace_tolerance:.1e}",
          deficit=1.0 - trace,
      )
    if debug_utils.checks_enabled():
      min_eig = float(np.linalg.eigvalsh(m)[0])
      if min_eig < -PSD_TOL:
        raise exceptions.PsdViolationError(
            f"density matrix has eigenvalue {min_eig:.3e}",
            min_eigenvalue=min_eig,
        )

  @classmethod
  def from_array(cls, space: FockSpace, matrix: np.ndarray) -> DensityMatrix:
    """Builds a density matrix after removing rounding-level skew."""
    m = np.asarray(matrix, dtype=complex)
    return cls(space, 0.5 * (m + m.conj().T))

  @property
  def trace(self) -> float:
    return float(np.trace(self.matrix).real)


@dataclasses.dataclass(frozen=True, eq=False)
class Observable:
  """Hermitian observable, flagged when it squares to the identity."""

  space: FockSpace
  matrix: np.ndarray
  is_involutory: bool = False

  def __post_init__(self):
    m = _frozen(self.matrix)
    if m.shape != (self.space.dim, self.space.dim):
      raise ValueError(
          f"matrix has shape {m.shape}, expected {self.space.dim} square"
      )
    object.__setattr__(self, "matrix", m)
    if float(np.max(np.abs(m - m.conj().T))) > HERMITIAN_TOL:
      raise exceptions.NumericalConsistencyError("observable is not Hermitian")
    if self.is_involutory:
      square = m @ m
      if float(np.max(np.abs(square - np.eye(self.space.dim)))) > 1e-12:
        raise exceptions.NumericalConsistencyError(
            "observable flagged involutory but does not square to identity"
        )

  @property
  def diagonal(self) -> np.ndarray | None:
    """The diagonal when the observable is diagonal in the Fock basis."""
    diag = np.diag(self.matrix)
    if np.array_equal(np.diag(diag), self.matrix):
      return diag.real
    return None


@dataclasses.dataclass(frozen=True, eq=False)
class EigenDecomposition:
  """Spectrum of a density matrix sorted in descending order.

  Attributes:
    space: Space the eigenvectors live on.
    eigenvalues: Real eigenvalues, descending, clipped at zero.
    vectors: Matrix whose columns are the matching orthonormal eigenvectors.
    dominant_gap: Difference of the two largest eigenvalues.
  """

  space: FockSpace
  eigenvalues: np.ndarray
  vectors: np.ndarray
  dominant_gap: float

  def __post_init__(self):
    values = np.array(self.eigenvalues, dtype=float)
    values.setflags(write=False)
    object.__setattr__(self, "eigenvalues", values)
    object.__setattr__(self, "vectors", _frozen(self.vectors))

  @property
  def degenerate(self) -> bool:
    """True when the dominant eigenvector is not unique."""
    return self.dominant_gap < DEGENERACY_GAP

  @property
  def eigenvectors(self) -> list[PureState]:
    return [
        PureState(self.space, self.vectors[:, k])
        for k in range(self.vectors.shape[1])
    ]

  @property
  def dominant(self) -> PureState:
    return PureState(self.space, self.vectors[:, 0])

  def reconstruct(self) -> np.ndarray:
    return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def make_space(
    cutoff_per_mode: int,
    trace_tolerance: float = 1e-10,
    num_modes: int = 2,
) -> FockSpace:
  """Returns a validated truncated space of ``(cutoff+1)**num_modes`` dims."""
  return FockSpace(cutoff_per_mode, trace_tolerance, num_modes)


def noon_state(space: FockSpace, n_photons: int) -> PureState:
  """(|N,0> + |0,N>) / sqrt(2)."""
  if space.num_modes != 2:
    raise ValueError("N00N states need a two-mode space")
  if not 1 <= n_photons <= space.cutoff_per_mode:
    raise ValueError(
        f"N={n_photons} must lie in [1, cutoff={space.cutoff_per_mode}]"
    )
  amps = np.zeros(space.dim, dtype=complex)
  amps[space.index(n_photons, 0)] = 1 / math.sqrt(2)
  amps[space.index(0, n_photons)] = 1 / math.sqrt(2)
  return PureState(space, amps)


def _embed(space: FockSpace, single: np.ndarray, mode: int) -> np.ndarray:
  """Places a single-mode vector on ``mode`` with vacuum elsewhere."""
  if space.num_modes == 1:
    if mode != 1:
      raise ValueError("single-mode spaces only have mode 1")
    return single
  vacuum = np.zeros(space.levels, dtype=complex)
  vacuum[0] = 1.0
  if mode == 1:
    return np.kron(single, vacuum)
  if mode == 2:
    return np.kron(vacuum, single)
  raise ValueError(f"mode must be 1 or 2, got {mode}")


def coherent_amplitudes(levels: int, alpha: complex) -> np.ndarray:
  """Truncated coherent amplitudes exp(-|a|^2/2) a^n / sqrt(n!)."""
  n = np.arange(levels)
  log_mag = -0.5 * abs(alpha) ** 2 - 0.5 * special.gammaln(n + 1)
  if alpha == 0:
    amps = np.zeros(levels, dtype=complex)
    amps[0] = 1.0
    return amps
  log_mag = log_mag + n * math.log(abs(alpha))
  return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(
    space: FockSpace, alpha: complex, mode: int = 1
) -> PureState:
  """Coherent state |alpha> on ``mode``; other modes in vacuum."""
  return PureState(
      space, _embed(space, coherent_amplitudes(space.levels, alpha), mode)
  )


def _squeeze_working_levels(levels: int, k_max: int, r: float) -> int:
  t = abs(math.tanh(r))
  if t < 1e-12:
    pad = _SQUEEZE_MIN_PAD
  else:
    pad = _SQUEEZE_MIN_PAD + math.ceil(2 * _SQUEEZE_TAIL_LOG / -math.log(t))
  return min(levels + k_max + pad, _SQUEEZE_MAX_LEVELS)


@functools.lru_cache(maxsize=32)
def _squeeze_operator(working_levels: int, r: float) -> np.ndarray:
  """exp[r (a^2 - a^dag^2) / 2] on a working truncation."""
  a = np.diag(np.sqrt(np.arange(1, working_levels)), k=1)
  a_sq = a @ a
  generator = 0.5 * (a_sq - a_sq.T)
  op = linalg.expm(r * generator)
  op.setflags(write=False)
  return op


def squeezed_columns(levels: int, r: float, k_max: int) -> np.ndarray:
  """Truncated amplitudes of |r,k> for k = 0..k_max as matrix columns.

  The squeeze operator is exponentiated on a padded working space so the
  first ``levels`` rows are free of boundary effects.
  """
  working = _squeeze_working_levels(levels, k_max, r)
  if working < levels + k_max + 1:
    raise exceptions.TruncationError(
        f"squeezing r={r} needs more than {_SQUEEZE_MAX_LEVELS} levels"
    )
  op = _squeeze_operator(working, float(r))
  return np.array(op[:levels, : k_max + 1], dtype=complex)


def squeezed_number_state(
    space: FockSpace, r: float, k: int, mode: int = 1
) -> PureState:
  """Squeezed number state exp[r(a^2 - a^dag^2)/2]|k> on ``mode``.

  With this sign the x quadrature of |r,0> has variance exp(-2r)/2.
  """
  if not 0 <= k <= space.cutoff_per_mode:
    raise ValueError(f"k={k} outside [0, {space.cutoff_per_mode}]")
  column = squeezed_columns(space.levels, r, k)[:, k]
  return PureState(space, _embed(space, column, mode))


def product_state(first: PureState, second: PureState) -> PureState:
  """Two-mode product of two single-mode states on the same cutoff."""
  if first.space.num_modes != 1 or second.space.num_modes != 1:
    raise ValueError("product_state takes two single-mode states")
  check_same_space(first.space, second.space)
  return PureState(
      first.space.two_mode(), np.kron(first.amplitudes, second.amplitudes)
  )


@functools.lru_cache(maxsize=8)
def _beam_splitter(levels: int) -> np.ndarray:
  a = np.diag(np.sqrt(np.arange(1, levels)), k=1)
  eye = np.eye(levels)
  a1 = np.kron(a, eye)
  a2 = np.kron(eye, a)
  generator = a1.T @ a2 + a1 @ a2.T
  # Real symmetric generator; exponentiate through its eigenbasis.
  w, v = np.linalg.eigh(generator)
  unitary = (v * np.exp(1j * np.pi / 4 * w)) @ v.T
  unitary.setflags(write=False)
  return unitary


def beam_splitter(space: FockSpace) -> np.ndarray:
  """Balanced beam splitter exp[i pi/4 (a1^dag a2 + a1 a2^dag)].

  The truncated generator is block diagonal in total photon number, so the
  result is unitary and exact on every sector with total <= cutoff.
  """
  if space.num_modes != 2:
    raise ValueError("the beam splitter acts on a two-mode space")
  return _beam_splitter(space.levels)


def phase_diagonal(space: FockSpace, theta: float) -> np.ndarray:
  """Diagonal of the phase shift exp(i n2 theta)."""
  mode = 2 if space.num_modes == 2 else 1
  return np.exp(1j * theta * space.photon_numbers(mode))


def phase_shift(space: FockSpace, theta: float) -> np.ndarray:
  return np.diag(phase_diagonal(space, theta))


def parity_observable(space: FockSpace) -> Observable:
  """Mode-1 photon-number parity (-1)**n1."""
  signs = np.where(space.photon_numbers(1) % 2 == 0, 1.0, -1.0)
  return Observable(space, np.diag(signs), is_involutory=True)


def number_expectation(rho: DensityMatrix, mode: int = 1) -> float:
  numbers = rho.space.photon_numbers(mode)
  return float(np.real(np.sum(numbers * np.diag(rho.matrix))))


def apply_unitary(rho: DensityMatrix, unitary: np.ndarray) -> DensityMatrix:
  return DensityMatrix.from_array(
      rho.space, unitary @ rho.matrix @ unitary.conj().T
  )


def mixture(
    space: FockSpace, weights: Sequence[float], vectors: np.ndarray
) -> DensityMatrix:
  """sum_k w_k |v_k><v_k| for the columns of ``vectors``."""
  vectors = np.asarray(vectors, dtype=complex)
  weights = np.asarray(weights, dtype=float)
  return DensityMatrix.from_array(
      space, (vectors * weights) @ vectors.conj().T
  )


def expectation(obs: Observable, rho: DensityMatrix) -> float:
  """Re Tr[A rho], asserting the imaginary part is rounding noise."""
  check_same_space(obs.space, rho.space)
  diag = obs.diagonal
  if diag is not None:
    value = complex(np.sum(diag * np.diag(rho.matrix)))
  else:
    value = complex(np.einsum("ij,ji->", obs.matrix, rho.matrix))
  if abs(value.imag) > IMAG_TOL:
    raise exceptions.NumericalConsistencyError(
        f"expectation has imaginary part {value.imag:.3e}"
    )
  return value.real


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
  """Rotates each column so its largest-magnitude entry is real positive."""
  if vectors.size == 0:
    return vectors
  idx = np.argmax(np.abs(vectors), axis=0)
  pivots = vectors[idx, np.arange(vectors.shape[1])]
  phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
  return vectors / phases


@debug_utils.debug_log_calls
def eig(rho: DensityMatrix) -> EigenDecomposition:
  """Hermitian eigendecomposition with descending, clipped eigenvalues."""
  values, vectors = np.linalg.eigh(rho.matrix)
  values = values[::-1]
  vectors = vectors[:, ::-1]
  if values[-1] < -PSD_TOL:
    raise exceptions.PsdViolationError(
        f"density matrix has eigenvalue {values[-1]:.3e} below"
        f" {-PSD_TOL:.0e}",
        min_eigenvalue=float(values[-1]),
    )
  values = np.clip(values, 0.0, None)
  gap = float(values[0] - values[1]) if values.size > 1 else float(values[0])
  decomposition = EigenDecomposition(
      rho.space, values, _fix_phases(vectors), gap
  )
  if decomposition.degenerate:
    logging.warning(
        "Dominant eigenvalue is degenerate (gap %.3e); dominant-eigenvector"
        " reports are unreliable.",
        gap,
    )
  return decomposition


def matrix_power_normalized(rho: DensityMatrix, n: int) -> DensityMatrix:
  """rho**n / Tr[rho**n] through eigenvalue powers."""
  if n < 1:
    raise ValueError(f"mitigation order must be >= 1, got {n}")
  if n == 1:
    return DensityMatrix.from_array(rho.space, rho.matrix / rho.trace)
  decomposition = eig(rho)
  powers = decomposition.eigenvalues**n
  total = float(np.sum(powers))
  if total <= 1e-30:
    raise exceptions.NumericalConsistencyError(
        f"Tr[rho^{n}] = {total:.3e} vanishes"
    )
  return mixture(rho.space, powers / total, decomposition.vectors)


def _noon_parity_curve(
    space: FockSpace, n_photons: int
) -> Callable[[np.ndarray], np.ndarray]:
  """Ideal parity of U_BS Phi(theta)|N00N> for an array of phases."""
  probe = noon_state(space, n_photons).amplitudes
  bs = beam_splitter(space)
  signs = np.diag(parity_observable(space).matrix).real

  def curve(thetas: np.ndarray) -> np.ndarray:
    out = np.empty(len(thetas))
    for i, theta in enumerate(thetas):
      psi = bs @ (phase_diagonal(space, theta) * probe)
      out[i] = float(np.sum(signs * np.abs(psi) ** 2))
    return out

  return curve


@functools.lru_cache(maxsize=32)
def calibrate_convention(space: FockSpace, n_photons: int) -> float:
  """Offset that turns the ideal N00N parity curve into sin(N theta).

  Fits p cos(N theta) + q sin(N theta) on a probe grid and returns the
  offset in [0, 2 pi / N).

  Raises:
    ConventionError: If the shifted curve misses sin(N theta) anywhere on
      the grid by more than 1e-10.
  """
  n = n_photons
  thetas = np.linspace(-np.pi / n, np.pi / n, _CALIBRATION_POINTS)
  curve = _noon_parity_curve(space, n)
  values = curve(thetas)
  design = np.column_stack([np.cos(n * thetas), np.sin(n * thetas)])
  (p, q), *_ = np.linalg.lstsq(design, values, rcond=None)
  period = 2 * np.pi / n
  offset = float(np.mod((np.arctan2(q, p) - np.pi / 2) / n, period))
  residual = np.max(np.abs(curve(thetas + offset) - np.sin(n * thetas)))
  if residual > _CALIBRATION_TOL:
    raise exceptions.ConventionError(
        f"no offset reproduces sin(N theta) for N={n}; residual"
        f" {residual:.3e}"
    )
  logging.debug("Calibrated N=%d offset %.12f rad", n, offset)
  return offset
