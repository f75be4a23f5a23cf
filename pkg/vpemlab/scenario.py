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

"""Interferometer scenarios: probe, noise, encoding and truncation.

A scenario fixes everything except the phase and the noise strength. The
noise always acts on the probe before the phase is encoded, so the error
state at total phase theta is

  rho_e(theta) = U(theta) rho_probe U(theta)^dag,  U(theta) = U_BS Phi(theta)

and its eigenvalues do not depend on theta. The probe is the N00N state, or
U_BS |alpha>|r,0> for the coherent-squeezed input.

Because Phi(theta) is diagonal in the mode-2 photon number, every parity
expectation is a trigonometric polynomial in theta:

  <v|A|v>(theta) = sum_{a,b} exp(i theta (b - a)) C[a, b]

with a small Hermitian kernel C per eigenvector. Kernels are computed once
per noise strength and cached.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import zlib
from typing import Callable

from absl import logging
import numpy as np

from vpemlab import noise
from vpemlab.core import debug_utils
from vpemlab.core import exceptions
from vpemlab.core import fock
from vpemlab.core import types

__all__ = [
    "NoonProbe",
    "CoherentSqueezedProbe",
    "Probe",
    "Scenario",
    "ProbeSpectrum",
    "ParityKernel",
]

SPECTRUM_TAIL = 1e-12
_CS_WORKING_FACTOR = 4
_NOON_TRACE_TOLERANCE = 1e-10
_CS_TRACE_TOLERANCE = 1e-2


@dataclasses.dataclass(frozen=True, slots=True)
class NoonProbe:
  """(|N,0> + |0,N>)/sqrt(2)."""

  n_photons: int = 5

  def __post_init__(self):
    if self.n_photons < 1:
      raise ValueError(f"N must be >= 1, got {self.n_photons}")

  @property
  def type(self) -> types.ProbeType:
    return types.ProbeType.NOON

  @property
  def default_cutoff(self) -> int:
    return self.n_photons + 1

  @property
  def squeezing(self) -> float:
    return 0.0

  @property
  def tag(self) -> str:
    return f"noon{self.n_photons}"


@dataclasses.dataclass(frozen=True, slots=True)
class CoherentSqueezedProbe:
  """|alpha>_1 |r,0>_2 with mean photon numbers N_c and N_r.

  Attributes:
    mean_coherent: N_c = |alpha|^2; alpha is taken real.
    mean_squeezed: N_r = sinh(r)^2.
  """

  mean_coherent: float = 2.5
  mean_squeezed: float = 2.5

  def __post_init__(self):
    if self.mean_coherent < 0 or self.mean_squeezed < 0:
      raise ValueError("mean photon numbers must be >= 0")

  @property
  def type(self) -> types.ProbeType:
    return types.ProbeType.COHERENT_SQUEEZED

  @property
  def alpha(self) -> float:
    return math.sqrt(self.mean_coherent)

  @property
  def squeezing(self) -> float:
    return math.asinh(math.sqrt(self.mean_squeezed))

  @property
  def default_cutoff(self) -> int:
    return 31

  @property
  def tag(self) -> str:
    return f"cs{self.mean_coherent:g}-{self.mean_squeezed:g}"


Probe = NoonProbe | CoherentSqueezedProbe


@dataclasses.dataclass(frozen=True, eq=False)
class ProbeSpectrum:
  """Eigenvalues and probe-level eigenvectors of a noisy probe.

  Attributes:
    eigenvalues: Descending eigenvalues, tail below 1e-12 dropped.
    vectors: Columns are the matching eigenvectors before encoding.
  """

  eigenvalues: np.ndarray
  vectors: np.ndarray

  @property
  def dominant_gap(self) -> float:
    if self.eigenvalues.size < 2:
      return float(self.eigenvalues[0])
    return float(self.eigenvalues[0] - self.eigenvalues[1])


@dataclasses.dataclass(frozen=True, eq=False)
class ParityKernel:
  """Trigonometric-polynomial form of a parity expectation.

  ``kernel[a, b]`` multiplies exp(i theta (b - a)); the value is real for
  real theta.
  """

  kernel: np.ndarray

  @classmethod
  def combine(
      cls, kernels: np.ndarray, weights: np.ndarray
  ) -> ParityKernel:
    return cls(np.tensordot(weights, kernels, axes=(0, 0)))

  def value(self, thetas: np.ndarray | float) -> np.ndarray:
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    levels = self.kernel.shape[0]
    phases = np.exp(1j * np.outer(thetas, np.arange(levels)))
    return np.real(
        np.einsum("ta,ab,tb->t", phases.conj(), self.kernel, phases)
    )

  def derivative(self, thetas: np.ndarray | float) -> np.ndarray:
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    levels = self.kernel.shape[0]
    steps = np.arange(levels)
    weighted = self.kernel * 1j * (steps[None, :] - steps[:, None])
    phases = np.exp(1j * np.outer(thetas, steps))
    return np.real(np.einsum("ta,ab,tb->t", phases.conj(), weighted, phases))


@functools.lru_cache(maxsize=8)
def _rotated_parity(levels: int) -> np.ndarray:
  """U_BS^dag A U_BS with A the mode-1 parity."""
  space = fock.make_space(levels - 1)
  bs = fock.beam_splitter(space)
  signs = np.diag(fock.parity_observable(space).matrix).real
  rotated = (bs.conj().T * signs) @ bs
  rotated.setflags(write=False)
  return rotated


def _kernels(levels: int, vectors: np.ndarray) -> np.ndarray:
  """Per-column kernels C_k[a, b] of the probe vectors."""
  rotated = _rotated_parity(levels)
  out = np.empty((vectors.shape[1], levels, levels), dtype=complex)
  shape = (levels, levels, levels, levels)
  for k in range(vectors.shape[1]):
    w = vectors[:, k]
    blocks = (np.outer(w.conj(), w) * rotated).reshape(shape)
    out[k] = np.einsum("iajb->ab", blocks)
  return out


@dataclasses.dataclass(frozen=True)
class Scenario:
  """Probe, noise type, truncation and channel construction method.

  Attributes:
    probe: The interferometer input.
    noise_type: Which channel acts on the probe.
    cutoff: Photons kept per mode; defaults to the probe's default.
    trace_tolerance: Accepted truncation deficit; 1e-10 for N00N, 1e-2 for
      the coherent-squeezed probe.
    method: How single-mode noisy states are constructed.
  """

  probe: Probe
  noise_type: types.NoiseType
  cutoff: int | None = None
  trace_tolerance: float | None = None
  method: types.ChannelMethod = types.ChannelMethod.AUTO

  def __post_init__(self):
    if isinstance(self.probe, NoonProbe):
      if self.resolved_cutoff < self.probe.n_photons:
        raise ValueError(
            f"cutoff {self.resolved_cutoff} below N={self.probe.n_photons}"
        )

  @property
  def resolved_cutoff(self) -> int:
    return self.cutoff if self.cutoff is not None else self.probe.default_cutoff

  @property
  def space(self) -> fock.FockSpace:
    tol = self.trace_tolerance
    if tol is None:
      tol = (
          _NOON_TRACE_TOLERANCE
          if isinstance(self.probe, NoonProbe)
          else _CS_TRACE_TOLERANCE
      )
    return fock.make_space(self.resolved_cutoff, tol)

  @property
  def scenario_id(self) -> str:
    return f"{self.probe.tag}-{self.noise_type.value}-c{self.resolved_cutoff}"

  @property
  def scenario_key(self) -> int:
    """Stable 32-bit key for seed derivation."""
    return zlib.crc32(self.scenario_id.encode("utf-8"))

  def noise(self, delta: float) -> noise.NoiseKind:
    return noise.noise_from_type(
        self.noise_type, delta, r_match=self.probe.squeezing
    )

  def strength_bracket(self) -> tuple[float, float]:
    """Interval on which the dominant eigenvalue falls monotonically."""
    if self.noise_type is types.NoiseType.PHOTON_LOSS:
      return (0.0, 0.5)
    return noise.DEFAULT_BRACKET

  def delta_for_lambda(self, lambda_target: float) -> float:
    return _delta_for_lambda(self, float(lambda_target))

  def reference_domain(self) -> tuple[float, float]:
    """Default search interval for the reference point."""
    if isinstance(self.probe, NoonProbe):
      half = math.pi / (2 * self.probe.n_photons)
      return (-half, half)
    return (0.0, math.pi / 2)

  def total_phase(self, phase: np.ndarray | float) -> np.ndarray | float:
    """Raw interferometer phase for a physical phase phi + phi0."""
    if isinstance(self.probe, NoonProbe):
      return phase + fock.calibrate_convention(
          self.space, self.probe.n_photons
      )
    return phase

  def encoding(self, phase: float) -> np.ndarray:
    space = self.space
    return fock.beam_splitter(space) * fock.phase_diagonal(
        space, float(self.total_phase(phase))
    )

  # -------------------------------------------------------------------------
  # Probes.

  def ideal_probe(self) -> fock.PureState:
    space = self.space
    if isinstance(self.probe, NoonProbe):
      return fock.noon_state(space, self.probe.n_photons)
    single = space.single_mode()
    product = fock.product_state(
        fock.coherent_state(single, self.probe.alpha),
        fock.squeezed_number_state(single, self.probe.squeezing, 0),
    )
    return fock.PureState(
        space, fock.beam_splitter(space) @ product.amplitudes
    )

  def noisy_probe(self, delta: float) -> fock.DensityMatrix:
    """Dense noisy probe before encoding."""
    spectrum = self.probe_spectrum(delta)
    return fock.mixture(self.space, spectrum.eigenvalues, spectrum.vectors)

  def probe_spectrum(self, delta: float) -> ProbeSpectrum:
    return _probe_spectrum(self, float(delta))

  def dominant_eigenvalue(self, delta: float) -> float:
    if (
        isinstance(self.probe, CoherentSqueezedProbe)
        and self.method is not types.ChannelMethod.NUMERIC
    ):
      return _cs_closed_form_dominant(self, float(delta))
    return float(self.probe_spectrum(delta).eigenvalues[0])

  # -------------------------------------------------------------------------
  # Encoded states.

  def ideal_state(self, phase: float) -> fock.DensityMatrix:
    psi = self.encoding(phase) @ self.ideal_probe().amplitudes
    return fock.PureState(self.space, psi).to_density()

  def error_state(self, phase: float, delta: float) -> fock.DensityMatrix:
    return fock.apply_unitary(self.noisy_probe(delta), self.encoding(phase))

  def eigen_decomposition(
      self, phase: float, delta: float
  ) -> fock.EigenDecomposition:
    """Spectrum of the encoded error state without dense diagonalization."""
    spectrum = self.probe_spectrum(delta)
    vectors = self.encoding(phase) @ spectrum.vectors
    return fock.EigenDecomposition(
        self.space, spectrum.eigenvalues, vectors, spectrum.dominant_gap
    )

  # -------------------------------------------------------------------------
  # Parity kernels.

  def ideal_kernel(self) -> ParityKernel:
    return _ideal_kernel(self)

  def component_kernels(self, delta: float) -> np.ndarray:
    """Kernels of every probe eigenvector, shape (K, levels, levels)."""
    return _component_kernels(self, float(delta))

  def dominant_kernel(self, delta: float) -> ParityKernel:
    return ParityKernel(self.component_kernels(delta)[0])

  def kernel(self, delta: float, n: int = 1) -> ParityKernel:
    """Kernel of Tr[A rho^n] / Tr[rho^n]; n = 1 gives Tr[A rho_e]."""
    if n < 1:
      raise ValueError(f"mitigation order must be >= 1, got {n}")
    values = self.probe_spectrum(delta).eigenvalues
    if n == 1:
      weights = values
    else:
      powers = values**n
      total = float(np.sum(powers))
      if total <= 1e-30:
        raise exceptions.NumericalConsistencyError(
            f"Tr[rho^{n}] = {total:.3e} vanishes"
        )
      weights = powers / total
    return ParityKernel.combine(self.component_kernels(delta), weights)

  def ideal_parity(self, phase: np.ndarray | float) -> np.ndarray:
    return self.ideal_kernel().value(self.total_phase(np.asarray(phase)))

  def ideal_slope(self, phase: np.ndarray | float) -> np.ndarray:
    return self.ideal_kernel().derivative(self.total_phase(np.asarray(phase)))

  def parity(
      self, phase: np.ndarray | float, delta: float, n: int = 1
  ) -> np.ndarray:
    """Noisy (n = 1) or mitigated (n >= 2) parity expectation."""
    if delta == 0:
      return self.ideal_parity(phase)
    return self.kernel(delta, n).value(self.total_phase(np.asarray(phase)))

  def parity_slope(
      self, phase: np.ndarray | float, delta: float, n: int = 1
  ) -> np.ndarray:
    if delta == 0:
      return self.ideal_slope(phase)
    return self.kernel(delta, n).derivative(
        self.total_phase(np.asarray(phase))
    )

  def circuit_means(
      self, phase: float, delta: float, n: int
  ) -> tuple[float, float]:
    """(Tr[A rho_e^n], Tr[rho_e^n]) at one phase."""
    values = self.probe_spectrum(delta).eigenvalues
    powers = values**n
    kernel = ParityKernel.combine(self.component_kernels(delta), powers)
    tr_a = float(kernel.value(self.total_phase(phase))[0])
    return tr_a, float(np.sum(powers))


# ---------------------------------------------------------------------------
# Cached spectrum construction.


def _normalize_columns(
    weights: np.ndarray, vectors: np.ndarray, tolerance: float
) -> np.ndarray:
  """Rescales truncated eigenvectors to unit norm.

  The accepted deficit is the trace lost by the truncated state,
  sum_k w_k (1 - |v_k|^2) / sum_k w_k, so heavily truncated columns with
  negligible weight do not fail the check.
  """
  norms_sq = np.sum(np.abs(vectors) ** 2, axis=0)
  deficit = float(np.dot(weights, 1.0 - norms_sq) / np.sum(weights))
  if deficit > tolerance:
    raise exceptions.TruncationError(
        f"probe eigenvector truncation deficit {deficit:.3e} exceeds"
        f" {tolerance:.1e}",
        deficit=deficit,
    )
  if deficit > 1e-10:
    logging.debug("Renormalising probe vectors (trace deficit %.3e)", deficit)
  return vectors / np.sqrt(norms_sq)


def _keep_leading(values: np.ndarray, vectors: np.ndarray) -> ProbeSpectrum:
  order = np.argsort(values)[::-1]
  values = np.clip(values[order], 0.0, None)
  vectors = vectors[:, order]
  total = float(np.sum(values))
  remaining = total - np.cumsum(values)
  keep = int(np.searchsorted(-remaining, -SPECTRUM_TAIL * total)) + 1
  keep = min(max(keep, 1), values.size)
  spectrum = ProbeSpectrum(values[:keep], vectors[:, :keep])
  spectrum.eigenvalues.setflags(write=False)
  return spectrum


def _eigh_spectrum(rho: fock.DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
  decomposition = fock.eig(rho)
  return np.array(decomposition.eigenvalues), np.array(decomposition.vectors)


def _phase_rotations(
    rho: fock.DensityMatrix,
) -> Callable[[float], fock.DensityMatrix]:
  """x -> Phi(x) rho Phi(x)^dag using the diagonal form of Phi."""
  space = rho.space

  def rotated(x: float) -> fock.DensityMatrix:
    d = fock.phase_diagonal(space, x)
    return fock.DensityMatrix.from_array(
        space, rho.matrix * np.outer(d, d.conj())
    )

  return rotated


def _noon_noisy_probe(scenario: Scenario, delta: float) -> fock.DensityMatrix:
  space = scenario.space
  n_photons = scenario.probe.n_photons
  closed = scenario.method is types.ChannelMethod.CLOSED_FORM
  probe = fock.noon_state(space, n_photons).to_density()
  if scenario.noise_type is types.NoiseType.PHASE_DIFFUSION:
    if closed:
      return noise.noon_dephased_probe(space, n_photons, delta)

    return noise.phase_diffusion_quadrature(_phase_rotations(probe), delta)
  if scenario.noise_type is types.NoiseType.PHOTON_LOSS:
    if closed:
      return noise.noon_lossy_probe(space, n_photons, delta)
    return noise.photon_loss(probe, delta)
  sigma_x, sigma_p = noise.gaussian_widths(delta, 0.0)
  return noise.additive_gaussian(probe, sigma_x, sigma_p, mode=2)


def _cs_mode_states(
    scenario: Scenario, delta: float
) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
  """(values, vectors) of the coherent and squeezed modes after noise."""
  probe = scenario.probe
  levels = scenario.space.levels
  alpha, r = probe.alpha, probe.squeezing
  coherent = (np.ones(1), fock.coherent_amplitudes(levels, alpha)[:, None])
  numeric = scenario.method is types.ChannelMethod.NUMERIC
  if scenario.noise_type is types.NoiseType.PHOTON_LOSS:
    if not numeric:
      eta = 1.0 - delta
      coherent = (
          np.ones(1),
          fock.coherent_amplitudes(levels, math.sqrt(eta) * alpha)[:, None],
      )
      n_bar, r_bar = noise.loss_squeezed_thermal_parameters(r, delta)
      return coherent, noise.squeezed_thermal_components(levels, r_bar, n_bar)
    working = fock.make_space(
        _CS_WORKING_FACTOR * levels - 1, trace_tolerance=1e-2, num_modes=1
    )
    modes = []
    for amps in (
        fock.coherent_amplitudes(working.levels, alpha),
        fock.squeezed_columns(working.levels, r, 0)[:, 0],
    ):
      rho = fock.mixture(working, [1.0], amps[:, None])
      values, vectors = _eigh_spectrum(noise.photon_loss(rho, delta, (1,)))
      spectrum = _keep_leading(values, vectors)
      modes.append((np.array(spectrum.eigenvalues), spectrum.vectors[:levels]))
    return modes[0], modes[1]
  if scenario.noise_type is types.NoiseType.ADDITIVE_GAUSSIAN:
    if not numeric:
      return coherent, noise.squeezed_thermal_components(levels, r, delta)
    single = scenario.space.single_mode()
    squeezed = fock.squeezed_columns(levels, r, 0)
    rho = fock.mixture(single, [1.0], squeezed)
    sigma_x, sigma_p = noise.gaussian_widths(delta, r)
    values, vectors = _eigh_spectrum(
        noise.additive_gaussian(rho, sigma_x, sigma_p, mode=1)
    )
    spectrum = _keep_leading(values, vectors)
    return coherent, (np.array(spectrum.eigenvalues), spectrum.vectors)
  raise ValueError(f"{scenario.noise_type} has no single-mode form")


def _cs_product_spectrum(scenario: Scenario, delta: float) -> ProbeSpectrum:
  (mu, u), (nu, v) = _cs_mode_states(scenario, delta)
  values = np.outer(mu, nu).reshape(-1)
  vectors = np.einsum("ai,bj->abij", u, v).reshape(u.shape[0] * v.shape[0], -1)
  spectrum = _keep_leading(values, vectors)
  space = scenario.space
  vectors = _normalize_columns(
      spectrum.eigenvalues, spectrum.vectors, space.trace_tolerance
  )
  return ProbeSpectrum(
      spectrum.eigenvalues, fock.beam_splitter(space) @ vectors
  )


@functools.lru_cache(maxsize=256)
@debug_utils.debug_log_calls
def _probe_spectrum(scenario: Scenario, delta: float) -> ProbeSpectrum:
  space = scenario.space
  if delta == 0:
    psi = scenario.ideal_probe().amplitudes[:, None]
    return ProbeSpectrum(np.ones(1), _normalize_columns(np.ones(1), psi, 1.0))
  if isinstance(scenario.probe, CoherentSqueezedProbe) and (
      scenario.noise_type is not types.NoiseType.PHASE_DIFFUSION
  ):
    return _cs_product_spectrum(scenario, delta)
  if isinstance(scenario.probe, NoonProbe):
    rho = _noon_noisy_probe(scenario, delta)
  else:
    pure = scenario.ideal_probe().to_density()
    rho = noise.phase_diffusion_quadrature(_phase_rotations(pure), delta)
  values, vectors = _eigh_spectrum(rho)
  spectrum = _keep_leading(values, vectors)
  if spectrum.dominant_gap < fock.DEGENERACY_GAP:
    logging.warning(
        "Degenerate dominant eigenvalue for %s at delta=%g",
        scenario.scenario_id,
        delta,
    )
  return spectrum


def _cs_closed_form_dominant(scenario: Scenario, delta: float) -> float:
  if scenario.noise_type is types.NoiseType.PHOTON_LOSS:
    n_bar, _ = noise.loss_squeezed_thermal_parameters(
        scenario.probe.squeezing, delta
    )
    return 1.0 / (1.0 + n_bar)
  if scenario.noise_type is types.NoiseType.ADDITIVE_GAUSSIAN:
    return 1.0 / (1.0 + delta)
  return float(scenario.probe_spectrum(delta).eigenvalues[0])


@functools.lru_cache(maxsize=256)
def _component_kernels(scenario: Scenario, delta: float) -> np.ndarray:
  spectrum = scenario.probe_spectrum(delta)
  kernels = _kernels(scenario.space.levels, spectrum.vectors)
  kernels.setflags(write=False)
  return kernels


@functools.lru_cache(maxsize=32)
def _ideal_kernel(scenario: Scenario) -> ParityKernel:
  return ParityKernel(_component_kernels(scenario, 0.0)[0])


@functools.lru_cache(maxsize=64)
def _delta_for_lambda(scenario: Scenario, lambda_target: float) -> float:
  return noise.delta_for_lambda(
      scenario, lambda_target, bracket=scenario.strength_bracket()
  )
