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

"""Virtual purification of noisy probe states.

The mitigated expectation of an observable A at order n is

  Tr[A rho^n] / Tr[rho^n],

estimated from two circuits: the A-circuit, whose +/-1 outcomes average to
Tr[A rho^n], and the I-circuit, whose outcomes average to Tr[rho^n]. The
circuits are emulated at the level of outcome statistics: a run of
``n_shots`` single-shot outcomes is one binomial draw.
"""

from __future__ import annotations

import dataclasses

from absl import logging
import numpy as np

from vpemlab.core import exceptions
from vpemlab.core import fock

__all__ = [
    "CircuitShots",
    "dominant_eigenpair",
    "circuit_expectations",
    "mitigated_expectation",
    "mitigated_dominant_eigenvalue",
    "shots_per_circuit",
    "derive_seed",
    "sample_outcome_mean",
    "sample_expectations",
    "sample_circuits",
    "estimate_mitigated_from_shots",
]

PROBABILITY_TOL = 1e-12
INVOLUTION_TOL = 1e-10
MIN_POWER_TRACE = 1e-30
SENSITIVITY_FLOOR = 1e-6


@dataclasses.dataclass(frozen=True, slots=True)
class CircuitShots:
  """Outcome averages of one A-circuit run and one I-circuit run.

  Attributes:
    n: Mitigation order.
    n_shots: Shots per circuit.
    z_a_mean: Average of the A-circuit outcomes.
    z_i_mean: Average of the I-circuit outcomes.
    seed: Seed the outcomes were drawn with.
  """

  n: int
  n_shots: int
  z_a_mean: float
  z_i_mean: float
  seed: int


def dominant_eigenpair(
    rho: fock.DensityMatrix,
) -> tuple[float, fock.PureState, float]:
  """(lambda, psi, gap) for the largest eigenvalue of ``rho``.

  A degenerate top eigenvalue is logged by ``fock.eig`` and not fatal.
  """
  decomposition = fock.eig(rho)
  return (
      float(decomposition.eigenvalues[0]),
      decomposition.dominant,
      decomposition.dominant_gap,
  )


def _check_involutory(observable: fock.Observable) -> None:
  matrix = observable.matrix
  square = matrix @ matrix
  residual = float(np.max(np.abs(square - np.eye(matrix.shape[0]))))
  if not observable.is_involutory or residual > INVOLUTION_TOL:
    raise ValueError(
        "circuit outcomes are +/-1 only for involutory observables"
        f" (|A^2 - I|_max = {residual:.3e})"
    )


def _weighted_expectations(
    decomposition: fock.EigenDecomposition, observable: fock.Observable
) -> np.ndarray:
  """<v_k|A|v_k> for every eigenvector."""
  vectors = decomposition.vectors
  diag = observable.diagonal
  if diag is not None:
    values = np.sum(diag[:, None] * np.abs(vectors) ** 2, axis=0)
  else:
    values = np.einsum(
        "ik,ij,jk->k", vectors.conj(), observable.matrix, vectors
    )
  return np.real(values)


def circuit_expectations(
    rho: fock.DensityMatrix, observable: fock.Observable, n: int
) -> tuple[float, float]:
  """Exact outcome means (Tr[A rho^n], Tr[rho^n]) of the two circuits.

  Raises:
    ValueError: If the observable is not involutory or n < 1.
  """
  if n < 1:
    raise ValueError(f"mitigation order must be >= 1, got {n}")
  fock.check_same_space(observable.space, rho.space)
  _check_involutory(observable)
  decomposition = fock.eig(rho)
  powers = decomposition.eigenvalues**n
  parities = _weighted_expectations(decomposition, observable)
  return float(np.sum(powers * parities)), float(np.sum(powers))


def mitigated_expectation(
    rho: fock.DensityMatrix, observable: fock.Observable, n: int
) -> float:
  """Tr[A rho^n] / Tr[rho^n].

  Raises:
    NumericalConsistencyError: If Tr[rho^n] vanishes.
  """
  tr_a, tr_i = circuit_expectations(rho, observable, n)
  if tr_i <= MIN_POWER_TRACE:
    raise exceptions.NumericalConsistencyError(
        f"Tr[rho^{n}] = {tr_i:.3e} vanishes"
    )
  return tr_a / tr_i


def mitigated_dominant_eigenvalue(
    decomposition: fock.EigenDecomposition, n: int
) -> float:
  """Dominant eigenvalue of rho^n / Tr[rho^n].

  With p_k = lambda_k / (1 - lambda) the tail distribution, this is
  1 / (1 + ((1 - lambda) / lambda)^n sum_k p_k^n).
  """
  values = np.asarray(decomposition.eigenvalues, dtype=float)
  lam = float(values[0])
  tail = float(np.sum(values[1:]))
  if tail <= 0.0:
    return 1.0
  p = values[1:] / tail
  return 1.0 / (1.0 + (tail / lam) ** n * float(np.sum(p**n)))


def shots_per_circuit(n_samples: int, n: int) -> int:
  """N_s // (2n): each of the two circuits costs n copies per shot."""
  per_circuit = n_samples // (2 * n)
  if per_circuit < 1:
    raise ValueError(
        f"{n_samples} samples leave no shots per circuit at order {n}"
    )
  return per_circuit


def derive_seed(seed: int, scenario_key: int, index: int) -> int:
  """Per-grid-point seed independent of scheduling order."""
  sequence = np.random.SeedSequence([seed, scenario_key, index])
  return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_outcome_mean(
    expectation: float, n_shots: int, rng: np.random.Generator
) -> float:
  """Average of ``n_shots`` +/-1 outcomes with the given mean.

  Raises:
    ValueError: If (1 + expectation) / 2 leaves [0, 1] by more than 1e-12.
  """
  p = 0.5 * (1.0 + expectation)
  if p < -PROBABILITY_TOL or p > 1.0 + PROBABILITY_TOL:
    raise ValueError(
        f"outcome probability {p!r} outside [0, 1]; expectation"
        f" {expectation!r} is not a valid +/-1 mean"
    )
  p = min(max(p, 0.0), 1.0)
  k = int(rng.binomial(n_shots, p))
  return (2 * k - n_shots) / n_shots


def sample_expectations(
    tr_a: float, tr_i: float, n: int, n_shots: int, seed: int
) -> CircuitShots:
  """Draws both circuits from their exact means."""
  if n_shots < 1:
    raise ValueError(f"n_shots must be >= 1, got {n_shots}")
  rng = np.random.default_rng(seed)
  z_a = sample_outcome_mean(tr_a, n_shots, rng)
  z_i = sample_outcome_mean(tr_i, n_shots, rng)
  return CircuitShots(n, n_shots, z_a, z_i, seed)


def sample_circuits(
    rho: fock.DensityMatrix,
    observable: fock.Observable,
    n: int,
    n_shots: int,
    seed: int,
) -> CircuitShots:
  tr_a, tr_i = circuit_expectations(rho, observable, n)
  return sample_expectations(tr_a, tr_i, n, n_shots, seed)


def estimate_mitigated_from_shots(
    shots: CircuitShots, x_id: float, y_id: float
) -> float:
  """(z_a / z_i - x_id) / y_id.

  Raises:
    RatioError: If every I-circuit outcome cancelled.
    DegenerateSensitivityError: If |y_id| <= 1e-6.
  """
  if shots.z_i_mean == 0:
    raise exceptions.RatioError(
        f"I-circuit mean is 0 over {shots.n_shots} shots (seed {shots.seed})"
    )
  if abs(y_id) <= SENSITIVITY_FLOOR:
    raise exceptions.DegenerateSensitivityError(
        f"ideal slope {y_id:.3e} too small to invert"
    )
  ratio = shots.z_a_mean / shots.z_i_mean
  if abs(ratio) > 1.0:
    logging.debug("Sampled mitigated ratio %.6g outside [-1, 1]", ratio)
  return (ratio - x_id) / y_id
