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

"""Linear phase estimators, their bias and mean squared error.

Every estimator inverts the ideal linear response around the reference
point phi0,

  phi_est = (mean_outcome - x_id(phi0)) / y_id(phi0),

whether the outcomes come from the ideal, the noisy or the mitigated state.
Feeding a noisy state through the ideal calibration is what produces the
bias studied here.

Bias is <phi_est> - phi, so it contains the O(phi^2) curvature the ideal
estimator has on its own as well as the deviation caused by the noise.
``bias_noise`` keeps the second part alone,
(Tr[A rho(phi + phi0)] - Tr[A rho_id(phi + phi0)]) / y_id, which is zero
without noise.

The perturbative analysis expands, in powers of the noise strength Delta,

  lambda       = 1 - sum_k lambda_k Delta^k
  <psi|A|psi>  = x_id + sum_k a_k Delta^k        (dominant eigenvector)
  tail average = x_id + sum_k b_k Delta^k        (remaining eigenvectors)

and the error-state bias coefficients follow as

  f_k = a_k - sum_{l<k} lambda_l a_{k-l} + sum_{l<=k} lambda_l b_{k-l}.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Mapping, NamedTuple, Sequence

from absl import logging
import numpy as np
from scipy import linalg

from vpemlab import scenario as scenario_lib
from vpemlab import vpem
from vpemlab.core import debug_utils
from vpemlab.core import exceptions
from vpemlab.core import types

__all__ = [
    "Linearization",
    "BiasReport",
    "SeriesCoefficients",
    "LeadingOrder",
    "linearize",
    "ideal_linearization",
    "estimate",
    "bias_exact",
    "mse",
    "sampled_estimate",
    "series_coefficients",
    "bias_leading_order",
    "classify_case",
    "default_series_grid",
]

DEFAULT_STEP = 1e-4
MIN_STEP = 1e-6
MAX_STEP = 1e-2
RICHARDSON_TOL = 1e-6
SENSITIVITY_FLOOR = 1e-6
NEGLIGIBLE_COEFFICIENT = 1e-8
FIT_TOL = 1e-6
# Absolute floor on the data scale of a series fit, so series that vanish
# identically are judged by absolute residual.
_FIT_SCALE_FLOOR = 1e-6
_SERIES_GRID_POINTS = 24
_SERIES_MIN_DELTA = 1e-4
_SERIES_LAMBDA = 0.9


@dataclasses.dataclass(frozen=True, slots=True)
class Linearization:
  """Intercept and slope of an expectation value around ``phi0``.

  ``step`` is the finite-difference step used; 0 for analytic slopes.
  """

  x: float
  y: float
  phi0: float
  step: float


@dataclasses.dataclass(frozen=True, slots=True)
class BiasReport:
  """Bias and MSE of one estimator at one grid point.

  Attributes:
    phi: True small phase.
    phi0: Reference point.
    delta: Noise strength.
    n: Mitigation order; 1 is the unmitigated noisy estimator.
    kind: Which estimator the report describes.
    bias: <phi_est> - phi.
    bias_sq: bias**2.
    mse: bias_sq + statistical_term.
    statistical_term: Variance term of the MSE formula, or NaN if no shot
      count was given.
    exact_expectation: Expectation value fed to the estimator.
    lambda_dominant: Dominant eigenvalue of the noisy state.
    bias_linearized: Bias from the intercept and slope at phi0, without
      O(phi^2) terms.
    bias_noise: Part of the bias caused by the noise; zero without noise.
    sampled_estimate: phi_est from emulated shots, if requested.
  """

  phi: float
  phi0: float
  delta: float
  n: int
  kind: types.EstimatorKind
  bias: float
  bias_sq: float
  mse: float
  statistical_term: float
  exact_expectation: float
  lambda_dominant: float
  bias_linearized: float
  bias_noise: float
  sampled_estimate: float | None = None


@dataclasses.dataclass(frozen=True, eq=False)
class SeriesCoefficients:
  """Fitted Delta-series at one reference point.

  Arrays are indexed by the power of Delta, so ``a_k[1]`` is a_1; entries
  at index 0 are zero except for ``b_k``. The ``d*`` arrays hold the
  phi-derivatives of the matching coefficients.

  Attributes:
    phi0: Reference point.
    x_id: Ideal intercept at phi0.
    y_id: Ideal slope at phi0.
    lambda_k: Coefficients of 1 - lambda.
    a_k: Dominant-eigenvector parity shift.
    b_k: Tail-average parity shift, b_0 first.
    f_k: Error-state parity shift assembled from the three series.
    da_k: d a_k / d phi.
    db_k: d b_k / d phi.
    df_k: d f_k / d phi.
    direct: Order n -> (x_k, y_k), fits of the noisy (n = 1) or mitigated
      intercept and slope shifts taken directly from the states.
    delta_grid: Strengths the fits used.
    fit_residual: Largest relative residual over all fits.
  """

  phi0: float
  x_id: float
  y_id: float
  lambda_k: np.ndarray
  a_k: np.ndarray
  b_k: np.ndarray
  f_k: np.ndarray
  da_k: np.ndarray
  db_k: np.ndarray
  df_k: np.ndarray
  direct: Mapping[int, tuple[np.ndarray, np.ndarray]]
  delta_grid: np.ndarray
  fit_residual: float

  @property
  def max_order(self) -> int:
    return len(self.a_k) - 1


class LeadingOrder(NamedTuple):
  """First non-negligible power of Delta in a linearized bias.

  ``order`` is math.inf when every fitted coefficient is negligible.
  """

  order: float
  coefficient: float


# ---------------------------------------------------------------------------
# Linearization.


def linearize(
    expectation_fn: Callable[[float], float],
    phi0: float,
    step: float = DEFAULT_STEP,
) -> Linearization:
  """Intercept and Richardson-extrapolated central-difference slope.

  Raises:
    ValueError: If ``step`` is outside [1e-6, 1e-2].
    NonSmoothError: If the extrapolated slopes at steps h and h/2 disagree
      by more than 1e-6.
  """
  if not MIN_STEP <= step <= MAX_STEP:
    raise ValueError(f"step must lie in [{MIN_STEP}, {MAX_STEP}], got {step}")

  def central(h: float) -> float:
    return (expectation_fn(phi0 + h) - expectation_fn(phi0 - h)) / (2 * h)

  coarse, mid, fine = central(step), central(step / 2), central(step / 4)
  first = (4 * mid - coarse) / 3
  second = (4 * fine - mid) / 3
  if abs(first - second) > RICHARDSON_TOL * max(1.0, abs(second)):
    raise exceptions.NonSmoothError(
        f"slope at phi0={phi0} changes from {first!r} to {second!r} when the"
        " step is halved"
    )
  return Linearization(float(expectation_fn(phi0)), float(second), phi0, step)


def ideal_linearization(
    scenario: scenario_lib.Scenario, phi0: float
) -> Linearization:
  """Exact x_id(phi0) and y_id(phi0) from the ideal parity kernel."""
  x = float(scenario.ideal_parity(phi0)[0])
  y = float(scenario.ideal_slope(phi0)[0])
  return Linearization(x, y, phi0, 0.0)


def _check_sensitivity(lin: Linearization) -> None:
  if abs(lin.y) <= SENSITIVITY_FLOOR:
    raise exceptions.DegenerateSensitivityError(
        f"ideal slope {lin.y:.3e} at phi0={lin.phi0:.6g} too small to invert"
    )


def estimate(
    kind: types.EstimatorKind, mean_outcome: float, lin_id: Linearization
) -> float:
  """(mean_outcome - x_id) / y_id; every estimator uses the ideal line."""
  if not isinstance(kind, types.EstimatorKind):
    raise ValueError(f"unknown estimator kind {kind!r}")
  _check_sensitivity(lin_id)
  return (mean_outcome - lin_id.x) / lin_id.y


# ---------------------------------------------------------------------------
# Bias and MSE.


def _kind_for_order(n: int) -> types.EstimatorKind:
  return types.EstimatorKind.ERROR if n == 1 else types.EstimatorKind.MITIGATED


def _statistical_term(
    scenario: scenario_lib.Scenario,
    kind: types.EstimatorKind,
    theta_phase: float,
    delta: float,
    n: int,
    n_samples: int,
    y_id: float,
) -> float:
  if kind is types.EstimatorKind.IDEAL:
    x = float(scenario.ideal_parity(theta_phase)[0])
    return (1.0 - x * x) / (n_samples * y_id**2)
  if kind is types.EstimatorKind.ERROR:
    tr_a, tr_rho = scenario.circuit_means(theta_phase, delta, 1)
    return (tr_rho - tr_a * tr_a) / (n_samples * y_id**2)
  tr_a, tr_i = scenario.circuit_means(theta_phase, delta, n)
  per_circuit = vpem.shots_per_circuit(n_samples, n)
  bracket = (1.0 - tr_a**2) / tr_i**2 + tr_a**2 * (1.0 - tr_i**2) / tr_i**4
  return bracket / (per_circuit * y_id**2)


@debug_utils.debug_log_calls
def bias_exact(
    scenario: scenario_lib.Scenario,
    phi: float,
    phi0: float,
    delta: float,
    n: int = 1,
    kind: types.EstimatorKind | None = None,
) -> BiasReport:
  """Exact bias of the estimator at (phi, phi0, delta).

  ``n`` = 1 evaluates the noisy estimator and n >= 2 the mitigated one,
  unless ``kind`` asks for the ideal estimator. The MSE fields are NaN; see
  ``mse``.

  Raises:
    DegenerateSensitivityError: If |y_id(phi0)| <= 1e-6.
  """
  if n < 1:
    raise ValueError(f"mitigation order must be >= 1, got {n}")
  kind = kind or _kind_for_order(n)
  lin = ideal_linearization(scenario, phi0)
  _check_sensitivity(lin)
  ideal_value = float(scenario.ideal_parity(phi + phi0)[0])
  if kind is types.EstimatorKind.IDEAL:
    value, x0, y0, lam = ideal_value, lin.x, lin.y, 1.0
  else:
    value = float(scenario.parity(phi + phi0, delta, n)[0])
    x0 = float(scenario.parity(phi0, delta, n)[0])
    y0 = float(scenario.parity_slope(phi0, delta, n)[0])
    lam = scenario.dominant_eigenvalue(delta)
  bias = (value - lin.x) / lin.y - phi
  return BiasReport(
      phi=phi,
      phi0=phi0,
      delta=delta,
      n=n,
      kind=kind,
      bias=bias,
      bias_sq=bias * bias,
      mse=math.nan,
      statistical_term=math.nan,
      exact_expectation=value,
      lambda_dominant=lam,
      bias_linearized=(x0 - lin.x + (y0 - lin.y) * phi) / lin.y,
      bias_noise=(value - ideal_value) / lin.y,
  )


def mse(
    kind: types.EstimatorKind,
    scenario: scenario_lib.Scenario,
    phi: float,
    phi0: float,
    delta: float,
    n: int,
    n_samples: int,
) -> BiasReport:
  """Bias report with the MSE formula filled in.

  Ideal: V[A]/(N_s y_id^2). Noisy: B^2 + V[A]_rho_e/(N_s y_id^2).
  Mitigated, with N_s,mit = N_s // (2n) shots per circuit,
  A_n = Tr[A rho^n] and I_n = Tr[rho^n]:

    B^2 + [(1 - A_n^2)/I_n^2 + A_n^2 (1 - I_n^2)/I_n^4] / (N_s,mit y_id^2).
  """
  if n_samples < 1:
    raise ValueError(f"N_s must be >= 1, got {n_samples}")
  report = bias_exact(scenario, phi, phi0, delta, n, kind)
  lin = ideal_linearization(scenario, phi0)
  term = _statistical_term(
      scenario, kind, phi + phi0, delta, n, n_samples, lin.y
  )
  return dataclasses.replace(
      report, statistical_term=term, mse=report.bias_sq + term
  )


def sampled_estimate(
    kind: types.EstimatorKind,
    scenario: scenario_lib.Scenario,
    phi: float,
    phi0: float,
    delta: float,
    n: int,
    n_samples: int,
    seed: int,
) -> float:
  """phi_est from emulated outcomes drawn with ``seed``.

  The ideal and noisy estimators spend all N_s shots on one parity
  measurement; the mitigated one splits them over the two circuits.
  """
  lin = ideal_linearization(scenario, phi0)
  theta_phase = phi + phi0
  if kind is types.EstimatorKind.MITIGATED:
    tr_a, tr_i = scenario.circuit_means(theta_phase, delta, n)
    shots = vpem.sample_expectations(
        tr_a, tr_i, n, vpem.shots_per_circuit(n_samples, n), seed
    )
    return vpem.estimate_mitigated_from_shots(shots, lin.x, lin.y)
  if kind is types.EstimatorKind.IDEAL:
    mean = float(scenario.ideal_parity(theta_phase)[0])
  else:
    mean = float(scenario.parity(theta_phase, delta, 1)[0])
  rng = np.random.default_rng(seed)
  return estimate(kind, vpem.sample_outcome_mean(mean, n_samples, rng), lin)


# ---------------------------------------------------------------------------
# Delta-series.


def _fit_series(
    deltas: np.ndarray, values: np.ndarray, powers: Sequence[int]
) -> tuple[np.ndarray, float]:
  """Least-squares fit sum_p c_p Delta^p; returns (c by power, residual)."""
  top = float(np.max(deltas))
  scaled = deltas / top
  design = np.column_stack([scaled**p for p in powers])
  coefs, *_ = np.linalg.lstsq(design, values, rcond=None)
  scale = max(float(np.max(np.abs(values))), _FIT_SCALE_FLOOR)
  residual = float(np.max(np.abs(design @ coefs - values))) / scale
  out = np.zeros(max(powers) + 1)
  for p, c in zip(powers, coefs):
    out[p] = c / top**p
  return out, residual


def _divide_series(
    numerator: np.ndarray, denominator: np.ndarray, count: int
) -> np.ndarray:
  """First ``count`` coefficients of numerator / denominator.

  Both series vanish at Delta = 0 and the denominator's linear
  coefficient must not.

  Raises:
    FitError: If the denominator has no linear term.
  """
  if abs(denominator[1]) <= _FIT_SCALE_FLOOR:
    raise exceptions.FitError(
        f"tail weight has linear coefficient {denominator[1]:.3e}"
    )
  lower = linalg.toeplitz(denominator[1 : count + 1], np.zeros(count))
  return linalg.solve_triangular(
      lower, numerator[1 : count + 1], lower=True
  )


def _assemble_f(
    lambda_k: np.ndarray, a_k: np.ndarray, b_k: np.ndarray, max_order: int
) -> np.ndarray:
  f = np.zeros(max_order + 1)
  for k in range(1, max_order + 1):
    f[k] = (
        a_k[k]
        - sum(lambda_k[l] * a_k[k - l] for l in range(1, k))
        + sum(lambda_k[l] * b_k[k - l] for l in range(1, k + 1))
    )
  return f


def default_series_grid(scenario: scenario_lib.Scenario) -> np.ndarray:
  """Log grid on [1e-4, Delta(lambda = 0.9) / 4]."""
  top = scenario.delta_for_lambda(_SERIES_LAMBDA) / 4
  return np.geomspace(_SERIES_MIN_DELTA, top, _SERIES_GRID_POINTS)


@debug_utils.debug_log_calls
def series_coefficients(
    scenario: scenario_lib.Scenario,
    phi0: float,
    max_order: int = 3,
    delta_grid: Sequence[float] | None = None,
    mitigation_orders: Sequence[int] = (2, 3),
) -> SeriesCoefficients:
  """Fits the lambda-, a-, b- and direct series at ``phi0``.

  Each series is fitted with polynomial degree max_order + 2 so the orders
  of interest are not polluted by the neglected tail. Slopes in phi come
  from the analytic derivative of the parity kernels. The tail series is
  fitted multiplied by the tail weight and divided afterwards, as a power
  series, so a tail that vanishes with Delta does not amplify round-off.

  Raises:
    FitError: If any fit leaves a residual above 1e-6 of its data scale.
  """
  if max_order < 1:
    raise ValueError(f"max_order must be >= 1, got {max_order}")
  deltas = (
      default_series_grid(scenario)
      if delta_grid is None
      else np.asarray(delta_grid, dtype=float)
  )
  if deltas.size < 2 * max_order + 1 or np.any(deltas <= 0):
    raise ValueError(
        f"need at least {2 * max_order + 1} positive strengths, got"
        f" {deltas.size}"
    )
  lin = ideal_linearization(scenario, phi0)
  theta = scenario.total_phase(phi0)
  orders = sorted({1, *mitigation_orders})

  lam = np.empty(deltas.size)
  weight = np.empty(deltas.size)
  a = np.empty(deltas.size)
  da = np.empty(deltas.size)
  b = np.empty(deltas.size)
  db = np.empty(deltas.size)
  direct_x = {n: np.empty(deltas.size) for n in orders}
  direct_y = {n: np.empty(deltas.size) for n in orders}
  for i, delta in enumerate(deltas):
    values = scenario.probe_spectrum(delta).eigenvalues
    lam[i] = values[0]
    tail = float(np.sum(values[1:]))
    dominant = scenario.dominant_kernel(delta)
    x_dom = float(dominant.value(theta)[0])
    y_dom = float(dominant.derivative(theta)[0])
    a[i] = x_dom - lin.x
    da[i] = y_dom - lin.y
    noisy = scenario.kernel(delta, 1)
    x_e = float(noisy.value(theta)[0])
    y_e = float(noisy.derivative(theta)[0])
    # Tail-weighted so the fit never divides by a vanishing tail.
    weight[i] = tail
    b[i] = x_e - lam[i] * x_dom - tail * lin.x
    db[i] = y_e - lam[i] * y_dom - tail * lin.y
    for n in orders:
      kernel = scenario.kernel(delta, n)
      direct_x[n][i] = float(kernel.value(theta)[0]) - lin.x
      direct_y[n][i] = float(kernel.derivative(theta)[0]) - lin.y

  degree = max_order + 2
  residuals = []

  def fit(values: np.ndarray) -> np.ndarray:
    coefs, residual = _fit_series(deltas, values, range(1, degree + 1))
    residuals.append(residual)
    return coefs

  keep = max_order + 1
  lambda_k = fit(1.0 - lam)[:keep]
  a_k, da_k = fit(a)[:keep], fit(da)[:keep]
  weight_k = fit(weight)
  b_k = _divide_series(fit(b), weight_k, keep)
  db_k = _divide_series(fit(db), weight_k, keep)
  direct = {
      n: (fit(direct_x[n])[:keep], fit(direct_y[n])[:keep]) for n in orders
  }
  worst = max(residuals)
  if worst > FIT_TOL:
    raise exceptions.FitError(
        f"series fit at phi0={phi0} left relative residual {worst:.3e}",
        residual=worst,
    )
  logging.debug(
      "Series fit for %s at phi0=%g: residual %.3e",
      scenario.scenario_id,
      phi0,
      worst,
  )
  return SeriesCoefficients(
      phi0=phi0,
      x_id=lin.x,
      y_id=lin.y,
      lambda_k=lambda_k,
      a_k=a_k,
      b_k=b_k,
      f_k=_assemble_f(lambda_k, a_k, b_k, max_order),
      da_k=da_k,
      db_k=db_k,
      df_k=_assemble_f(lambda_k, da_k, db_k, max_order),
      direct=direct,
      delta_grid=deltas,
      fit_residual=worst,
  )


def _negligible(
    series: SeriesCoefficients, coefficient: float, k: int, threshold: float
) -> bool:
  """True if c_k Delta^k stays below ``threshold`` over the fitted range."""
  top = float(np.max(series.delta_grid))
  return abs(coefficient) * top**k <= threshold


def bias_leading_order(
    series: SeriesCoefficients,
    mitigated: bool,
    phi: float,
    n: int = 2,
    threshold: float = NEGLIGIBLE_COEFFICIENT,
) -> LeadingOrder:
  """First power of Delta with a non-negligible linearized-bias coefficient.

  A term is negligible when |c_k| Delta_max^k is at most ``threshold``, with
  Delta_max the largest fitted strength.

  The noisy estimator's coefficients are (f_k + phi df_k) / y_id. Below
  order n the mitigated bias consists of the a-series alone; from order n
  on it is read from the direct fit of the mitigated state.
  """
  y = series.y_id
  if not mitigated:
    for k in range(1, series.max_order + 1):
      c = (series.f_k[k] + phi * series.df_k[k]) / y
      if not _negligible(series, c, k, threshold):
        return LeadingOrder(k, float(c))
    return LeadingOrder(math.inf, 0.0)
  if n not in series.direct:
    raise ValueError(f"order {n} was not fitted; have {sorted(series.direct)}")
  for k in range(1, min(n, series.max_order + 1)):
    c = (series.a_k[k] + phi * series.da_k[k]) / y
    if not _negligible(series, c, k, threshold):
      return LeadingOrder(k, float(c))
  x_k, y_k = series.direct[n]
  for k in range(n, series.max_order + 1):
    c = (x_k[k] + phi * y_k[k]) / y
    if not _negligible(series, c, k, threshold):
      return LeadingOrder(k, float(c))
  return LeadingOrder(math.inf, 0.0)


def classify_case(
    series: SeriesCoefficients,
    phi: float = 0.0,
    threshold: float = NEGLIGIBLE_COEFFICIENT,
) -> types.MitigationCase:
  """Efficacy case from the first non-negligible a_k + phi da_k."""
  for k in range(1, series.max_order + 1):
    c = series.a_k[k] + phi * series.da_k[k]
    if not _negligible(series, c, k, threshold):
      if k == 1:
        return types.MitigationCase.CASE_2
      return types.MitigationCase.CASE_3
  return types.MitigationCase.CASE_1
