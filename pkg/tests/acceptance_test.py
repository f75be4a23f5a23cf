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

"""End-to-end checks of the published mitigation behaviour.

These tests sweep whole scenarios through the estimation and reference
point layers. The coherent-squeezed sweeps diagonalize large truncated
states and are marked slow.
"""

import math

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np
import pytest

from vpemlab import estimation
from vpemlab import refpoint
from vpemlab import scenario as scenario_lib
from vpemlab.core import types

_N = 5
_DIFFUSION = types.NoiseType.PHASE_DIFFUSION
_LOSS = types.NoiseType.PHOTON_LOSS
_GAUSSIAN = types.NoiseType.ADDITIVE_GAUSSIAN


def _noon(noise_type):
  return scenario_lib.Scenario(scenario_lib.NoonProbe(_N), noise_type)


def _cs(noise_type):
  return scenario_lib.Scenario(scenario_lib.CoherentSqueezedProbe(), noise_type)


def _phi_grid():
  grid = np.linspace(-0.01, 0.01, 21)
  return grid[np.abs(grid) > 1e-12]


def _bias_sq(scenario, phi, phi0, delta, n):
  return estimation.bias_exact(scenario, phi, phi0, delta, n).bias_sq


class NoonOrderingTest(parameterized.TestCase):

  @parameterized.product(noise_type=[_DIFFUSION, _LOSS], lam=[0.8, 0.85, 0.9])
  def test_higher_orders_never_lose(self, noise_type, lam):
    scenario = _noon(noise_type)
    delta = scenario.delta_for_lambda(lam)
    phi0 = {
        n: refpoint.optimal_reference(scenario, delta, n) for n in (1, 2, 3)
    }
    for phi in _phi_grid():
      b1, b2, b3 = (
          _bias_sq(scenario, phi, phi0[n], delta, n) for n in (1, 2, 3)
      )
      self.assertGreaterEqual(b1, b2, f"phi={phi}")
      self.assertGreaterEqual(b2, b3, f"phi={phi}")

  @parameterized.parameters(0.8, 0.825, 0.85, 0.875, 0.9)
  def test_bad_reference_inverts_ordering(self, lam):
    scenario = _noon(_DIFFUSION)
    delta = scenario.delta_for_lambda(lam)
    bad = math.pi / 12
    for phi in _phi_grid():
      error = _bias_sq(scenario, phi, 0.0, delta, 1)
      mit3 = _bias_sq(scenario, phi, bad, delta, 3)
      mit2 = _bias_sq(scenario, phi, bad, delta, 2)
      self.assertLessEqual(error, mit3, f"phi={phi}")
      self.assertLessEqual(mit3, mit2, f"phi={phi}")


class SamplingConsistencyTest(parameterized.TestCase):

  @parameterized.named_parameters(
      dict(testcase_name="error", n=1, kind=types.EstimatorKind.ERROR),
      dict(testcase_name="mitigated", n=2, kind=types.EstimatorKind.MITIGATED),
  )
  @pytest.mark.slow
  def test_sampled_estimates_follow_formula(self, n, kind):
    scenario = _noon(_LOSS)
    delta = scenario.delta_for_lambda(0.9)
    phi, phi0, n_samples, seeds = 0.005, 0.0, 10_000_000, 200
    report = estimation.mse(kind, scenario, phi, phi0, delta, n, n_samples)
    exact = estimation.bias_exact(scenario, phi, phi0, delta, n)
    estimates = np.array([
        estimation.sampled_estimate(
            kind, scenario, phi, phi0, delta, n, n_samples, seed
        )
        for seed in range(seeds)
    ])
    sigma = math.sqrt(report.statistical_term / seeds)
    self.assertLessEqual(
        abs(estimates.mean() - (phi + exact.bias)), 4 * sigma
    )
    empirical_mse = float(np.mean((estimates - phi) ** 2))
    self.assertAlmostEqual(
        empirical_mse / report.mse, 1.0, delta=0.25
    )


class CoherentSqueezedReferenceTest(parameterized.TestCase):

  @parameterized.named_parameters(
      dict(testcase_name="loss_error", noise_type=_LOSS, n=1, expected=0.2),
      dict(testcase_name="loss_n2", noise_type=_LOSS, n=2, expected=0.087),
      dict(testcase_name="loss_n3", noise_type=_LOSS, n=3, expected=0.037),
      dict(
          testcase_name="gaussian_error",
          noise_type=_GAUSSIAN,
          n=1,
          expected=0.338,
      ),
      dict(
          testcase_name="gaussian_n2",
          noise_type=_GAUSSIAN,
          n=2,
          expected=0.318,
      ),
  )
  @pytest.mark.slow
  def test_averaged_optimal_reference(self, noise_type, n, expected):
    scenario = _cs(noise_type)
    top = scenario.delta_for_lambda(0.8)
    search = refpoint.ReferenceSearch(refpoint.Uniform(0.0, top))
    self.assertAlmostEqual(
        refpoint.averaged_optimal_reference(scenario, n, search),
        expected,
        delta=0.02,
    )

  @pytest.mark.slow
  def test_loss_keeps_first_order_bias(self):
    scenario = _cs(_LOSS)
    top = scenario.delta_for_lambda(0.8)
    search = refpoint.ReferenceSearch(refpoint.Uniform(0.0, top))
    phi0 = refpoint.averaged_optimal_reference(scenario, 2, search)
    series = estimation.series_coefficients(scenario, phi0)
    self.assertEqual(
        estimation.classify_case(series), types.MitigationCase.CASE_2
    )
    self.assertGreater(abs(series.a_k[1]), 1e-3)
    leading = estimation.bias_leading_order(series, mitigated=True, phi=0.005)
    self.assertEqual(leading.order, 1)

  @pytest.mark.slow
  def test_loss_leaves_error_dominant_points(self):
    scenario = _cs(_LOSS)
    top = scenario.delta_for_lambda(0.8)
    search = refpoint.ReferenceSearch(refpoint.Uniform(0.0, top))
    phi0 = {
        n: refpoint.averaged_optimal_reference(scenario, n, search)
        for n in (1, 2)
    }
    error_wins = []
    for lam in (0.9, 0.85, 0.8):
      delta = scenario.delta_for_lambda(lam)
      for phi in _phi_grid():
        error = _bias_sq(scenario, phi, phi0[1], delta, 1)
        mitigated = _bias_sq(scenario, phi, phi0[2], delta, 2)
        if error < mitigated:
          error_wins.append((lam, phi))
    self.assertNotEmpty(error_wins)


if __name__ == "__main__":
  absltest.main()
