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

"""Tests for vpemlab.scenario."""

import math

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from vpemlab import noise
from vpemlab import scenario as scenario_lib
from vpemlab import vpem
from vpemlab.core import fock
from vpemlab.core import types

_N = 5
_DIFFUSION = types.NoiseType.PHASE_DIFFUSION
_LOSS = types.NoiseType.PHOTON_LOSS
_GAUSSIAN = types.NoiseType.ADDITIVE_GAUSSIAN


def _noon(noise_type, method=types.ChannelMethod.AUTO):
  return scenario_lib.Scenario(
      scenario_lib.NoonProbe(_N), noise_type, method=method
  )


def _cs(noise_type):
  return scenario_lib.Scenario(scenario_lib.CoherentSqueezedProbe(), noise_type)


class ProbeTest(parameterized.TestCase):

  def test_noon_defaults(self):
    probe = scenario_lib.NoonProbe()
    self.assertEqual(probe.n_photons, 5)
    self.assertEqual(probe.default_cutoff, 6)
    self.assertEqual(probe.type, types.ProbeType.NOON)

  def test_coherent_squeezed_parameters(self):
    probe = scenario_lib.CoherentSqueezedProbe(2.5, 2.5)
    self.assertAlmostEqual(probe.alpha**2, 2.5)
    self.assertAlmostEqual(math.sinh(probe.squeezing) ** 2, 2.5)
    self.assertEqual(probe.default_cutoff, 31)

  def test_invalid_probes(self):
    with self.assertRaises(ValueError):
      scenario_lib.NoonProbe(0)
    with self.assertRaises(ValueError):
      scenario_lib.CoherentSqueezedProbe(-1.0, 2.5)

  def test_cutoff_below_photon_number(self):
    with self.assertRaises(ValueError):
      scenario_lib.Scenario(scenario_lib.NoonProbe(5), _LOSS, cutoff=4)

  def test_scenario_identity(self):
    scenario = _noon(_LOSS)
    self.assertEqual(scenario.scenario_id, "noon5-photon_loss-c6")
    self.assertEqual(scenario.scenario_key, _noon(_LOSS).scenario_key)
    self.assertNotEqual(scenario.scenario_key, _noon(_DIFFUSION).scenario_key)
    self.assertEqual(scenario.space.dim, 49)
    self.assertEqual(_cs(_LOSS).space.dim, 1024)


class NoonParityTest(parameterized.TestCase):

  @parameterized.parameters(_DIFFUSION, _LOSS)
  def test_ideal_parity_is_sine(self, noise_type):
    phases = np.array([-0.25, -0.1, 0.0, 0.05, 0.2])
    scenario = _noon(noise_type)
    np.testing.assert_allclose(
        scenario.ideal_parity(phases), np.sin(_N * phases), atol=1e-10
    )
    np.testing.assert_allclose(
        scenario.ideal_slope(phases), _N * np.cos(_N * phases), atol=1e-9
    )

  def test_zero_strength_matches_ideal(self):
    scenario = _noon(_LOSS)
    phases = np.array([-0.1, 0.15])
    np.testing.assert_array_equal(
        scenario.parity(phases, 0.0, 3), scenario.ideal_parity(phases)
    )

  @parameterized.parameters(0.01, 0.05)
  def test_diffusion_parity_decays(self, delta):
    scenario = _noon(_DIFFUSION)
    phases = np.array([-0.2, 0.1, 0.3])
    expected = math.exp(-delta * _N**2 / 2) * np.sin(_N * phases)
    np.testing.assert_allclose(
        scenario.parity(phases, delta), expected, atol=1e-9
    )

  @parameterized.parameters(0.02, 0.1)
  def test_loss_parity_has_vacuum_term(self, delta):
    scenario = _noon(_LOSS)
    phases = np.array([-0.2, 0.0, 0.1])
    expected = (1 - delta) ** _N * np.sin(_N * phases) + delta**_N
    np.testing.assert_allclose(
        scenario.parity(phases, delta), expected, atol=1e-12
    )

  @parameterized.named_parameters(
      dict(testcase_name="diffusion_n1", noise_type=_DIFFUSION, n=1),
      dict(testcase_name="diffusion_n2", noise_type=_DIFFUSION, n=2),
      dict(testcase_name="loss_n1", noise_type=_LOSS, n=1),
      dict(testcase_name="loss_n3", noise_type=_LOSS, n=3),
  )
  def test_kernel_matches_dense_state(self, noise_type, n):
    scenario = _noon(noise_type)
    delta, phase = 0.04, 0.13
    rho = scenario.error_state(phase, delta)
    parity = fock.parity_observable(scenario.space)
    dense = vpem.mitigated_expectation(rho, parity, n)
    self.assertAlmostEqual(
        float(scenario.parity(phase, delta, n)[0]), dense, places=9
    )
    tr_a, tr_i = scenario.circuit_means(phase, delta, n)
    dense_a, dense_i = vpem.circuit_expectations(rho, parity, n)
    self.assertAlmostEqual(tr_a, dense_a, places=9)
    self.assertAlmostEqual(tr_i, dense_i, places=9)

  def test_slope_matches_finite_difference(self):
    scenario = _noon(_LOSS)
    h = 1e-5
    phase, delta = 0.07, 0.05
    numeric = (
        scenario.parity(phase + h, delta, 2)
        - scenario.parity(phase - h, delta, 2)
    ) / (2 * h)
    self.assertAlmostEqual(
        float(scenario.parity_slope(phase, delta, 2)[0]),
        float(numeric[0]),
        places=6,
    )

  def test_numeric_and_closed_form_channels_agree(self):
    numeric = _noon(_DIFFUSION, types.ChannelMethod.NUMERIC)
    closed = _noon(_DIFFUSION, types.ChannelMethod.CLOSED_FORM)
    phases = np.array([-0.1, 0.2])
    np.testing.assert_allclose(
        numeric.parity(phases, 0.03, 2),
        closed.parity(phases, 0.03, 2),
        atol=1e-9,
    )

  def test_mitigation_order_below_one(self):
    with self.assertRaises(ValueError):
      _noon(_LOSS).kernel(0.1, 0)


class NoonSpectrumTest(parameterized.TestCase):

  @parameterized.parameters(0.01, 0.04)
  def test_dephased_dominant_eigenvalue(self, delta):
    expected = (1 + math.exp(-delta * _N**2 / 2)) / 2
    self.assertAlmostEqual(
        _noon(_DIFFUSION).dominant_eigenvalue(delta), expected, places=10
    )

  def test_lossy_dominant_eigenvalue(self):
    self.assertAlmostEqual(
        _noon(_LOSS).dominant_eigenvalue(0.05), 0.95**_N, places=10
    )

  def test_dominant_eigenvector_is_the_probe(self):
    scenario = _noon(_LOSS)
    spectrum = scenario.probe_spectrum(0.05)
    overlap = np.vdot(scenario.ideal_probe().amplitudes, spectrum.vectors[:, 0])
    self.assertAlmostEqual(abs(overlap), 1.0, places=10)
    self.assertGreater(spectrum.dominant_gap, 0.5)

  def test_delta_for_lambda_under_diffusion(self):
    expected = -2 * math.log(0.6) / _N**2
    self.assertAlmostEqual(
        _noon(_DIFFUSION).delta_for_lambda(0.8), expected, places=6
    )

  def test_delta_for_lambda_under_loss(self):
    self.assertAlmostEqual(
        _noon(_LOSS).delta_for_lambda(0.8), 1 - 0.8 ** (1 / _N), places=6
    )

  def test_reference_domain(self):
    low, high = _noon(_LOSS).reference_domain()
    self.assertAlmostEqual(high, math.pi / 10)
    self.assertAlmostEqual(low, -math.pi / 10)


class CoherentSqueezedTest(parameterized.TestCase):

  def test_ideal_parity_matches_closed_form(self):
    scenario = _cs(_LOSS)
    probe = scenario.probe
    thetas = np.array([0.2, 0.5, 1.0, 1.4])
    np.testing.assert_allclose(
        scenario.ideal_parity(thetas),
        noise.cs_ideal_parity(thetas, probe.alpha, probe.squeezing),
        atol=1e-2,
    )

  @parameterized.parameters(_LOSS, _GAUSSIAN)
  def test_noisy_parity_matches_closed_form(self, noise_type):
    scenario = _cs(noise_type)
    probe = scenario.probe
    delta = 0.1
    thetas = np.array([0.3, 0.8, 1.2])
    np.testing.assert_allclose(
        scenario.parity(thetas, delta),
        noise.cs_ideal_parity(
            thetas, probe.alpha, probe.squeezing, scenario.noise(delta)
        ),
        atol=1e-2,
    )

  def test_ideal_slope_vanishes_at_zero_phase(self):
    self.assertAlmostEqual(
        float(_cs(_LOSS).ideal_slope(0.0)[0]), 0.0, delta=1e-2
    )

  def test_gaussian_dominant_eigenvalue(self):
    self.assertAlmostEqual(_cs(_GAUSSIAN).dominant_eigenvalue(0.25), 0.8)
    self.assertAlmostEqual(
        _cs(_GAUSSIAN).delta_for_lambda(0.8), 0.25, places=5
    )

  def test_loss_strength_for_lambda(self):
    self.assertAlmostEqual(
        _cs(_LOSS).delta_for_lambda(0.8), 0.146, delta=2e-3
    )

  def test_reference_domain(self):
    self.assertEqual(_cs(_GAUSSIAN).reference_domain(), (0.0, math.pi / 2))


class DominantEigenvectorTest(parameterized.TestCase):

  @parameterized.named_parameters(
      dict(
          testcase_name="noon_diffusion",
          scenario=_noon(_DIFFUSION, types.ChannelMethod.NUMERIC),
      ),
      dict(
          testcase_name="noon_loss",
          scenario=_noon(_LOSS, types.ChannelMethod.NUMERIC),
      ),
      dict(testcase_name="cs_gaussian", scenario=_cs(_GAUSSIAN)),
  )
  def test_dominant_eigenvector_is_ideal(self, scenario):
    _, psi, _ = vpem.dominant_eigenpair(scenario.noisy_probe(0.1))
    self.assertGreaterEqual(scenario.ideal_probe().fidelity(psi), 1 - 1e-9)

  def test_coherent_squeezed_loss_moves_dominant_eigenvector(self):
    scenario = _cs(_LOSS)
    _, psi, _ = vpem.dominant_eigenpair(scenario.noisy_probe(0.1))
    self.assertLess(scenario.ideal_probe().fidelity(psi), 1 - 1e-4)


if __name__ == "__main__":
  absltest.main()
