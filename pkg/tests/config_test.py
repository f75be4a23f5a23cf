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

"""Tests for vpemlab.config."""

import math
import pathlib
import tempfile
import textwrap

from absl.testing import absltest
from absl.testing import parameterized

from vpemlab import config as config_lib
from vpemlab import scenario as scenario_lib
from vpemlab.core import exceptions
from vpemlab.core import types

_MINIMAL = textwrap.dedent("""\
    schema_version: 1
    name: small
    probe: {kind: noon, n_photons: 3}
    noise: {kind: photon_loss, deltas: [0.0, 0.05]}
    """)

_FULL = textwrap.dedent("""\
    schema_version: 1
    name: full
    probe: {kind: coherent_squeezed, mean_coherent: 1.0, mean_squeezed: 0.5}
    noise: {kind: additive_gaussian, lambda_targets: [0.9, 0.8]}
    orders: [1, 2]
    phi_grid: {min: -0.02, max: 0.02, count: 5, exclude_zero: true}
    reference: {kind: averaged_optimal, low: 0.0, high: 0.3}
    extra_series:
      - label: bad-reference
        orders: [2]
        reference: {kind: bad, phi0: 0.1}
    cutoff: 20
    method: numeric
    n_samples: 5000
    seeds: [1, 2]
    """)


class ParseConfigTest(parameterized.TestCase):

  def test_minimal_config_uses_defaults(self):
    config = config_lib.parse_config(_MINIMAL)
    self.assertEqual(config.name, "small")
    self.assertEqual(config.probe, config_lib.NoonProbeConfig(n_photons=3))
    self.assertEqual(config.noise.kind, types.NoiseType.PHOTON_LOSS)
    self.assertEqual(config.noise.deltas, (0.0, 0.05))
    self.assertEqual(config.orders, (1,))
    self.assertEqual(config.reference, config_lib.FixedReference())
    self.assertEqual(config.n_samples, config_lib.DEFAULT_SAMPLES)
    self.assertEqual(config.seeds, ())
    self.assertIsNone(config.contour)

  def test_full_config(self):
    config = config_lib.parse_config(_FULL)
    self.assertIsInstance(
        config.probe, config_lib.CoherentSqueezedProbeConfig
    )
    self.assertEqual(config.noise.lambda_targets, (0.9, 0.8))
    self.assertEqual(
        config.reference,
        config_lib.AveragedOptimalReference(low=0.0, high=0.3),
    )
    self.assertEqual(config.method, types.ChannelMethod.NUMERIC)
    self.assertEqual(
        [s.label for s in config.series], ["primary", "bad-reference"]
    )
    self.assertEqual(
        config.series[1].reference, config_lib.BadReference(phi0=0.1)
    )
    self.assertLen(config.phi_grid.values(), 4)

  def test_serialized_config_parses_back(self):
    config = config_lib.parse_config(_FULL)
    text = config_lib.serialize_config(config)
    self.assertTrue(text.startswith("schema_version: 1"))
    self.assertEqual(config_lib.parse_config(text), config)

  def test_missing_schema_version(self):
    with self.assertRaises(exceptions.ConfigError) as ctx:
      config_lib.parse_config("name: x\n")
    self.assertEqual(ctx.exception.field_errors[0][0], "schema_version")
    self.assertEqual(ctx.exception.category, "config")

  @parameterized.named_parameters(
      dict(
          testcase_name="unknown_probe",
          text=_MINIMAL.replace("kind: noon", "kind: twin_fock"),
          location="probe",
      ),
      dict(
          testcase_name="unknown_noise",
          text=_MINIMAL.replace("photon_loss", "dephasing"),
          location="noise",
      ),
      dict(
          testcase_name="wrong_type",
          text=_MINIMAL + "n_samples: many\n",
          location="n_samples",
      ),
  )
  def test_schema_violations_name_the_field(self, text, location):
    with self.assertRaises(exceptions.ConfigError) as ctx:
      config_lib.parse_config(text)
    locations = [loc for loc, _ in ctx.exception.field_errors]
    self.assertTrue(
        any(loc.startswith(location) for loc in locations), locations
    )

  @parameterized.named_parameters(
      dict(
          testcase_name="both_strength_forms",
          text=_MINIMAL.replace("[0.0, 0.05]", "[0.1], lambda_targets: [0.9]"),
      ),
      dict(
          testcase_name="negative_delta",
          text=_MINIMAL.replace("[0.0, 0.05]", "[-0.1]"),
      ),
      dict(
          testcase_name="lambda_above_one",
          text=_MINIMAL.replace("deltas: [0.0, 0.05]", "lambda_targets: [1.2]"),
      ),
      dict(
          testcase_name="schema_version",
          text=_MINIMAL.replace("schema_version: 1", "schema_version: 2"),
      ),
      dict(testcase_name="zero_order", text=_MINIMAL + "orders: [0, 2]\n"),
      dict(
          testcase_name="cutoff_below_photons", text=_MINIMAL + "cutoff: 2\n"
      ),
      dict(
          testcase_name="empty_phi_grid",
          text=_MINIMAL + "phi_grid: {min: 0.1, max: -0.1, count: 5}\n",
      ),
  )
  def test_invalid_values(self, text):
    with self.assertRaises(exceptions.ConfigError):
      config_lib.parse_config(text)

  @parameterized.parameters("probe: [unclosed", "- just\n- a list\n")
  def test_not_a_mapping(self, text):
    with self.assertRaises(exceptions.ConfigError):
      config_lib.parse_config(text)


class LoadConfigTest(absltest.TestCase):

  def test_load_from_file(self):
    with tempfile.TemporaryDirectory() as tmpdir:
      path = pathlib.Path(tmpdir) / "small.yaml"
      path.write_text(_MINIMAL, encoding="utf-8")
      self.assertEqual(config_lib.load_config(path).name, "small")

  def test_missing_file(self):
    with self.assertRaises(exceptions.ConfigError):
      config_lib.load_config("/nonexistent/vpem.yaml")


class PhiGridTest(absltest.TestCase):

  def test_exclude_zero(self):
    grid = config_lib.PhiGrid(-0.01, 0.01, 21, exclude_zero=True).values()
    self.assertLen(grid, 20)
    self.assertGreater(min(abs(grid)), 1e-4)

  def test_endpoints(self):
    grid = config_lib.PhiGrid().values()
    self.assertLen(grid, 21)
    self.assertAlmostEqual(grid[0], -0.01)
    self.assertAlmostEqual(grid[-1], 0.01)


class FigureConfigTest(parameterized.TestCase):

  @parameterized.parameters(*types.FigureName)
  def test_every_figure_parses(self, figure):
    config = config_lib.figure_config(figure)
    self.assertEqual(config.name, figure.value)

  def test_bad_reference_points(self):
    noon = config_lib.figure_config("noon-loss")
    self.assertAlmostEqual(noon.series[1].reference.phi0, math.pi / 12)
    cs = config_lib.figure_config(types.FigureName.CS_GAUSSIAN)
    self.assertAlmostEqual(cs.series[1].reference.phi0, math.pi / 30)

  def test_contour_figures(self):
    config = config_lib.figure_config("contour-loss")
    self.assertEqual(config.contour.phi0_count, 101)
    self.assertEqual(config.noise.lambda_targets, (0.8,))

  def test_unknown_figure(self):
    with self.assertRaises(ValueError):
      config_lib.figure_config("figure-9")


class BuildScenarioTest(absltest.TestCase):

  def test_noon(self):
    scenario = config_lib.build_scenario(config_lib.parse_config(_MINIMAL))
    self.assertEqual(scenario.probe, scenario_lib.NoonProbe(3))
    self.assertEqual(scenario.noise_type, types.NoiseType.PHOTON_LOSS)
    self.assertEqual(scenario.resolved_cutoff, 4)

  def test_cutoff_override(self):
    config = config_lib.parse_config(_FULL)
    self.assertEqual(config_lib.build_scenario(config).resolved_cutoff, 20)
    self.assertEqual(
        config_lib.build_scenario(config, cutoff=25).resolved_cutoff, 25
    )
    self.assertEqual(
        config_lib.build_scenario(config).method, types.ChannelMethod.NUMERIC
    )


if __name__ == "__main__":
  absltest.main()
