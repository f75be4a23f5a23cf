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

"""Tests for vpemlab.runner."""

import math
import pathlib
import tempfile
import textwrap
from unittest import mock

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from vpemlab import config as config_lib
from vpemlab import io
from vpemlab import runner
from vpemlab import vpem

_SMALL = textwrap.dedent("""\
    schema_version: 1
    name: small-loss
    probe: {kind: noon, n_photons: 5}
    noise: {kind: photon_loss, deltas: [0.0, 0.05]}
    orders: [1, 2]
    phi_grid: {min: -0.01, max: 0.01, count: 3}
    reference: {kind: fixed, phi0: 0.0}
    n_samples: 1000
    seeds: [1]
    """)

_CONTOUR = textwrap.dedent("""\
    schema_version: 1
    name: small-contour
    probe: {kind: noon, n_photons: 5}
    noise: {kind: photon_loss, deltas: [0.1]}
    orders: [2]
    contour: {phi0_min: 0.0, phi0_max: 0.25, phi0_count: 5, delta_count: 3}
    """)


class RunnerTestCase(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    tmpdir = self.enter_context(tempfile.TemporaryDirectory())
    self.out_dir = pathlib.Path(tmpdir)

  def options(self, sub="out", **kwargs):
    return config_lib.RunOptions(
        out_dir=self.out_dir / sub, show_progress=False, **kwargs
    )


class EvaluateRecordsTest(RunnerTestCase):

  def test_grid_order_and_size(self):
    config = config_lib.parse_config(_SMALL)
    records = runner.evaluate_records(config, self.options())
    self.assertLen(records, 12)
    keys = [(r["delta"], r["n"], r["phi"]) for r in records]
    self.assertEqual(keys, sorted(keys))
    self.assertEqual({r["series"] for r in records}, {"primary"})

  def test_no_noise_leaves_only_curvature(self):
    config = config_lib.parse_config(_SMALL)
    records = runner.evaluate_records(config, self.options())
    for record in records:
      if record["delta"] == 0.0:
        phi = record["phi"]
        curvature = math.sin(5 * phi) / 5 - phi
        self.assertAlmostEqual(
            record["bias_sq_exact"], curvature**2, delta=1e-18
        )
        self.assertEqual(record["lambda_dominant"], 1.0)

  def test_mitigated_dominates_under_loss(self):
    config = config_lib.parse_config(_SMALL)
    records = runner.evaluate_records(config, self.options())
    noisy = [r for r in records if r["delta"] == 0.05]
    self.assertEqual({r["dominance"] for r in noisy}, {"mitigated"})

  def test_seeds_are_derived_per_grid_point(self):
    config = config_lib.parse_config(_SMALL)
    records = runner.evaluate_records(config, self.options(seed=9))
    scenario = config_lib.build_scenario(config)
    expected = [
        vpem.derive_seed(9, scenario.scenario_key, i) for i in range(12)
    ]
    self.assertEqual([r["seed"] for r in records], expected)

  def test_without_seeds_nothing_is_sampled(self):
    config = config_lib.parse_config(_SMALL.replace("seeds: [1]", "seeds: []"))
    records = runner.evaluate_records(config, self.options())
    self.assertTrue(all(r["seed"] is None for r in records))
    self.assertTrue(all(np.isnan(r["est_sq_sampled"]) for r in records))

  def test_extra_series_are_appended(self):
    text = _SMALL + textwrap.dedent("""\
        extra_series:
          - label: bad-reference
            orders: [2]
            reference: {kind: bad, phi0: 0.2617993877991494}
        """)
    records = runner.evaluate_records(
        config_lib.parse_config(text), self.options()
    )
    bad = [r for r in records if r["series"] == "bad-reference"]
    self.assertLen(bad, 6)
    self.assertEqual(records[-1]["series"], "bad-reference")
    self.assertTrue(all(r["n"] == 2 for r in bad))


class ResolveTest(RunnerTestCase):

  def test_lambda_targets_are_inverted(self):
    text = _SMALL.replace("deltas: [0.0, 0.05]", "lambda_targets: [1.0, 0.8]")
    config = config_lib.parse_config(text)
    deltas = runner.resolve_deltas(config, config_lib.build_scenario(config))
    self.assertEqual(deltas[0], 0.0)
    self.assertAlmostEqual(deltas[1], 1 - 0.8**0.2, places=6)

  @parameterized.named_parameters(
      dict(
          testcase_name="fixed",
          reference=config_lib.FixedReference(phi0=0.1),
          expected=0.1,
      ),
      dict(
          testcase_name="bad",
          reference=config_lib.BadReference(phi0=0.2),
          expected=0.2,
      ),
  )
  def test_fixed_references(self, reference, expected):
    config = config_lib.parse_config(_SMALL)
    scenario = config_lib.build_scenario(config)
    self.assertEqual(
        runner.resolve_reference(scenario, reference, 2, 0.05, 0.05), expected
    )

  def test_optimal_reference_follows_strength(self):
    config = config_lib.parse_config(_SMALL)
    scenario = config_lib.build_scenario(config)
    reference = config_lib.OptimalReference()
    self.assertEqual(
        runner.resolve_reference(scenario, reference, 1, 0.0, 0.05), 0.0
    )
    self.assertGreater(
        runner.resolve_reference(scenario, reference, 1, 0.05, 0.05), 0.0
    )


class RunScenarioTest(RunnerTestCase):

  def test_writes_records(self):
    config = config_lib.parse_config(_SMALL)
    paths = runner.run_scenario(config, self.options())
    self.assertEqual([p.name for p in paths], ["small-loss.csv"])
    frame = io.read_records(paths[0])
    self.assertLen(frame, 12)
    self.assertEqual(list(frame.columns), list(io.RECORD_COLUMNS))

  def test_output_is_reproducible(self):
    config = config_lib.parse_config(_SMALL)
    first = runner.run_scenario(config, self.options("a"))[0]
    second = runner.run_scenario(config, self.options("b", threads=3))[0]
    self.assertEqual(first.read_bytes(), second.read_bytes())

  def test_contour(self):
    config = config_lib.parse_config(_CONTOUR)
    paths = runner.run_scenario(config, self.options())
    self.assertEqual(
        [p.name for p in paths],
        ["small-contour-n2.csv", "small-contour-n2-optimum.csv"],
    )
    surface = io.read_records(paths[0])
    self.assertEqual(surface.shape, (3, 6))
    self.assertTrue(np.all(np.isneginf(surface.iloc[0, 1:].to_numpy())))
    optimum = io.read_records(paths[1])
    self.assertEqual(optimum["delta"].tolist(), [0.0, 0.05, 0.1])
    self.assertEqual(optimum["phi0_opt"][0], 0.0)

  def test_reproduce_figure(self):
    config = config_lib.parse_config(_SMALL)
    self.enter_context(
        mock.patch.object(config_lib, "figure_config", return_value=config)
    )
    paths = runner.reproduce_figure("noon-loss", self.options())
    self.assertEqual(paths[0].name, "small-loss.yaml")
    self.assertEqual(config_lib.load_config(paths[0]), config)
    self.assertEqual(paths[1].name, "small-loss.csv")


class GoldenRecordsTest(RunnerTestCase):
  """Compares runs against committed CSV files.

  Exact columns must agree to a relative 1e-8; labels must match.
  """

  _TESTDATA = pathlib.Path(__file__).parent / "testdata"
  _EXACT = (
      "phi",
      "delta",
      "lambda_dominant",
      "phi0",
      "bias_sq_exact",
      "mse_formula",
      "est_sq_sampled",
  )
  _LABELS = ("n", "series", "dominance")

  @parameterized.parameters(("noon_diffusion",))
  def test_matches_golden_file(self, name):
    config = config_lib.load_config(self._TESTDATA / f"{name}.yaml")
    path = runner.run_scenario(config, self.options())[0]
    actual = io.read_records(path)
    expected = io.read_records(self._TESTDATA / f"{name}.csv")
    self.assertEqual(list(actual.columns), list(expected.columns))
    self.assertLen(actual, len(expected))
    for column in self._EXACT:
      np.testing.assert_allclose(
          actual[column].to_numpy(dtype=float),
          expected[column].to_numpy(dtype=float),
          rtol=1e-8,
          atol=1e-15,
          equal_nan=True,
          err_msg=column,
      )
    for column in self._LABELS:
      self.assertEqual(
          actual[column].tolist(), expected[column].tolist(), column
      )
    self.assertTrue(actual["seed"].isna().all())


class RefpointAndCoeffsTest(RunnerTestCase):

  def test_refpoint_table(self):
    config = config_lib.parse_config(
        _SMALL.replace("{kind: fixed, phi0: 0.0}", "{kind: optimal}")
    )
    paths = runner.run_refpoint(config, self.options())
    frame = io.read_records(paths[0])
    self.assertEqual(paths[0].name, "small-loss-refpoint.csv")
    self.assertLen(frame, 4)
    zero = frame[frame["delta"] == 0.0]
    self.assertTrue((zero["phi0"] == 0.0).all())
    self.assertTrue((frame["objective"] >= 0).all())

  def test_coefficient_table(self):
    config = config_lib.parse_config(_SMALL)
    paths = runner.run_coeffs(config, self.options())
    frame = io.read_records(paths[0])
    self.assertEqual(paths[0].name, "small-loss-coeffs.csv")
    self.assertEqual(frame["k"].tolist(), [0, 1, 2, 3])
    self.assertAlmostEqual(frame["lambda_k"][1], 5.0, places=3)
    self.assertEqual(set(frame["case"]), {"case_1"})


if __name__ == "__main__":
  absltest.main()
