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

"""Tests for vpemlab.progress module."""

import io
import unittest
from unittest import mock

import tqdm

from vpemlab import progress


class ProgressTest(unittest.TestCase):

  def test_grid_progress_bar(self):
    """Test grid progress bar creation."""
    pbar = progress.create_grid_progress_bar(
        42, "noon5-photon_loss-c6", "bias"
    )

    self.assertIsInstance(pbar, tqdm.tqdm)
    self.assertEqual(pbar.total, 42)
    self.assertIn("vpemlab", pbar.desc)
    self.assertIn("noon5-photon_loss-c6", pbar.desc)
    self.assertIn("bias", pbar.desc)
    pbar.close()

  def test_disabled_progress_bar(self):
    pbar = progress.create_grid_progress_bar(3, "cs", disable=True)
    self.assertTrue(pbar.disable)
    pbar.update(3)
    pbar.close()

  def test_formatting_functions(self):
    """Test description formatting."""
    desc = progress.format_run_progress("cs2.5-2.5-additive_gaussian-c31")
    self.assertIn("cs2.5-2.5-additive_gaussian-c31", desc)
    self.assertNotIn("contour", desc)

    desc = progress.format_run_progress("cs", "contour")
    self.assertTrue(desc.endswith(" contour"))

  def test_completion_messages(self):
    """Test messages printed after writing files."""
    with mock.patch("sys.stdout", new_callable=io.StringIO) as out:
      progress.print_save_complete(21, "/tmp/results/noon-loss.csv")
      progress.print_run_summary(3, 1.5)
    text = out.getvalue()
    self.assertIn("noon-loss.csv", text)
    self.assertNotIn("/tmp/results", text)
    self.assertIn("21", text)
    self.assertIn("1.50s", text)


if __name__ == "__main__":
  unittest.main()
