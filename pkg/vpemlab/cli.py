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

"""Command line entry point for vpemlab.

Usage:
    vpemlab run scenario.yaml --out-dir results
    vpemlab figure noon-phase --seed 7
    vpemlab refpoint scenario.yaml
    vpemlab coeffs scenario.yaml --cutoff 40
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
import textwrap
from typing import Sequence

from absl import logging

from vpemlab import config as config_lib
from vpemlab import runner
from vpemlab.core import debug_utils
from vpemlab.core import exceptions
from vpemlab.core import types

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VPEM_ERROR = 2


def parse_arguments(argv: Sequence[str] | None = None) -> argparse.Namespace:
  """Parse command line arguments.

  Args:
    argv: Arguments without the program name; defaults to ``sys.argv[1:]``.

  Returns:
    Parsed arguments from argparse.
  """
  parser = argparse.ArgumentParser(
      prog="vpemlab",
      description=(
          "Simulate virtual-purification error mitigation for phase"
          " estimation"
      ),
      formatter_class=argparse.RawDescriptionHelpFormatter,
      epilog=textwrap.dedent("""
        Examples:
            vpemlab run scenario.yaml --out-dir results
            vpemlab figure cs-loss --threads 4
            vpemlab refpoint scenario.yaml
            vpemlab coeffs scenario.yaml
        """),
  )

  common = argparse.ArgumentParser(add_help=False)
  common.add_argument(
      "--seed",
      type=int,
      default=None,
      help="Sampling seed, replacing the seeds of the configuration",
  )
  common.add_argument(
      "--out-dir",
      type=pathlib.Path,
      default=pathlib.Path("vpem_output"),
      help="Directory for CSV outputs (default: vpem_output)",
  )
  common.add_argument(
      "--cutoff",
      type=int,
      default=None,
      help="Fock cutoff per mode, replacing the configured one",
  )
  common.add_argument(
      "--threads",
      type=int,
      default=1,
      help="Worker threads for grid evaluation (default: 1)",
  )
  common.add_argument(
      "--debug",
      action="store_true",
      help="Log function calls and validate every intermediate state",
  )
  common.add_argument(
      "--no-progress", action="store_true", help="Hide progress bars"
  )

  subparsers = parser.add_subparsers(dest="command", required=True)
  for name, help_text in (
      ("run", "Evaluate a scenario configuration"),
      ("refpoint", "Optimize reference points of a configuration"),
      ("coeffs", "Fit the Delta-series coefficients of a configuration"),
  ):
    sub = subparsers.add_parser(name, parents=[common], help=help_text)
    sub.add_argument("config", type=pathlib.Path, help="YAML configuration")

  figure = subparsers.add_parser(
      "figure", parents=[common], help="Reproduce a result figure"
  )
  figure.add_argument(
      "name",
      choices=[f.value for f in types.FigureName],
      help="Figure to reproduce",
  )

  args = parser.parse_args(argv)
  if args.threads < 1:
    parser.error("--threads must be at least 1")
  return args


def _options(args: argparse.Namespace) -> config_lib.RunOptions:
  return config_lib.RunOptions(
      seed=args.seed,
      out_dir=args.out_dir,
      cutoff=args.cutoff,
      threads=args.threads,
      show_progress=not args.no_progress,
  )


def _dispatch(args: argparse.Namespace) -> list[pathlib.Path]:
  options = _options(args)
  if args.command == "figure":
    return runner.reproduce_figure(args.name, options)
  config = config_lib.load_config(args.config)
  if args.command == "run":
    return runner.run_scenario(config, options)
  if args.command == "refpoint":
    return runner.run_refpoint(config, options)
  return runner.run_coeffs(config, options)


def _error_line(category: str, message: str, fields=None) -> str:
  payload = {"error": category, "message": message}
  if fields:
    payload["fields"] = [
        {"location": location, "message": text} for location, text in fields
    ]
  return json.dumps(payload)


def run(argv: Sequence[str] | None = None) -> int:
  """Runs one command and returns the process exit status."""
  args = parse_arguments(argv)
  if args.debug:
    debug_utils.configure_debug_logging()
    debug_utils.enable_checks()
  try:
    paths = _dispatch(args)
  except exceptions.VpemError as e:
    fields = getattr(e, "field_errors", None)
    print(_error_line(e.category, str(e), fields), file=sys.stderr)
    return EXIT_VPEM_ERROR
  except Exception as e:  # pylint: disable=broad-exception-caught
    logging.exception("Unexpected failure in %s", args.command)
    print(_error_line("internal", str(e)), file=sys.stderr)
    return EXIT_INTERNAL
  for path in paths:
    logging.info("Wrote %s", path)
  return EXIT_OK


def main():
  """Main entry point for the vpemlab command."""
  sys.exit(run())


if __name__ == "__main__":
  main()
