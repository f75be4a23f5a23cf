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

"""Progress bars and completion messages for vpemlab runs."""
from __future__ import annotations

import tqdm

# ANSI color codes for terminal output
BLUE = "\033[94m"
GREEN = "\033[92m"
CYAN = "\033[96m"
BOLD = "\033[1m"
RESET = "\033[0m"

BAR_COLOUR = "#4285F4"


def format_run_progress(scenario_id: str, stage: str | None = None) -> str:
  """Description string of a run progress bar.

  Args:
    scenario_id: Identifier of the scenario being evaluated.
    stage: Optional stage name, e.g. "bias" or "contour".

  Returns:
    Formatted description string.
  """
  desc = f"{BLUE}{BOLD}vpemlab{RESET}: {GREEN}{scenario_id}{RESET}"
  if stage:
    desc += f" {stage}"
  return desc


def create_grid_progress_bar(
    total: int,
    scenario_id: str,
    stage: str | None = None,
    disable: bool = False,
) -> tqdm.tqdm:
  """Create a progress bar over grid points.

  Args:
    total: Number of grid points.
    scenario_id: Identifier of the scenario being evaluated.
    stage: Optional stage name.
    disable: Whether to disable the progress bar.

  Returns:
    A configured tqdm progress bar.
  """
  return tqdm.tqdm(
      total=total,
      desc=format_run_progress(scenario_id, stage),
      bar_format=(
          "{desc}: {percentage:3.0f}%|{bar}| {n_fmt}/{total_fmt} [{elapsed}]"
      ),
      disable=disable,
      colour=BAR_COLOUR,
      ncols=100,
  )


def print_save_complete(num_rows: int, file_path: str) -> None:
  """Print a save completion message.

  Args:
    num_rows: Number of rows written.
    file_path: Path to the written file.
  """
  filename = file_path.split("/")[-1]
  print(
      f"{GREEN}✓{RESET} Saved {BOLD}{num_rows}{RESET} rows to"
      f" {GREEN}{filename}{RESET}",
      flush=True,
  )


def print_run_summary(
    num_files: int, elapsed_time: float | None = None
) -> None:
  """Print a run summary with optional timing."""
  print(
      f"{GREEN}✓{RESET} Wrote {BOLD}{num_files}{RESET} file(s)",
      flush=True,
  )
  if elapsed_time is not None:
    print(f"  {CYAN}•{RESET} Time: {BOLD}{elapsed_time:.2f}s{RESET}", flush=True)
