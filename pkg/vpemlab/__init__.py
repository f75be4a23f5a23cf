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

"""vpemlab: virtual-purification error mitigation for phase estimation.

The top-level functions run configurations; submodules are loaded lazily
on attribute access.
"""

from __future__ import annotations

import importlib
import sys
from typing import Any, Dict

__all__ = [
    # Public convenience functions (thin wrappers)
    "run_scenario",
    "reproduce_figure",
    "load_config",
    # Submodules exposed lazily on attribute access:
    "config",
    "core",
    "data_lib",
    "estimation",
    "exceptions",
    "io",
    "noise",
    "progress",
    "refpoint",
    "runner",
    "scenario",
    "vpem",
]

_CACHE: Dict[str, Any] = {}


def run_scenario(*args: Any, **kwargs: Any):
  """Top-level API: vpemlab.run_scenario(...)."""
  from vpemlab import runner  # pylint: disable=import-outside-toplevel

  return runner.run_scenario(*args, **kwargs)


def reproduce_figure(*args: Any, **kwargs: Any):
  """Top-level API: vpemlab.reproduce_figure(...)."""
  from vpemlab import runner  # pylint: disable=import-outside-toplevel

  return runner.reproduce_figure(*args, **kwargs)


def load_config(*args: Any, **kwargs: Any):
  """Top-level API: vpemlab.load_config(...)."""
  from vpemlab import config  # pylint: disable=import-outside-toplevel

  return config.load_config(*args, **kwargs)


# PEP 562 lazy loading
_LAZY_MODULES = {
    "cli": "vpemlab.cli",
    "config": "vpemlab.config",
    "core": "vpemlab.core",
    "data_lib": "vpemlab.data_lib",
    "debug_utils": "vpemlab.core.debug_utils",
    "estimation": "vpemlab.estimation",
    "exceptions": "vpemlab.exceptions",
    "fock": "vpemlab.core.fock",
    "io": "vpemlab.io",
    "noise": "vpemlab.noise",
    "progress": "vpemlab.progress",
    "refpoint": "vpemlab.refpoint",
    "runner": "vpemlab.runner",
    "scenario": "vpemlab.scenario",
    "types": "vpemlab.core.types",
    "vpem": "vpemlab.vpem",
}


def __getattr__(name: str) -> Any:
  if name in _CACHE:
    return _CACHE[name]
  modpath = _LAZY_MODULES.get(name)
  if modpath is None:
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
  module = importlib.import_module(modpath)
  # ensure future 'import vpemlab.<name>' returns the same module
  sys.modules[f"{__name__}.{name}"] = module
  setattr(sys.modules[__name__], name, module)
  _CACHE[name] = module
  return module


def __dir__():
  return sorted(__all__)
