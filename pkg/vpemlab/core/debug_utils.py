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

"""Debug utilities for vpemlab.

Call tracing for the expensive numerical entry points, and the switch that
turns on invariant checks after every channel and unitary.
"""
from __future__ import annotations

import functools
import inspect
import logging
import os
import reprlib
import time
from typing import Any, Callable

from absl import logging as absl_logging
import numpy as np

_LOG = logging.getLogger("vpemlab.debug")

_vpemlab_logger = logging.getLogger("vpemlab")
if not _vpemlab_logger.handlers:
  _vpemlab_logger.addHandler(logging.NullHandler())

_MAX_STR = 200
_MAX_SEQ = 8
_CHECKS_ENV = "VPEM_DEBUG_CHECKS"

_checks_enabled = os.getenv(_CHECKS_ENV, "") not in ("", "0", "false")


def checks_enabled() -> bool:
  """Whether density-matrix invariants are asserted after each operation."""
  return _checks_enabled


def enable_checks(enabled: bool = True) -> None:
  global _checks_enabled
  _checks_enabled = enabled


def _safe_repr(obj: Any) -> str:
  """Bounded repr; arrays are summarised by shape and dtype."""
  if isinstance(obj, np.ndarray):
    if obj.size <= _MAX_SEQ:
      return np.array2string(obj, precision=6, separator=", ")
    return f"<ndarray shape={obj.shape} dtype={obj.dtype}>"
  r = reprlib.Repr()
  r.maxstring = _MAX_STR
  r.maxother = _MAX_STR
  r.maxlist = r.maxtuple = r.maxset = r.maxdict = _MAX_SEQ
  return r.repr(obj)


def _format_bound_args(
    fn: Callable, args: tuple[Any, ...], kwargs: dict[str, Any]
) -> str:
  try:
    bound = inspect.signature(fn).bind_partial(*args, **kwargs)
    bound.apply_defaults()
  except (TypeError, ValueError):
    parts = [_safe_repr(a) for a in args]
    parts += [f"{k}={_safe_repr(v)}" for k, v in sorted(kwargs.items())]
    return ", ".join(parts)

  parts: list[str] = []
  for name, value in bound.arguments.items():
    if name in ("self", "cls"):
      parts.append(f"{name}=<{type(value).__name__}>")
    elif callable(value) and not isinstance(value, np.ndarray):
      parts.append(f"{name}=<{getattr(value, '__name__', 'callable')}>")
    else:
      parts.append(f"{name}={_safe_repr(value)}")
  return ", ".join(parts)


def debug_log_calls(fn: Callable) -> Callable:
  """Log calls, results and timing when the debug logger is enabled."""

  @functools.wraps(fn)
  def wrapper(*args, **kwargs):
    logger = _LOG
    if not logger.isEnabledFor(logging.DEBUG):
      return fn(*args, **kwargs)

    fn_qual = getattr(fn, "__qualname__", fn.__name__)
    mod = getattr(fn, "__module__", "")
    arg_str = _format_bound_args(fn, args, kwargs)

    logger.debug("[%s] CALL: %s(%s)", mod, fn_qual, arg_str, stacklevel=2)

    start = time.perf_counter()
    try:
      result = fn(*args, **kwargs)
    except Exception:
      dur_ms = (time.perf_counter() - start) * 1000
      logger.exception(
          "[%s] EXCEPTION: %s (%.1f ms)", mod, fn_qual, dur_ms, stacklevel=2
      )
      raise

    dur_ms = (time.perf_counter() - start) * 1000
    logger.debug(
        "[%s] RETURN: %s -> %s (%.1f ms)",
        mod,
        fn_qual,
        _safe_repr(result),
        dur_ms,
        stacklevel=2,
    )
    return result

  return wrapper


def configure_debug_logging() -> None:
  """Enable debug logging for the 'vpemlab' namespace only."""
  logger = logging.getLogger("vpemlab")

  if any(getattr(h, "vpemlab_debug", False) for h in logger.handlers):
    return

  non_null_handlers = [
      h for h in logger.handlers if not isinstance(h, logging.NullHandler)
  ]
  logger.setLevel(logging.DEBUG)
  if not non_null_handlers:
    handler = logging.StreamHandler()
    handler.setLevel(logging.DEBUG)
    fmt = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    handler.setFormatter(logging.Formatter(fmt))
    handler.vpemlab_debug = True
    logger.addHandler(handler)
    logger.propagate = False

  try:
    absl_logging.set_verbosity(absl_logging.DEBUG)
  except Exception:  # pylint: disable=broad-exception-caught
    pass
