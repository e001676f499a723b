"""Utility functions for the sparse-carath toolkit."""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import islice
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, TypeVar

import numpy as np
from rich.console import Console
from rich.table import Table

# Payload goes to stdout; everything human-readable goes here.
console = Console(stderr=True)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_CONFIG_FILE = "carath_config.json"
THREADS_ENV = "SPARSE_CARATH_THREADS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "eps": 0.1,
    "kappa": 256.0,
    "seed": 0,
    "norm_mode": "inf",
    "max_multiset": None,
    "max_retries": 32,
    "delta_fail": 0.1,
    "feas_tol": 1e-9,
    "opt_tol": 1e-9,
    "solve_tol": 1e-7,
    "zero_tol": 1e-12,
    "match_tol": 1e-10,
    "concurrent_starts": 10,
    "concurrent_iterations": 2000,
    "randomized_trials": 2000,
    "ascent_steps": 3,
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load run configuration, layering a JSON file over the defaults.

    Args:
        config_path: Explicit config file. When omitted, ``carath_config.json``
            in the working directory is used if present.

    Returns:
        Dictionary with every key of ``DEFAULT_CONFIG``
    """
    config = dict(DEFAULT_CONFIG)
    explicit = config_path is not None
    config_file = Path(config_path or DEFAULT_CONFIG_FILE)

    if not config_file.exists():
        if explicit:
            raise FileNotFoundError(f"Config file '{config_file}' not found")
        return config

    with open(config_file) as f:
        overrides = json.load(f)
    if not isinstance(overrides, dict):
        raise ValueError(f"{config_file} must contain a JSON object")

    unknown = sorted(set(overrides) - set(DEFAULT_CONFIG))
    if unknown:
        console.print(f"[yellow]Warning:[/yellow] ignoring unknown config keys: {', '.join(unknown)}")
    config.update({key: value for key, value in overrides.items() if key in DEFAULT_CONFIG})
    return config


def worker_count() -> int:
    """Number of worker threads allowed by ``SPARSE_CARATH_THREADS`` (default: all cores)."""
    raw = os.getenv(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            console.print(f"[yellow]Warning:[/yellow] {THREADS_ENV}={raw!r} is not an integer")
    return os.cpu_count() or 1


def first_accepted(
    candidates: Iterable[T],
    evaluate: Callable[[T], Optional[R]],
    workers: Optional[int] = None,
) -> Optional[Tuple[int, T, R]]:
    """
    Evaluate candidates in order and return the first one that is accepted.

    With more than one worker, candidates are evaluated in batches on a thread
    pool; within a batch the lowest index wins so the answer matches a
    sequential scan.

    Args:
        candidates: Lazily produced candidates
        evaluate: Returns a result for an accepted candidate, ``None`` otherwise
        workers: Worker cap; defaults to ``worker_count()``

    Returns:
        ``(index, candidate, result)`` of the first acceptance, or ``None``
    """
    workers = worker_count() if workers is None else max(1, workers)
    iterator = iter(candidates)

    if workers == 1:
        for index, candidate in enumerate(iterator):
            result = evaluate(candidate)
            if result is not None:
                return index, candidate, result
        return None

    offset = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = list(islice(iterator, 4 * workers))
            if not batch:
                return None
            for position, result in enumerate(pool.map(evaluate, batch)):
                if result is not None:
                    return offset + position, batch[position], result
            offset += len(batch)


def _encode(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            raise ValueError(f"cannot serialize non-finite float {number}")
        text = format(number, ".17g")
        if "e" not in text and "." not in text:
            text += ".0"
        return text
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, dict):
        items = (f"{json.dumps(str(key))}: {_encode(item)}" for key, item in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(item) for item in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(payload: Any) -> str:
    """Serialize a payload with every float written at 17 significant digits."""
    return _encode(payload)


def display_summary(title: str, rows: Dict[str, Any]) -> None:
    """Display a two-column summary table on the console."""
    table = Table(title=title)
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")

    for name, value in rows.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        table.add_row(name, str(value))

    console.print(table)
