""" Default I/O functions for StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = [
    "io_inject",
    "manifest_lines",
    "notify_user",
    "read_csv",
    "write_csv",
]

import csv
from collections.abc import Callable, Iterable, Sequence
from typing import Any

from .types import RunManifest

notify_user: Callable[[str], None] = print


def io_inject(notify: Callable[[str], None] | None = None):
    """Replace default I/O with custom functions"""
    global notify_user  # pylint: disable=global-statement
    notify_user = notify or notify_user


def manifest_lines(manifest: RunManifest) -> list[str]:
    lines = [
        f"command: {manifest.command}",
        f"path: {manifest.path}",
        f"version: {manifest.version}",
    ]
    if manifest.seed is not None:
        lines.append(f"seed: {manifest.seed}")
    lines.extend(f"{k}: {v}" for k, v in sorted(manifest.options.items()))
    return lines


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: str,
    manifest: RunManifest,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
):
    """Write `rows` with the manifest as leading `#` comment lines

    Floats are written with `repr`, so they parse back exactly.
    """
    with open(path, "w", newline="") as output:
        for line in manifest_lines(manifest):
            output.write(f"# {line}\n")
        writer = csv.writer(output)
        writer.writerow(header)
        writer.writerows([_cell(v) for v in row] for row in rows)


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a file written by `write_csv`"""
    with open(path, newline="") as source:
        body = [line for line in source if not line.startswith("#")]
    header, *rows = csv.reader(body)
    return header, rows
