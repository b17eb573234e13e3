"""
Unified Logger for structured simulation events

Emits one-line tags that are easy to grep out of long sweeps:
- [RUN] event=start|finish seed=... steps=...
- [STABLE] k=... window=... tol=...
- [SWEEP] done=.../... variation=...
- [ARTIFACT] kind=... path=...
- [FAILURE] variation=... seed=... error=...
"""

from __future__ import annotations
import logging

_log = logging.getLogger("opinionsim.ulog")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def emit(tag: str, level: int = logging.INFO, **fields):
    """
    Emit a structured log line.

    Format: [TAG] k=v k=v ...

    Args:
        tag: Log tag (RUN, STABLE, SWEEP, ...)
        level: logging level for the record
        **fields: Key-value pairs to log
    """
    parts = [f"[{tag.upper()}]"]
    for k, v in fields.items():
        parts.append(f"{k}={_fmt(v)}")
    _log.log(level, " ".join(parts))


def run_started(seed: int, n: int, m: int, steps: int, controllers: int):
    emit("RUN", event="start", seed=seed, n=n, m=m, steps=steps, controllers=controllers)


def run_finished(seed: int, steps: int, mean_opinion, components: int):
    """
    Log the end of a single run.

    Args:
        seed: RNG seed of the run
        steps: steps actually executed
        mean_opinion: final standard-agent mean opinion
        components: final connected component count
    """
    emit("RUN", event="finish", seed=seed, steps=steps,
         mean=list(mean_opinion), components=components)


def stability_reached(k: int, window: int, tol: float):
    emit("STABLE", k=k, window=window, tol=tol)


def sweep_progress(done: int, total: int, variation: str):
    emit("SWEEP", done=f"{done}/{total}", variation=variation)


def artifact_written(kind: str, path: str):
    emit("ARTIFACT", kind=kind, path=path)


def run_failed(variation: str, seed: int, error: str):
    emit("FAILURE", level=logging.WARNING, variation=variation, seed=seed, error=error)
