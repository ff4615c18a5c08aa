"""
Report Writers
Deterministic JSON reports with config hashes and %.17g CSV traces
"""
import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from kamlab import __version__
from kamlab.config import settings
from kamlab.schemas.reports import ReportEnvelope

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def canonical_json(data: Any) -> str:
    return json.dumps(_plain(data), sort_keys=True, separators=(",", ":"))


def _echo(model: Any, config: Any) -> Dict[str, Any]:
    return {"model": model, "config": config, "numerics": settings.numerics()}


def config_hash(model: Any, config: Any) -> str:
    """sha256 of the canonical model, run config and numerical settings."""
    return hashlib.sha256(canonical_json(_echo(model, config)).encode()).hexdigest()


def envelope(command: str, model: Any, config: Any, result: Any, checks: Optional[Dict[str, bool]] = None,
             error: Optional[Dict] = None) -> ReportEnvelope:
    return ReportEnvelope(command=command, version=__version__, config_hash=config_hash(model, config),
                          config=_plain(_echo(model, config)), checks=checks or {},
                          result=_plain(result), error=error)


def dumps(report: ReportEnvelope) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2)


def write_json(path: Path, report: ReportEnvelope) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report) + "\n")
    logger.info(f"report written to {path}")
    return path


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info(f"trace written to {path}")
    return path


def trace_rows(trace: List[BaseModel]) -> List[List[Any]]:
    return [[r.n, r.h_n, r.eps, r.zeta, r.eta, r.ledger_norm] for r in trace]


TRACE_HEADER = ["n", "h_n", "eps_n", "zeta_n", "eta_n", "ledger_norm"]


def orbit_header(d: int) -> List[str]:
    return ["t"] + [f"phi_{i + 1}" for i in range(d)] + [f"r_{i + 1}" for i in range(d)] + ["H"]
