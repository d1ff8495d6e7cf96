"""Run-wide numeric tolerances and caps."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import InvalidParameter

EPS_ZERO = 1e-12
EPS_POS = 1e-9
EPS_T = 1e-6
RENORM_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    eps_zero: float = EPS_ZERO
    eps_pos: float = EPS_POS
    eps_t: float = EPS_T
    vertex_cap: int = 2**20
    cell_cap: int = 2**20
    bayes_eval_cap: int = 10**6
    unknown_cell_cap: int = 20
    nb_eval_cap: int = 10**6
    em_tol: float = 1e-9
    em_max_iter: int = 10_000
    output_format: str = "json"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("eps_zero", "eps_pos", "eps_t", "em_tol"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")
        for name in ("vertex_cap", "cell_cap", "bayes_eval_cap", "unknown_cell_cap",
                     "nb_eval_cap", "em_max_iter", "threads"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"{name} must be >= 1")
        if self.output_format not in ("json", "table"):
            raise InvalidParameter("output_format must be 'json' or 'table'")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def load(cls, path: str | Path | None = None, env=None) -> "RunConfig":
        """Defaults, then the JSON file at `path`, then IPCIR_THREADS."""
        env = os.environ if env is None else env
        cfg = cls()
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidParameter(f"cannot read config {path}: {exc}") from exc
            known = {f.name for f in fields(cls)}
            bad = set(data) - known
            if bad:
                raise InvalidParameter(f"unknown config keys: {sorted(bad)}")
            cfg = replace(cfg, **data)
        if "IPCIR_THREADS" in env:
            try:
                cfg = replace(cfg, threads=int(env["IPCIR_THREADS"]))
            except ValueError as exc:
                raise InvalidParameter("IPCIR_THREADS must be an integer") from exc
        return cfg


DEFAULT = RunConfig()
