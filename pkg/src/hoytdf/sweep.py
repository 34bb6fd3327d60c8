"""Sweep configuration, execution and CSV output.

Config documents are YAML mappings::

    m: [4, 16]            # modulation orders (sweep axis)
    k: [1, 2, 3]          # relay counts (sweep axis)
    q: [0.3, 1.0]         # symmetric fading parameter (sweep axis)
    q_sd: 1.0             # optional per-hop overrides of q; q_sr / q_rd take
    q_sr: 1.0             #   one value for every relay or one per relay
    q_rd: [0.3, 0.7]
    omega_sd: 1.0         # mean channel powers
    omega_sr: 1.0
    omega_rd: 1.0
    power_s: 1.0          # source / relay power weights
    power_r: 1.0
    noise: 1.0            # N0
    snr_db: {start: 0, stop: 30, step: 2}
    snr_links: [sd, sr, rd]
    mode: analytic        # analytic | simulate | compare
    trials: 1000000
    seed: 1
    out: results.csv

The SNR axis sets the transmit SNR of the driven hops (``snr_links``):
P = power_x * N0 * 10^(dB/10), so gamma_bar = omega * power_x * 10^(dB/10).
Hops not driven by the axis use P = power_x directly.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
import yaml

from .analytic import NetworkScenario, qam_scheme, total_ser
from .channel import HoytLink
from .errors import ConfigError, HoytDFError
from .mcsim import estimate_ser

__all__ = [
    "SnrGrid",
    "SweepConfig",
    "GridPoint",
    "SweepRow",
    "SweepResult",
    "MODES",
    "LINK_NAMES",
    "parse_config",
    "config_from_mapping",
    "dump_config",
    "config_to_mapping",
    "grid_points",
    "build_scenario",
    "run_sweep",
    "emit_csv",
    "format_csv",
    "read_csv",
]

MODES = ("analytic", "simulate", "compare")
LINK_NAMES = ("sd", "sr", "rd")


@dataclass(frozen=True)
class SnrGrid:
    start: float = 0.0
    stop: float = 30.0
    step: float = 2.0

    def values(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(max(count, 0))]


@dataclass(frozen=True)
class SweepConfig:
    m: tuple[int, ...] = (4,)
    k: tuple[int, ...] = (1,)
    q: tuple[float, ...] = (1.0,)
    q_sd: Optional[float] = None
    q_sr: Optional[tuple[float, ...]] = None
    q_rd: Optional[tuple[float, ...]] = None
    omega_sd: float = 1.0
    omega_sr: float = 1.0
    omega_rd: float = 1.0
    power_s: float = 1.0
    power_r: float = 1.0
    noise: float = 1.0
    snr_db: SnrGrid = SnrGrid()
    snr_links: tuple[str, ...] = LINK_NAMES
    mode: str = "analytic"
    trials: int = 10**6
    seed: Optional[int] = None
    out: Optional[str] = None
    workers: int = 1


_KEYS = {f.name for f in fields(SweepConfig)}


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _listify(key, v, check, what, line):
    items = list(v) if isinstance(v, (list, tuple)) else [v]
    if not items:
        raise ConfigError("list must not be empty", key, line)
    for item in items:
        if not check(item):
            raise ConfigError(f"expected {what}, got {item!r}", key, line)
    return tuple(items)


def config_from_mapping(raw: dict, lines: Optional[dict] = None) -> SweepConfig:
    """Validate a plain mapping (already loaded from YAML or CLI flags)."""
    lines = lines or {}
    values = {}
    for key, v in raw.items():
        line = lines.get(key)
        if key not in _KEYS:
            raise ConfigError("unknown key", key, line)
        if v is None:
            continue
        if key in ("m", "k"):
            values[key] = tuple(int(i) for i in _listify(key, v, _is_int, "integer", line))
        elif key in ("q", "q_sr", "q_rd"):
            values[key] = tuple(float(i) for i in _listify(key, v, _is_real, "number", line))
        elif key in ("q_sd", "omega_sd", "omega_sr", "omega_rd", "power_s", "power_r", "noise"):
            if not _is_real(v):
                raise ConfigError(f"expected a number, got {v!r}", key, line)
            values[key] = float(v)
        elif key == "snr_db":
            if not isinstance(v, dict):
                raise ConfigError("expected a mapping with start, stop, step", key, line)
            extra = set(v) - {"start", "stop", "step"}
            if extra:
                raise ConfigError(f"unknown sub-keys {sorted(extra)}", key, line)
            parts = {}
            for sub, val in v.items():
                if not _is_real(val):
                    raise ConfigError(f"{sub} must be a number, got {val!r}", key, line)
                parts[sub] = float(val)
            values[key] = SnrGrid(**parts)
        elif key == "snr_links":
            values[key] = _listify(key, v, lambda s: s in LINK_NAMES, f"one of {LINK_NAMES}", line)
        elif key == "mode":
            if v not in MODES:
                raise ConfigError(f"mode must be one of {MODES}, got {v!r}", key, line)
            values[key] = v
        elif key in ("trials", "seed", "workers"):
            if not _is_int(v):
                raise ConfigError(f"expected an integer, got {v!r}", key, line)
            values[key] = v
        elif key == "out":
            if not isinstance(v, str):
                raise ConfigError(f"expected a path string, got {v!r}", key, line)
            values[key] = v
    cfg = SweepConfig(**values)
    _check_invariants(cfg, lines)
    return cfg


def _check_invariants(cfg: SweepConfig, lines: dict):
    def fail(msg, key):
        raise ConfigError(msg, key, lines.get(key))

    if not cfg.snr_db.step > 0:
        fail(f"step must be positive, got {cfg.snr_db.step}", "snr_db")
    if cfg.snr_db.stop < cfg.snr_db.start:
        fail("stop must not be below start", "snr_db")
    for m in cfg.m:
        try:
            qam_scheme(m)
        except HoytDFError as exc:
            fail(str(exc), "m")
    if any(k < 0 for k in cfg.k):
        fail("relay counts must be non-negative", "k")
    for key in ("q", "q_sr", "q_rd"):
        vals = getattr(cfg, key) or ()
        if any(not 0 < v <= 1 for v in vals):
            fail("fading parameters must lie in (0, 1]", key)
        if key != "q" and len(vals) > 1 and any(k != len(vals) for k in cfg.k):
            fail(f"{len(vals)} per-relay values but k={list(cfg.k)}", key)
    if cfg.q_sd is not None and not 0 < cfg.q_sd <= 1:
        fail("fading parameters must lie in (0, 1]", "q_sd")
    for key in ("omega_sd", "omega_sr", "omega_rd", "noise"):
        if not getattr(cfg, key) > 0:
            fail("must be positive", key)
    for key in ("power_s", "power_r"):
        if getattr(cfg, key) < 0:
            fail("must be non-negative", key)
    if cfg.trials < 1:
        fail("must be at least 1", "trials")
    if cfg.workers < 1:
        fail("must be at least 1", "workers")


def parse_config(text: str) -> SweepConfig:
    """Parse a YAML config document; errors name the offending key and line."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed document: {exc}", line=mark.line + 1 if mark else None) from exc
    if root is None:
        return config_from_mapping({})
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("top level must be a mapping", line=root.start_mark.line + 1)
    constructor = yaml.SafeLoader("")
    raw, lines = {}, {}
    for key_node, value_node in root.value:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key in raw:
            raise ConfigError("duplicate key", key, line)
        try:
            raw[key] = constructor.construct_object(value_node, deep=True)
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad value: {exc}", key, line) from exc
        lines[key] = line
    return config_from_mapping(raw, lines)


def config_to_mapping(cfg: SweepConfig) -> dict:
    out = {}
    for f in fields(SweepConfig):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, SnrGrid):
            v = {"start": v.start, "stop": v.stop, "step": v.step}
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def dump_config(cfg: SweepConfig) -> str:
    return yaml.safe_dump(config_to_mapping(cfg), sort_keys=False)


@dataclass(frozen=True)
class GridPoint:
    index: int
    m: int
    k: int
    q_sd: float
    q_sr: tuple[float, ...]
    q_rd: tuple[float, ...]
    snr_db: float


@dataclass(frozen=True)
class SweepRow:
    point: GridPoint
    ser_analytic: Optional[float] = None
    ser_sim: Optional[float] = None
    stderr: Optional[float] = None
    rel_dev: Optional[float] = None
    passed: Optional[bool] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    mode: str
    rows: tuple[SweepRow, ...]

    @property
    def has_errors(self) -> bool:
        return any(r.error for r in self.rows)


def _per_relay(override, k, default):
    if override is None:
        return (default,) * k
    if len(override) == 1:
        return override * k
    return tuple(override)


def grid_points(cfg: SweepConfig) -> list[GridPoint]:
    """Grid in lexicographic (m, k, q, snr) order."""
    pts = []
    for m, k, q, s in itertools.product(cfg.m, cfg.k, cfg.q, cfg.snr_db.values()):
        pts.append(
            GridPoint(
                index=len(pts),
                m=m,
                k=k,
                q_sd=cfg.q_sd if cfg.q_sd is not None else q,
                q_sr=_per_relay(cfg.q_sr, k, q),
                q_rd=_per_relay(cfg.q_rd, k, q),
                snr_db=s,
            )
        )
    return pts


def build_scenario(cfg: SweepConfig, pt: GridPoint) -> NetworkScenario:
    rho = 10.0 ** (pt.snr_db / 10.0)

    def link(name, q, omega, weight):
        power = weight * cfg.noise * rho if name in cfg.snr_links else weight
        return HoytLink(q=q, omega=omega, power=power, noise=cfg.noise)

    return NetworkScenario(
        sd=link("sd", pt.q_sd, cfg.omega_sd, cfg.power_s),
        sr=tuple(link("sr", q, cfg.omega_sr, cfg.power_s) for q in pt.q_sr),
        rd=tuple(link("rd", q, cfg.omega_rd, cfg.power_r) for q in pt.q_rd),
        qam=qam_scheme(pt.m),
    )


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _evaluate(cfg: SweepConfig, pt: GridPoint) -> SweepRow:
    try:
        sc = build_scenario(cfg, pt)
        an = sim = None
        if cfg.mode in ("analytic", "compare"):
            an = total_ser(sc).total
        if cfg.mode in ("simulate", "compare"):
            sim = estimate_ser(sc, cfg.trials, _point_seed(cfg.seed, pt.index))
    except HoytDFError as exc:
        return SweepRow(pt, error=f"{type(exc).__name__}: {exc}")
    if cfg.mode == "analytic":
        return SweepRow(pt, ser_analytic=an)
    if cfg.mode == "simulate":
        return SweepRow(pt, ser_sim=sim.ser, stderr=sim.std_error)
    sigma = math.sqrt(an * (1.0 - an) / cfg.trials)
    return SweepRow(
        pt,
        ser_analytic=an,
        ser_sim=sim.ser,
        stderr=sim.std_error,
        rel_dev=(sim.ser - an) / an if an > 0 else math.inf,
        passed=abs(sim.ser - an) <= 3.0 * sigma,
    )


def run_sweep(cfg: SweepConfig) -> SweepResult:
    if cfg.mode in ("simulate", "compare") and cfg.seed is None:
        raise ConfigError("a seed is required for simulate/compare", "seed")
    pts = grid_points(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda p: _evaluate(cfg, p), pts))
    else:
        rows = [_evaluate(cfg, p) for p in pts]
    return SweepResult(cfg.mode, tuple(rows))


_BASE_COLUMNS = ["snr_db", "q_sd", "q_sr", "q_rd", "K", "M"]
_MODE_COLUMNS = {
    "analytic": ["ser_analytic"],
    "simulate": ["ser_sim", "stderr"],
    "compare": ["ser_analytic", "ser_sim", "stderr", "rel_dev", "pass"],
}


def _columns(mode):
    return _BASE_COLUMNS + _MODE_COLUMNS[mode] + ["error"]


def _num(v):
    return "" if v is None else f"{v:.8e}"


def _real(v):
    # shortest repr that reads back to the same float
    return repr(float(v))


def _qlist(vals):
    return ";".join(_real(v) for v in vals)


def format_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_columns(result.mode))
    for row in result.rows:
        pt = row.point
        cells = {
            "snr_db": _real(pt.snr_db),
            "q_sd": _real(pt.q_sd),
            "q_sr": _qlist(pt.q_sr),
            "q_rd": _qlist(pt.q_rd),
            "K": str(pt.k),
            "M": str(pt.m),
            "ser_analytic": _num(row.ser_analytic),
            "ser_sim": _num(row.ser_sim),
            "stderr": _num(row.stderr),
            "rel_dev": _num(row.rel_dev),
            "pass": "" if row.passed is None else str(row.passed).lower(),
            "error": row.error or "",
        }
        writer.writerow([cells[c] for c in _columns(result.mode)])
    return buf.getvalue()


def emit_csv(result: SweepResult, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_csv(result))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc


def read_csv(path: str) -> list[dict]:
    """Load a CSV written by :func:`emit_csv` back into typed dicts."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for key, val in rec.items():
                if key in ("K", "M"):
                    row[key] = int(val)
                elif key in ("q_sr", "q_rd"):
                    row[key] = tuple(float(v) for v in val.split(";")) if val else ()
                elif key == "pass":
                    row[key] = None if val == "" else val == "true"
                elif key == "error":
                    row[key] = val or None
                else:
                    row[key] = float(val) if val != "" else None
            out.append(row)
    return out
