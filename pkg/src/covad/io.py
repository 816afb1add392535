"""File formats: complex matrices (binary and CSV) and scenario/solver config files.

Binary matrix layout, all little-endian::

    8 bytes   magic b"COVADMX1"
    uint64    rows
    uint64    cols
    float64[] rows*cols (re, im) pairs, column-major

Config files are INI-style key-value text with a ``[scenario]`` section
(ScenarioConfig fields), an optional ``[solver]`` section (SolverOptions
fields shared by every estimator) and an optional ``[run]`` section
(``trials``, ``solvers``, ``fixed_pilots``, ``nu_min``, ``nu_max``, ``nu_points``)::

    [scenario]
    D_c = 30
    K_c = 400
    A_c = 60
    M = 120
    sigma2 = 1.0
    snr_db_active = 10
    pilot_kind = unit_modulus_random_phase
    channel_kind = spatially_white
    rng_seed = 7

    [solver]
    max_sweeps = 1000
    coordinate_order = random_permutation_per_sweep
"""
from __future__ import annotations

import configparser
import struct
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorKind, SolverOptions
from .model import ConfigError, ScenarioConfig

MAGIC = b"COVADMX1"
_HEADER = struct.Struct("<8sQQ")


def write_matrix(path, M: np.ndarray) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    rows, cols = M.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.asfortranarray(M).reshape(-1, order="F").astype("<c16").tobytes())


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, rows, cols = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a covad matrix file (magic {magic!r})")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {data.size}")
    return data.reshape((rows, cols), order="F").astype(np.complex128)


def write_matrix_csv(path, M: np.ndarray) -> None:
    """One row per matrix row; each entry written as ``re+imj``."""
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        rows = [[complex(tok) for tok in line.strip().split(",")] for line in fh if line.strip()]
    return np.array(rows, dtype=np.complex128)


# --------------------------------------------------------------------------
# config files

_SCENARIO_TYPES = {
    "D_c": int,
    "K_c": int,
    "A_c": int,
    "M": int,
    "sigma2": float,
    "snr_db_active": float,
    "pilot_kind": str,
    "channel_kind": str,
    "m_eff_fraction": float,
    "rng_seed": int,
}
_SOLVER_TYPES = {
    "max_sweeps": int,
    "tol": float,
    "coordinate_order": str,
    "rho": float,
    "reinversion_period": int,
    "seed": int,
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    scenario: ScenarioConfig
    solver: dict = field(default_factory=dict)  # SolverOptions overrides
    solvers: tuple = ("ml", "mmv", "nnls")
    trials: int = 50
    fixed_pilots: bool = True
    nu_grid: np.ndarray | None = None

    def solver_options(self, kinds=None) -> list[SolverOptions]:
        kinds = self.solvers if kinds is None else kinds
        return [SolverOptions(estimator_kind=EstimatorKind.parse(k), **self.solver) for k in kinds]


def _typed_section(parser, section, types):
    out = {}
    if not parser.has_section(section):
        return out
    for key, raw in parser.items(section):
        if key not in types:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        raw = raw.strip()
        if raw.lower() in ("", "none", "default"):
            continue
        try:
            out[key] = types[key](raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None
    return out


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (D_c, K_c)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if not parser.has_section("scenario"):
        raise ConfigError("config needs a [scenario] section")
    extra = set(parser.sections()) - {"scenario", "solver", "run"}
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")
    scen = _typed_section(parser, "scenario", _SCENARIO_TYPES)
    missing = {"D_c", "K_c", "A_c", "M"} - scen.keys()
    if missing:
        raise ConfigError(f"[scenario] is missing {sorted(missing)}")
    try:
        scenario = ScenarioConfig(**scen)
        solver = _typed_section(parser, "solver", _SOLVER_TYPES)
        SolverOptions(**solver)  # validate early
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    rc = RunConfig(scenario, solver)
    if parser.has_section("run"):
        sec = parser["run"]
        known = {"trials", "solvers", "fixed_pilots", "nu_min", "nu_max", "nu_points"}
        unknown = set(sec.keys()) - known
        if unknown:
            raise ConfigError(f"unknown keys in [run]: {sorted(unknown)}")
        try:
            if "trials" in sec:
                rc.trials = int(sec["trials"])
            if "solvers" in sec:
                rc.solvers = parse_solver_list(sec["solvers"])
            if "fixed_pilots" in sec:
                rc.fixed_pilots = _parse_bool(sec["fixed_pilots"])
            if {"nu_min", "nu_max", "nu_points"} & set(sec.keys()):
                lo = float(sec.get("nu_min", "1e-4"))
                hi = float(sec.get("nu_max", "1e2"))
                n = int(sec.get("nu_points", "100"))
                if not 0 < lo < hi or n < 2:
                    raise ConfigError("need 0 < nu_min < nu_max and nu_points >= 2")
                rc.nu_grid = np.logspace(np.log10(lo), np.log10(hi), n)
        except ValueError as exc:
            raise ConfigError(f"[run]: {exc}") from None
        if rc.trials < 1:
            raise ConfigError("trials must be >= 1")
    return rc


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def dump_config(rc: RunConfig) -> str:
    lines = ["[scenario]"]
    lines += [f"{k} = {v}" for k, v in rc.scenario.to_dict().items()]
    if rc.solver:
        lines += ["", "[solver]"]
        lines += [f"{k} = {getattr(v, 'value', v)}" for k, v in rc.solver.items()]
    lines += ["", "[run]", f"trials = {rc.trials}", f"solvers = {','.join(rc.solvers)}",
              f"fixed_pilots = {str(rc.fixed_pilots).lower()}"]
    if rc.nu_grid is not None:
        lines += [f"nu_min = {float(rc.nu_grid[0])!r}", f"nu_max = {float(rc.nu_grid[-1])!r}",
                  f"nu_points = {rc.nu_grid.size}"]
    return "\n".join(lines) + "\n"


def parse_solver_list(text: str) -> tuple:
    kinds = tuple(EstimatorKind.parse(tok).value for tok in text.split(",") if tok.strip())
    if not kinds:
        raise ConfigError("empty solver list")
    return kinds
