"""Run configuration: a flat, sectioned key = value text format.

The parser is deliberately hand-rolled: unknown sections or keys are hard
errors reported with file and line, values are typed (strings, reals,
integer counts, comma-separated lists), and serialization round-trips
exactly (floats via repr).  Full-line comments start with '#'.

Sections and keys:

    [system]    class = general | separable | newtonian
                h = <expr>            (general)
                t = <expr>, v = <expr>  (separable)
                g = <expr>            (newtonian)
    [run]       schemes = euler-b, yoshida2, stormer-verlet, implicit-midpoint
                tau = 0.5, 1.0            explicit step sizes
                tau_lo, tau_hi, tau_count, tau_scale = linear|log   sweep grid
                empirical_tau_hi = 10.0   bracket top for bisection
                bisect_tol = 1e-06
    [search]    p_min, p_max, q_min, q_max, grid, tol
    [simulate]  n_max, escape_r, stride (0 = auto), offsets = dp, dq, ...
    [error]     s = s11, s12, s21, s22;  eta = e1, e2;  y0 = y1, y2
                steps = 1, 10, 100
"""

import math
from dataclasses import dataclass, field

from .systems import HamiltonianSystem


class ConfigError(Exception):
    def __init__(self, message: str, path: str = "<config>", line: int | None = None):
        where = path if line is None else f"{path}:{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class SystemSpec:
    class_tag: str
    exprs: dict[str, str]

    def build(self) -> HamiltonianSystem:
        if self.class_tag == "general":
            return HamiltonianSystem.general(self.exprs["h"])
        if self.class_tag == "separable":
            return HamiltonianSystem.separable(self.exprs["t"], self.exprs["v"])
        return HamiltonianSystem.newtonian(self.exprs["g"])


@dataclass
class SweepSpec:
    lo: float
    hi: float
    count: int
    scale: str = "linear"

    def taus(self) -> list[float]:
        if self.count == 1:
            return [self.lo]
        n = self.count - 1
        if self.scale == "log":
            grid = [self.lo * (self.hi / self.lo) ** (i / n) for i in range(self.count)]
        else:
            grid = [self.lo + (self.hi - self.lo) * i / n for i in range(self.count)]
        grid[0], grid[-1] = self.lo, self.hi  # pin endpoints exactly
        return grid


@dataclass
class SearchSpec:
    p_min: float = -5.0
    p_max: float = 5.0
    q_min: float = -5.0
    q_max: float = 5.0
    grid: int = 32
    tol: float = 1e-10

    def box(self):
        return ((self.p_min, self.p_max), (self.q_min, self.q_max))


@dataclass
class SimulateSpec:
    n_max: int = 100_000
    escape_r: float = 1e6
    stride: int = 0  # 0 means max(1, n_max // 10^4)
    offsets: list[float] = field(default_factory=lambda: [1e-3, 0.0])

    def offset_pairs(self) -> list[tuple[float, float]]:
        return [
            (self.offsets[i], self.offsets[i + 1])
            for i in range(0, len(self.offsets), 2)
        ]


@dataclass
class ErrorSpec:
    s: list[float]
    eta: list[float]
    y0: list[float]
    steps: list[int]


@dataclass
class RunConfig:
    system: SystemSpec | None = None
    schemes: list[str] = field(default_factory=list)
    taus: list[float] = field(default_factory=list)
    sweep: SweepSpec | None = None
    empirical_tau_hi: float = 10.0
    bisect_tol: float = 1e-6
    search: SearchSpec = field(default_factory=SearchSpec)
    sim: SimulateSpec = field(default_factory=SimulateSpec)
    error: ErrorSpec | None = None


_SYSTEM_KEYS = {"class", "h", "t", "v", "g"}
_RUN_KEYS = {
    "schemes",
    "tau",
    "tau_lo",
    "tau_hi",
    "tau_count",
    "tau_scale",
    "empirical_tau_hi",
    "bisect_tol",
}
_SEARCH_KEYS = {"p_min", "p_max", "q_min", "q_max", "grid", "tol"}
_SIM_KEYS = {"n_max", "escape_r", "stride", "offsets"}
_ERROR_KEYS = {"s", "eta", "y0", "steps"}
_SECTIONS = {
    "system": _SYSTEM_KEYS,
    "run": _RUN_KEYS,
    "search": _SEARCH_KEYS,
    "simulate": _SIM_KEYS,
    "error": _ERROR_KEYS,
}


def _scan(text: str, path: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Raw (section, key) -> (value, line) mapping with strict validation."""
    out: dict[str, dict[str, tuple[str, int]]] = {}
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", path, lineno)
            if section in out:
                raise ConfigError(f"duplicate section [{section}]", path, lineno)
            out[section] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", path, lineno)
        if section is None:
            raise ConfigError("key outside of any section", path, lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SECTIONS[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", path, lineno)
        if key in out[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", path, lineno)
        out[section][key] = (value.strip(), lineno)
    return out


def _get_float(raw: dict, section: str, key: str, default, path: str):
    if section not in raw or key not in raw[section]:
        return default
    value, lineno = raw[section][key]
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a real number, got {value!r}", path, lineno)


def _get_int(raw: dict, section: str, key: str, default, path: str):
    if section not in raw or key not in raw[section]:
        return default
    value, lineno = raw[section][key]
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", path, lineno)


def _get_str(raw: dict, section: str, key: str, default, path: str):
    if section not in raw or key not in raw[section]:
        return default
    return raw[section][key][0]


def _get_float_list(raw: dict, section: str, key: str, default, path: str):
    if section not in raw or key not in raw[section]:
        return default
    value, lineno = raw[section][key]
    try:
        return [float(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a list of reals, got {value!r}", path, lineno)


def _get_int_list(raw: dict, section: str, key: str, default, path: str):
    if section not in raw or key not in raw[section]:
        return default
    value, lineno = raw[section][key]
    try:
        return [int(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(
            f"{key} must be a list of integers, got {value!r}", path, lineno
        )


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    raw = _scan(text, path)
    cfg = RunConfig()

    if "system" in raw:
        sec = raw["system"]
        if "class" not in sec:
            raise ConfigError("[system] needs a class key", path)
        class_tag, lineno = sec["class"]
        needed = {"general": ("h",), "separable": ("t", "v"), "newtonian": ("g",)}
        if class_tag not in needed:
            raise ConfigError(
                f"class must be general, separable or newtonian, got {class_tag!r}",
                path,
                lineno,
            )
        exprs = {}
        for key in needed[class_tag]:
            if key not in sec:
                raise ConfigError(
                    f"system class {class_tag} needs key {key!r}", path, lineno
                )
            exprs[key] = sec[key][0]
        extra = set(sec) - {"class", *needed[class_tag]}
        if extra:
            key = sorted(extra)[0]
            raise ConfigError(
                f"key {key!r} does not belong to system class {class_tag}",
                path,
                sec[key][1],
            )
        cfg.system = SystemSpec(class_tag, exprs)

    schemes_str = _get_str(raw, "run", "schemes", "", path)
    cfg.schemes = [s.strip() for s in schemes_str.split(",") if s.strip()]
    cfg.taus = _get_float_list(raw, "run", "tau", [], path)
    sweep_keys = {"tau_lo", "tau_hi", "tau_count"}
    present = sweep_keys & set(raw.get("run", {}))
    if present:
        if present != sweep_keys:
            missing = sorted(sweep_keys - present)
            raise ConfigError(f"sweep grid is missing keys {missing}", path)
        scale = _get_str(raw, "run", "tau_scale", "linear", path)
        if scale not in ("linear", "log"):
            raise ConfigError(
                f"tau_scale must be linear or log, got {scale!r}",
                path,
                raw["run"]["tau_scale"][1] if "tau_scale" in raw["run"] else None,
            )
        lo = _get_float(raw, "run", "tau_lo", None, path)
        hi = _get_float(raw, "run", "tau_hi", None, path)
        count = _get_int(raw, "run", "tau_count", None, path)
        if not (0.0 < lo <= hi) or count < 1 or (scale == "log" and lo <= 0.0):
            raise ConfigError("invalid sweep range", path, raw["run"]["tau_lo"][1])
        cfg.sweep = SweepSpec(lo, hi, count, scale)
    cfg.empirical_tau_hi = _get_float(raw, "run", "empirical_tau_hi", 10.0, path)
    cfg.bisect_tol = _get_float(raw, "run", "bisect_tol", 1e-6, path)

    cfg.search = SearchSpec(
        p_min=_get_float(raw, "search", "p_min", -5.0, path),
        p_max=_get_float(raw, "search", "p_max", 5.0, path),
        q_min=_get_float(raw, "search", "q_min", -5.0, path),
        q_max=_get_float(raw, "search", "q_max", 5.0, path),
        grid=_get_int(raw, "search", "grid", 32, path),
        tol=_get_float(raw, "search", "tol", 1e-10, path),
    )
    cfg.sim = SimulateSpec(
        n_max=_get_int(raw, "simulate", "n_max", 100_000, path),
        escape_r=_get_float(raw, "simulate", "escape_r", 1e6, path),
        stride=_get_int(raw, "simulate", "stride", 0, path),
        offsets=_get_float_list(raw, "simulate", "offsets", [1e-3, 0.0], path),
    )
    if len(cfg.sim.offsets) % 2 != 0:
        raise ConfigError("offsets must contain an even number of reals", path)

    if "error" in raw:
        s = _get_float_list(raw, "error", "s", None, path)
        eta = _get_float_list(raw, "error", "eta", None, path)
        y0 = _get_float_list(raw, "error", "y0", None, path)
        steps = _get_int_list(raw, "error", "steps", None, path)
        for name, val, n in (("s", s, 4), ("eta", eta, 2), ("y0", y0, 2)):
            if val is None or len(val) != n:
                raise ConfigError(f"[error] needs {name} with {n} reals", path)
        if steps is None or not steps:
            raise ConfigError("[error] needs a non-empty steps list", path)
        cfg.error = ErrorSpec(s, eta, y0, steps)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as err:
        raise ConfigError(str(err), str(path))
    return parse_config(text, str(path))


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical defaults-filled text; parse(serialize(cfg)) == cfg."""
    lines = []
    if cfg.system is not None:
        lines += [f"[system]", f"class = {cfg.system.class_tag}"]
        for key in ("h", "t", "v", "g"):
            if key in cfg.system.exprs:
                lines.append(f"{key} = {cfg.system.exprs[key]}")
        lines.append("")
    lines.append("[run]")
    if cfg.schemes:
        lines.append(f"schemes = {', '.join(cfg.schemes)}")
    if cfg.taus:
        lines.append(f"tau = {', '.join(_fmt(t) for t in cfg.taus)}")
    if cfg.sweep is not None:
        lines += [
            f"tau_lo = {_fmt(cfg.sweep.lo)}",
            f"tau_hi = {_fmt(cfg.sweep.hi)}",
            f"tau_count = {cfg.sweep.count}",
            f"tau_scale = {cfg.sweep.scale}",
        ]
    lines += [
        f"empirical_tau_hi = {_fmt(cfg.empirical_tau_hi)}",
        f"bisect_tol = {_fmt(cfg.bisect_tol)}",
        "",
        "[search]",
        f"p_min = {_fmt(cfg.search.p_min)}",
        f"p_max = {_fmt(cfg.search.p_max)}",
        f"q_min = {_fmt(cfg.search.q_min)}",
        f"q_max = {_fmt(cfg.search.q_max)}",
        f"grid = {cfg.search.grid}",
        f"tol = {_fmt(cfg.search.tol)}",
        "",
        "[simulate]",
        f"n_max = {cfg.sim.n_max}",
        f"escape_r = {_fmt(cfg.sim.escape_r)}",
        f"stride = {cfg.sim.stride}",
        f"offsets = {', '.join(_fmt(x) for x in cfg.sim.offsets)}",
    ]
    if cfg.error is not None:
        lines += [
            "",
            "[error]",
            f"s = {', '.join(_fmt(x) for x in cfg.error.s)}",
            f"eta = {', '.join(_fmt(x) for x in cfg.error.eta)}",
            f"y0 = {', '.join(_fmt(x) for x in cfg.error.y0)}",
            f"steps = {', '.join(str(n) for n in cfg.error.steps)}",
        ]
    return "\n".join(lines) + "\n"
