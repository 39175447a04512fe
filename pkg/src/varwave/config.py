"""Run configuration: line-oriented ``key = value`` files.

Blank lines and ``#`` comments are ignored.  List values are comma
separated.  Unknown, duplicated or malformed keys raise ConfigError with the
offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from varwave.goursat import MODES
from varwave.wavefield import DATA_KINDS, FAMILIES

KEYS = (
    "speed.family",
    "speed.params",
    "data.kind",
    "data.params",
    "data.support",
    "grid.dx",
    "solver.M",
    "solver.h",
    "solver.mode",
    "solver.epsilon",
    "solver.corrector_iters",
    "frames.taus",
    "frames.samples",
    "output.dir",
)
REQUIRED = ("speed.family", "data.kind", "solver.M", "solver.h", "solver.mode")


class ConfigError(ValueError):
    def __init__(self, source: str, line: int, msg: str):
        super().__init__(f"{source}:{line}: {msg}")
        self.source = source
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    family: str
    speed_params: tuple[float, ...]
    kind: str
    data_params: tuple[float, ...]
    support: tuple[float, float]
    dx: float
    M: float
    hs: tuple[float, ...]  # empty means h = eps^3/4 per epsilon
    mode: str
    epsilons: tuple[float, ...]
    corrector_iters: int
    taus: tuple[float, ...]
    samples: int
    out_dir: str
    source: str = "<string>"

    def h_for(self, eps: float) -> float:
        return eps**3 / 4.0 if not self.hs else self.hs[0]

    def rows(self) -> list[tuple[float, float]]:
        """(h, eps) pairs for a convergence sweep."""
        eps = self.epsilons or (0.0,)
        if not self.hs:
            return [(e**3 / 4.0, e) for e in eps]
        if len(eps) == 1:
            return [(h, eps[0]) for h in self.hs]
        if len(self.hs) == 1:
            return [(self.hs[0], e) for e in eps]
        if len(self.hs) != len(eps):
            raise ValueError("solver.h and solver.epsilon lists differ in length")
        return list(zip(self.hs, eps))


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v) for v in raw.split(",") if v.strip())


def parse(text: str, source: str = "<string>") -> RunConfig:
    seen: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(source, lineno, f"expected 'key = value', got {body!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(source, lineno, f"unknown key {key!r}")
        if key in seen:
            raise ConfigError(source, lineno, f"duplicate key {key!r} (first set on line {seen[key][1]})")
        seen[key] = (value, lineno)

    end = len(text.splitlines()) + 1
    for key in REQUIRED:
        if key not in seen or not seen[key][0]:
            line = seen[key][1] if key in seen else end
            raise ConfigError(source, line, f"missing value for required key {key!r}")

    def get(key, conv, default):
        if key not in seen:
            return default
        value, lineno = seen[key]
        try:
            return conv(value)
        except ValueError as exc:
            raise ConfigError(source, lineno, f"bad value for {key!r}: {exc}") from None

    def check(key, ok, msg):
        if not ok:
            raise ConfigError(source, seen.get(key, (None, end))[1], f"{key!r}: {msg}")

    family = get("speed.family", str, "")
    check("speed.family", family in FAMILIES, f"expected one of {FAMILIES}")
    kind = get("data.kind", str, "")
    check("data.kind", kind in DATA_KINDS, f"expected one of {DATA_KINDS}")
    mode = get("solver.mode", str, "")
    check("solver.mode", mode in MODES, f"expected one of {MODES}")

    support = get("data.support", _floats, (-1.0, 1.0))
    check("data.support", len(support) == 2 and support[0] < 0.0 < support[1],
          "expected 'lo, hi' with lo < 0 < hi")
    dx = get("grid.dx", float, 1e-3)
    check("grid.dx", dx > 0, "must be positive")
    M = get("solver.M", float, 0.0)
    check("solver.M", M > 0, "must be positive")

    raw_h = seen["solver.h"][0]
    hs = () if raw_h == "auto" else get("solver.h", _floats, ())
    check("solver.h", raw_h == "auto" or (hs and all(h > 0 for h in hs)), "expected positive values or 'auto'")
    check("solver.h", hs or mode == "regularized", "'auto' needs regularized mode")
    epsilons = get("solver.epsilon", _floats, ())
    check("solver.epsilon", all(e >= 0 for e in epsilons), "must be nonnegative")
    check("solver.epsilon", mode != "regularized" or (epsilons and all(e > 0 for e in epsilons)),
          "regularized mode needs positive epsilon")
    iters = get("solver.corrector_iters", int, 2)
    check("solver.corrector_iters", iters >= 1, "must be >= 1")
    taus = get("frames.taus", _floats, ())
    check("frames.taus", all(t >= 0 for t in taus), "must be nonnegative")
    samples = get("frames.samples", int, 201)
    check("frames.samples", samples >= 2, "must be >= 2")

    return RunConfig(
        family=family,
        speed_params=get("speed.params", _floats, ()),
        kind=kind,
        data_params=get("data.params", _floats, ()),
        support=(support[0], support[1]),
        dx=dx,
        M=M,
        hs=hs,
        mode=mode,
        epsilons=epsilons,
        corrector_iters=iters,
        taus=taus,
        samples=samples,
        out_dir=get("output.dir", str, "out"),
        source=source,
    )


def scenario_names() -> list[str]:
    root = resources.files("varwave") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load(path_or_name: str) -> RunConfig:
    """Read a config file, or a bundled scenario by name (with or without .cfg)."""
    path = Path(path_or_name)
    if path.is_file():
        return parse(path.read_text(), str(path))
    name = path_or_name[:-4] if path_or_name.endswith(".cfg") else path_or_name
    res = resources.files("varwave") / "scenarios" / f"{name}.cfg"
    if res.is_file():
        return parse(res.read_text(), f"{name}.cfg")
    raise FileNotFoundError(f"no config file or bundled scenario named {path_or_name!r}")
