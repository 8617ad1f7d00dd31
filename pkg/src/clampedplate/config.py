"""Study configuration read from an INI file.

Example::

    [domain]
    kind = box            ; interval | box | disk
    extents = 1.0, 1.0
    radius = 1.0

    [grid]
    divisions = 16, 32, 64

    [solver]
    K = 12
    method = auto         ; auto | dense | shift-invert
    tol = 1e-10

    [study]
    seed = 0
    k_max = 10
    inequalities = theorem11, ppw, hook, cheng_yang, conjecture, levine_protter

    [trial]
    g = cos:2, sin:3, bump
    a = 1.0, 2.5
    axes = 0
    k = 1, 2, 3, 4, 5

    [lemma21]
    instances = 1000
    length = 8
    spread = 10.0

    [output]
    dir = results
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .grid import Domain
from .trial import parse_multiplier

INEQUALITY_IDS = ("theorem11", "ppw", "hook", "cheng_yang", "conjecture", "levine_protter")
METHODS = ("auto", "dense", "shift-invert")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    domain: Domain
    divisions: tuple[int, ...]
    K: int = 12
    method: str = "auto"
    tol: float = 1e-10
    seed: int = 0
    k_max: int | None = None
    inequalities: tuple[str, ...] = INEQUALITY_IDS
    g_specs: tuple[str, ...] = ("cos:2", "sin:3", "bump")
    a_values: tuple[float, ...] = (1.0,)
    axes: tuple[int, ...] = (0,)
    k_values: tuple[int, ...] = (1, 2, 3, 4, 5)
    lemma_instances: int = 1000
    lemma_length: int = 8
    lemma_spread: float = 10.0
    out_dir: str = "results"

    def __post_init__(self):
        d = self.divisions
        if not d:
            raise ConfigError("at least one divisions value is required")
        if min(d) < 4:
            raise ConfigError(f"divisions must be at least 4, got {list(d)}")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ConfigError(f"divisions must be strictly increasing, got {list(d)}")
        if self.K < 2:
            raise ConfigError("K must be at least 2")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        bad = [i for i in self.inequalities if i not in INEQUALITY_IDS]
        if bad:
            raise ConfigError(f"unknown inequality ids {bad}; choose from {INEQUALITY_IDS}")
        if any(m < 0 or m >= self.domain.n for m in self.axes):
            raise ConfigError(f"axes must lie in 0..{self.domain.n - 1}")
        for spec in self.g_specs:
            try:
                parse_multiplier(spec)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if any(a < 0 for a in self.a_values):
            raise ConfigError("trial frequencies a must be nonnegative")
        if any(k < 1 or k + 2 > self.K for k in self.k_values):
            raise ConfigError(f"trial k values must satisfy 1 <= k <= K - 2 = {self.K - 2}")
        if self.k_max is not None and not 1 <= self.k_max <= self.K - 1:
            raise ConfigError(f"k_max must lie in 1..K-1 = {self.K - 1}")

    @property
    def effective_k_max(self) -> int:
        return self.k_max if self.k_max is not None else self.K - 1

    def with_overrides(self, **kw) -> "StudyConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def echo(self) -> dict:
        dom = self.domain
        return {
            "domain": {
                "kind": dom.kind,
                "extents": list(dom.extents),
                "origin": list(dom.origin),
                "radius": dom.radius,
                "center": list(dom.center) if dom.center is not None else None,
            },
            "divisions": list(self.divisions),
            "K": self.K,
            "method": self.method,
            "tol": self.tol,
            "seed": self.seed,
            "k_max": self.effective_k_max,
            "inequalities": list(self.inequalities),
            "trial": {
                "g": list(self.g_specs),
                "a": list(self.a_values),
                "axes": list(self.axes),
                "k": list(self.k_values),
            },
            "lemma21": {
                "instances": self.lemma_instances,
                "length": self.lemma_length,
                "spread": self.lemma_spread,
            },
        }


def _list(raw: str, conv):
    return tuple(conv(x.strip()) for x in raw.split(",") if x.strip())


def _domain(sec) -> Domain:
    kind = sec.get("kind", "interval").strip()
    if kind == "interval":
        ext = _list(sec.get("extents", "1.0"), float)
        return Domain.interval(ext[0])
    if kind == "box":
        return Domain.box(_list(sec.get("extents", "1.0, 1.0"), float))
    if kind == "disk":
        return Domain.disk(float(sec.get("radius", 1.0)))
    raise ConfigError(f"unknown domain kind {kind!r}")


def parse_config(text: str) -> StudyConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
        get = lambda s: cp[s] if cp.has_section(s) else {}
        grid, solver = get("grid"), get("solver")
        study, trial, lemma, out = get("study"), get("trial"), get("lemma21"), get("output")
        domain = _domain(get("domain"))
        k_max = study.get("k_max")
        return StudyConfig(
            domain=domain,
            divisions=_list(grid.get("divisions", "50, 100, 200"), int),
            K=int(solver.get("K", 12)),
            method=solver.get("method", "auto").strip(),
            tol=float(solver.get("tol", 1e-10)),
            seed=int(study.get("seed", 0)),
            k_max=int(k_max) if k_max not in (None, "") else None,
            inequalities=_list(study.get("inequalities", ",".join(INEQUALITY_IDS)), str),
            g_specs=_list(trial.get("g", "cos:2, sin:3, bump"), str),
            a_values=_list(trial.get("a", "1.0"), float),
            axes=_list(trial.get("axes", "0"), int),
            k_values=_list(trial.get("k", "1, 2, 3, 4, 5"), int),
            lemma_instances=int(lemma.get("instances", 1000)),
            lemma_length=int(lemma.get("length", 8)),
            lemma_spread=float(lemma.get("spread", 10.0)),
            out_dir=out.get("dir", "results"),
        )
    except ConfigError:
        raise
    except (configparser.Error, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> StudyConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text)
