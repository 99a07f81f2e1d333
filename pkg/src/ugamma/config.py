"""Run configuration: parsing, validation and construction of the arithmetic objects."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import cached_property

from .characters import (
    AdditiveCharacter,
    MultiplicativeCharacter,
    character_from_wild,
    make_mult_character,
)
from .localfield import ExtensionContext, is_prime, parse_ext
from .unitary import FormContext

SUITE_NAMES = (
    "norm-axioms",
    "cayley-identities",
    "det-trace",
    "group-iso",
    "char-rewrite",
    "restriction-scalars",
    "embedding",
    "orbit-solve",
    "separation",
    "shift-invariance",
    "vanishing-L",
    "vanishing-L0",
    "gamma",
    "gamma-dual-path",
    "measure-m1",
)


class ConfigError(ValueError):
    """Schema violation; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    p: int = 3
    extension: dict = field(default_factory=lambda: {"type": "unramified"})
    m: int = 1
    k: int = 0
    T_units: list | None = None
    N_chi: int = 2
    chi_spec: dict | None = None
    precision: int = 8
    suites: list = field(default_factory=lambda: list(SUITE_NAMES))
    budget: int = 1_000_000
    seed: int = 0
    samples: int = 100

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("p", "m", "k", "N_chi", "precision", "budget", "seed", "samples"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(name, f"expected an integer, got {v!r}")
        if self.p == 2:
            raise ConfigError("p", "p = 2 is not supported: only odd primes are (the 2-adic case degenerates)")
        if not is_prime(self.p):
            raise ConfigError("p", f"{self.p} is not prime")
        if self.m < 1:
            raise ConfigError("m", "must be positive")
        if not 0 <= self.k <= self.m:
            raise ConfigError("k", f"must lie in [0, m={self.m}]")
        if self.N_chi < 1:
            raise ConfigError("N_chi", "must be at least 1")
        if self.precision < 1:
            raise ConfigError("precision", "must be positive")
        if self.budget <= 0:
            raise ConfigError("budget", "must be positive")
        if not isinstance(self.extension, dict) or self.extension.get("type") not in ("unramified", "ramified"):
            raise ConfigError("extension", "expected {type: unramified|ramified, a?: number}")
        if self.T_units is not None:
            if not isinstance(self.T_units, list) or len(self.T_units) != self.m:
                raise ConfigError("T_units", f"expected a list of {self.m} units")
        if not isinstance(self.suites, list) or not self.suites:
            raise ConfigError("suites", "expected a non-empty list of suite names")
        for s in self.suites:
            if s not in SUITE_NAMES:
                raise ConfigError("suites", f"unknown suite {s!r}")
        if self.chi_spec is not None:
            if not isinstance(self.chi_spec, dict) or not ({"wild", "generator_images"} & set(self.chi_spec)):
                raise ConfigError("chi_spec", "expected {wild, tame?} or {generator_images}")
        try:
            self.ext
        except ValueError as e:
            raise ConfigError("extension", str(e)) from None
        try:
            self.form
        except ValueError as e:
            raise ConfigError("T_units", str(e)) from None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown field")
        return cls(**d)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError("<root>", f"invalid JSON: {e}") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)

    @cached_property
    def ext(self) -> ExtensionContext:
        kind = self.extension.get("type")
        a = self.extension.get("a")
        if a is None:
            if kind == "unramified":
                return ExtensionContext.unramified(self.p, self.precision)
            return ExtensionContext.ramified(self.p, precision=self.precision)
        ctx = ExtensionContext(self.p, Fraction(str(a)), self.precision)
        if ctx.ramification != kind:
            raise ValueError(f"a = {a} gives a {ctx.ramification} extension, config says {kind}")
        return ctx

    @cached_property
    def form(self) -> FormContext:
        units = tuple(Fraction(str(u)) for u in self.T_units) if self.T_units else ()
        return FormContext(self.ext, self.m, self.k, units)

    def form_with(self, m: int | None = None, k: int | None = None) -> FormContext:
        m = self.m if m is None else m
        k = self.k if k is None else min(k, m)
        units = tuple(Fraction(str(u)) for u in self.T_units) if self.T_units and m == self.m else ()
        return FormContext(self.ext, m, k, units)

    @cached_property
    def psi(self) -> AdditiveCharacter:
        return AdditiveCharacter(self.ext)

    @cached_property
    def chi(self) -> MultiplicativeCharacter:
        return build_character(self.ext, self.N_chi, self.chi_spec)


def build_character(ext: ExtensionContext, N_chi: int, spec: dict | None) -> MultiplicativeCharacter:
    """Character from a config spec; the default is wild parameter p^-N_chi, trivial tame part."""
    spec = spec or {}
    try:
        if "generator_images" in spec:
            return make_mult_character(ext, N_chi, [Fraction(str(x)) for x in spec["generator_images"]])
        wild = spec.get("wild")
        a0 = parse_ext(ext, wild) if wild is not None else ext.elem(Fraction(1, ext.p**N_chi))
        tame = Fraction(str(spec.get("tame", 0)))
        return character_from_wild(ext, N_chi, a0, tame)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError("chi_spec", str(e)) from None
