"""Command-line entry point: ``lowlying <subcommand> [flags]``.

Every subcommand writes either a JSON report or a CSV table, to --out or stdout. Floats are
written with 12 significant digits so identical configurations give byte-identical files.
Exit codes: 0 success, 2 configuration error (a JSON error record on stderr), 3 when an
explicit-formula residual exceeds its certified tail.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .arith import is_fundamental
from .explicit import (
    dedekind_ef,
    ef_balance,
    ef_family_density,
    rem_table,
    resonance_table,
)
from .family import burgess_dashboard, enumerate_family, regime
from .lfun import ZeroCache, real_zero_scan
from .quadforms import GenusCharacter, class_group, genus_characters, principal_genus_min_prime
from .testfn import make_pair

SUBCOMMANDS = ("classgroup", "zeros", "efcheck", "density", "resonance", "remfig", "charsum", "regime")
EXIT_OK, EXIT_CONFIG, EXIT_UNBALANCED = 0, 2, 3


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _round(obj):
    """Recursively round floats to 12 significant digits for serialization."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else str(x)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=2) + "\n"


def csv_text(header: list[str], columns: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([v if isinstance(v, (int, np.integer)) else fmt(v) for v in row])
    return buf.getvalue()


@dataclass
class RunConfig:
    subcommand: str
    D: int | None = None
    X: float | None = None
    sigma: float = 1.0
    tf: str = "fejer"
    T: float = 50.0
    tmax: float | None = None
    step: float | None = None
    eps: float = 0.1
    out: str | None = None
    threads: int = 1
    cache: str | None = None
    psi: tuple[int, int] | None = None
    pmax: int = 100
    delta: float | None = None
    dedekind: bool = False

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"{self.subcommand} requires --{', --'.join(missing)}")

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.sigma <= 0:
            raise ConfigError("--sigma must be positive")
        if self.T <= 0:
            raise ConfigError("--T must be positive")
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if self.step is not None and self.step <= 0:
            raise ConfigError("--step must be positive")
        if self.tmax is not None and self.tmax <= 0:
            raise ConfigError("--tmax must be positive")
        if not 0 < self.eps <= 0.25:
            raise ConfigError("--eps must lie in (0, 1/4]")
        if self.tf not in ("fejer", "bump"):
            raise ConfigError("--tf must be fejer or bump")
        if self.subcommand == "zeros":
            self.require("D")
            if not (self.D == 1 or is_fundamental(self.D)):
                raise ConfigError(f"{self.D} is not 1 or a fundamental discriminant")
            return
        if self.subcommand == "remfig":
            return
        self.require("D")
        if self.D <= 0 or not is_fundamental(-self.D):
            raise ConfigError(f"-{self.D} is not a negative fundamental discriminant")
        if self.subcommand in ("efcheck", "density", "charsum", "regime"):
            self.require("X")
            if self.X < 2:
                raise ConfigError("--X must be at least 2")
        if self.psi is not None and -self.psi[0] * self.psi[1] != self.D:
            raise ConfigError(f"--psi {self.psi} does not factor -{self.D}")
        if self.delta is not None and not 0 <= self.delta < 0.5:
            raise ConfigError("--delta must lie in [0, 1/2)")


def _psi(cfg: RunConfig) -> GenusCharacter:
    if cfg.psi is not None:
        return GenusCharacter(*cfg.psi)
    chars = genus_characters(cfg.D)
    nontrivial = [c for c in chars if not c.is_trivial]
    return (nontrivial or chars)[0]


def _cache(cfg: RunConfig) -> ZeroCache | None:
    return ZeroCache(cfg.cache) if cfg.cache else None


def cmd_classgroup(cfg: RunConfig) -> tuple[str, int]:
    cg = class_group(cfg.D)
    rep = principal_genus_min_prime(cg)
    out = cg.to_json()
    out["principal_genus"] = [cg.forms[i].as_list() for i in cg.principal_genus]
    out["principal_genus_odd"] = cg.principal_genus_odd
    out["genus_characters"] = [[c.d1, c.d2] for c in genus_characters(cfg.D)]
    out["min_prime_check"] = {"bound": rep.bound, "primes_checked": len(rep.primes_checked), "ok": rep.ok}
    return dumps(out), EXIT_OK


def cmd_zeros(cfg: RunConfig) -> tuple[str, int]:
    step = cfg.step or 0.01
    recs = ZeroCache(cfg.cache).zeros(cfg.D, cfg.T, step)
    return csv_text(["index", "gamma", "width"],
                    [[r.index for r in recs], [r.gamma for r in recs], [r.width for r in recs]]), EXIT_OK


def cmd_efcheck(cfg: RunConfig) -> tuple[str, int]:
    tf = make_pair(cfg.tf, cfg.sigma)
    if cfg.dedekind:
        delta = cfg.delta if cfg.delta is not None else real_zero_scan(cfg.D).delta
        rep = dedekind_ef(cfg.D, tf, cfg.X, cfg.T, delta, cache=_cache(cfg), threads=cfg.threads)
    else:
        fam = enumerate_family(cfg.D, int(cfg.X))
        rep = ef_balance(_psi(cfg), fam, tf, cfg.T, cache=_cache(cfg), threads=cfg.threads)
    return dumps(rep.to_json()), EXIT_OK if rep.balanced else EXIT_UNBALANCED


def cmd_density(cfg: RunConfig) -> tuple[str, int]:
    tf = make_pair(cfg.tf, cfg.sigma)
    fam = enumerate_family(cfg.D, int(cfg.X))
    rep = ef_family_density(_psi(cfg), fam, tf, cfg.T, cache=_cache(cfg), threads=cfg.threads)
    return dumps(rep.to_json()), EXIT_OK if rep.ef.balanced else EXIT_UNBALANCED


def cmd_resonance(cfg: RunConfig) -> tuple[str, int]:
    t, red, blue, green, _ = resonance_table(cfg.D, cfg.tmax or 10.0, cfg.step or 0.005)
    return csv_text(["t", "red", "blue", "green"], [t, red, blue, green]), EXIT_OK


def cmd_remfig(cfg: RunConfig) -> tuple[str, int]:
    t, red, blue, green = rem_table(cfg.tmax or 20.0, cfg.step or 0.01)
    return csv_text(["t", "red", "blue", "green"], [t, red, blue, green]), EXIT_OK


def cmd_charsum(cfg: RunConfig) -> tuple[str, int]:
    fam = enumerate_family(cfg.D, int(cfg.X))
    rows = burgess_dashboard(fam, cfg.pmax, cfg.eps)
    cols = [[getattr(r, k) for r in rows] for k in ("p", "sum", "bound", "ratio")]
    return csv_text(["p", "sum", "bound", "ratio"], cols), EXIT_OK


def cmd_regime(cfg: RunConfig) -> tuple[str, int]:
    return dumps(regime(cfg.D, cfg.X, cfg.sigma).to_json()), EXIT_OK


COMMANDS = {
    "classgroup": cmd_classgroup,
    "zeros": cmd_zeros,
    "efcheck": cmd_efcheck,
    "density": cmd_density,
    "resonance": cmd_resonance,
    "remfig": cmd_remfig,
    "charsum": cmd_charsum,
    "regime": cmd_regime,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected d1,d2") from None
    return a, b


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lowlying", description="Low-lying zeros of quadratic twist families.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--D", type=int, help="D for the field Q(sqrt(-D)); a signed discriminant for 'zeros'")
    p.add_argument("--X", type=float, help="family size parameter (scale X for --dedekind)")
    p.add_argument("--sigma", type=float, default=1.0, help="support of ghat is [-sigma, sigma]")
    p.add_argument("--tf", default="fejer", help="test function family: fejer or bump")
    p.add_argument("--T", type=float, default=50.0, help="height for zeros")
    p.add_argument("--tmax", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--eps", type=float, default=0.1, help="epsilon in the Burgess-shaped bound")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache", help="zero cache file (JSON lines)")
    p.add_argument("--psi", type=_pair, help="genus character as d1,d2 with d1 d2 = -D")
    p.add_argument("--pmax", type=int, default=100, help="largest prime for 'charsum'")
    p.add_argument("--delta", type=float, help="injected real zero 1 - delta for --dedekind")
    p.add_argument("--dedekind", action="store_true", help="efcheck for zeta(s) L(s, chi_-D)")
    return p


def parse_config(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(ns))
    cfg.validate()
    return cfg


def _error(message: str, argv: list[str]) -> int:
    rec = {"error": "config", "message": message, "argv": list(argv)}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return EXIT_CONFIG


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        text, status = COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        return _error(str(exc), argv)
    except ValueError as exc:
        # precondition failures raised by the modules are configuration errors too
        return _error(str(exc), argv)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())

