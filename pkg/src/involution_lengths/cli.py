"""Command-line front end: ``invlen <subcommand> [--flags]``.

Every flag can also be set through the environment as INVLEN_<FLAG>, with dashes
turned into underscores (``--n-max`` <- INVLEN_N_MAX); explicit flags win.
CSV output starts with a comment line carrying a hash of the full run configuration.
Failures print one JSON object on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["RunConfig", "main", "build_parser", "parse_range", "parse_grid"]

DIGITS = 17


@dataclass
class RunConfig:
    """Everything a run depends on. Unused fields keep their defaults."""
    command: str = "validate"
    case: str = "inv"
    n: int = 1000
    n_max: int = 100
    l: str = ""                   # "a:b" inclusive range of bounds; empty means automatic
    r: float = 10.0
    beta: int = 1
    a: float = 1.0
    grid: str = "-8:0.1:5"        # start:step:stop for t (tw) or s (hard-edge)
    order: int = 7
    m: int = 2
    kind: str = "cdf"
    nodes: int = 0                # quadrature nodes; 0 picks them adaptively
    cheb_points: int = 240
    seed: int = 0
    samples: int = 100_000
    threads: int = 0              # 0 means every available core
    z: str = ""                   # comma-separated; empty means the sixteen +-k/8
    j: str = "1,2,3"
    suite: str = "all"
    figure: int = 1
    size: int = 0                 # nu, r or n for export-figure; 0 picks the default
    output: str = ""              # empty means stdout

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown configuration fields {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        """Hash of everything except the output location."""
        data = dataclasses.asdict(self)
        data.pop("output")
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()[:16]


# ------------------------------------------------------------------ parsing

def parse_range(text: str) -> range:
    """'a:b' -> a..b inclusive; a single integer is a one-element range."""
    parts = text.split(":")
    if len(parts) == 1:
        k = int(parts[0])
        return range(k, k + 1)
    if len(parts) != 2:
        raise ValueError(f"bad range {text!r}; expected a:b")
    a, b = int(parts[0]), int(parts[1])
    if b < a:
        raise ValueError(f"empty range {text!r}")
    return range(a, b + 1)


def parse_grid(text: str) -> np.ndarray:
    """'start:step:stop' -> points start, start+step, ..., stop (inclusive up to rounding)."""
    try:
        a, h, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"bad grid {text!r}; expected start:step:stop") from None
    if h <= 0 or b < a:
        raise ValueError(f"bad grid {text!r}")
    k = int(np.floor((b - a) / h + 1e-9))
    return np.round(a + h * np.arange(k + 1), 12)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer, str)):
        return str(x)
    return f"{float(x):.{DIGITS}g}"


class _Out:
    """CSV or JSON sink: a file when --output is given, stdout otherwise."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines: list[str] = []

    def header(self):
        self.lines.append(f"# invlen {self.cfg.command} config={self.cfg.digest()}")

    def rows(self, columns: Sequence[str], rows: Sequence[dict]):
        self.lines.append(",".join(columns))
        for r in rows:
            self.lines.append(",".join(_fmt(r.get(c, "")) for c in columns))

    def close(self):
        text = "\n".join(self.lines) + "\n"
        if self.cfg.output:
            with open(self.cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _columns(rows: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    return cols


# ------------------------------------------------------------------ commands

def cmd_tables(cfg: RunConfig, out: _Out) -> int:
    from .exact_series import length_counts_table
    tab = length_counts_table(cfg.case, cfg.n_max)
    out.header()
    out.lines.append("case,n,l,count")
    for n in tab.rows:
        if n:
            out.lines.extend(f"{tab.case.tag},{n},{l},{tab.count(n, l)}" for l in range(1, n + 1))
    return 0


def cmd_oracle(cfg: RunConfig, out: _Out) -> int:
    from .oracle import enumeration_histogram, rsk_count
    hist = enumeration_histogram(cfg.case, cfg.n)
    out.header()
    out.rows(["case", "n", "l", "enumeration", "tableaux"],
             [{"case": cfg.case, "n": cfg.n, "l": l, "enumeration": hist.get(l, 0),
               "tableaux": rsk_count(cfg.case, cfg.n, l)} for l in range(1, cfg.n + 1)])
    return 0


def cmd_sample(cfg: RunConfig, out: _Out) -> int:
    from .sampler import simulate_lengths
    hist = simulate_lengths(cfg.case, cfg.n, cfg.samples, cfg.seed, cfg.threads or None)
    out.header()
    out.lines.extend(hist.csv_lines())
    return 0


def cmd_tw(cfg: RunConfig, out: _Out) -> int:
    from .edge import tw_jets
    if not 0 <= cfg.order <= 7:
        raise ValueError("order must lie in 0..7")
    t = parse_grid(cfg.grid)
    jets = tw_jets(cfg.beta, t, cfg.order, cfg.cheb_points)
    cols = ["beta", "t", "F"] + [f"F{k}" for k in range(1, cfg.order + 1)]
    rows = []
    for i, x in enumerate(t):
        row = {"beta": cfg.beta, "t": float(x), "F": jets[i, 0]}
        row.update({f"F{k}": jets[i, k] for k in range(1, cfg.order + 1)})
        rows.append(row)
    out.header()
    out.rows(cols, rows)
    return 0


def cmd_hard_edge(cfg: RunConfig, out: _Out) -> int:
    from .edge import hard_edge_gap
    s = parse_grid(cfg.grid)
    if s[0] < 0:
        raise ValueError("s must be >= 0")
    out.header()
    out.rows(["beta", "a", "s", "E"], [{"beta": cfg.beta, "a": cfg.a, "s": float(x),
                                        "E": hard_edge_gap(cfg.beta, float(x), cfg.a, cfg.nodes or None)}
                                       for x in s])
    return 0


def _bounds(cfg: RunConfig) -> range:
    if cfg.l:
        return parse_range(cfg.l)
    from .cases import get_case
    case = get_case(cfg.case)
    g = case.gamma * cfg.n
    c, w = 2 * g ** 0.5 - 1.8 * g ** (1 / 6), 5 * g ** (1 / 6)
    if case.tag == "decr-fpf":
        c, w = c / 2, w / 2
    return range(max(1, int(c - w)), int(c + w) + 1)


def cmd_expand(cfg: RunConfig, out: _Out) -> int:
    from .expansions import cdf_evaluation_point, cdf_expansion, pdf_evaluation_point, pdf_expansion
    if cfg.kind not in ("cdf", "pdf"):
        raise ValueError("kind must be cdf or pdf")
    f, point = (cdf_expansion, cdf_evaluation_point) if cfg.kind == "cdf" else (pdf_expansion, pdf_evaluation_point)
    rows = []
    for l in _bounds(cfg):
        row = {"case": cfg.case, "n": cfg.n, "l": l, "t": point(cfg.case, cfg.n, l)}
        row.update({f"expansion_m{k}": float(f(cfg.case, cfg.n, l, k)) for k in range(cfg.m + 1)})
        rows.append(row)
    out.header()
    out.rows(_columns(rows), rows)
    return 0


def cmd_moments(cfg: RunConfig, out: _Out) -> int:
    from .expansions import mean_variance_expansion, mu_nu_coefficients
    from .cases import get_case
    top = 7 if get_case(cfg.case).tag == "inv" else 3
    if not 0 <= cfg.m <= top:
        raise ValueError(f"m must lie in 0..{top} for this case")
    rows = []
    for j in range(cfg.m + 1):
        mu, nu, _, _ = mu_nu_coefficients(cfg.case, j)
        mean, var = mean_variance_expansion(cfg.case, cfg.n, j)
        rows.append({"case": cfg.case, "j": j, "mu": mu, "nu": nu, "n": cfg.n, "mean": mean, "variance": var})
    out.header()
    out.rows(["case", "j", "mu", "nu", "n", "mean", "variance"], rows)
    return 0


def cmd_hypothesis(cfg: RunConfig, out: _Out) -> int:
    import warnings
    from .hypothesis_lab import reconstruct_coefficients, z_values
    zs = [float(x) for x in cfg.z.split(",")] if cfg.z else z_values()
    js = [int(x) for x in cfg.j.split(",")]
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for z in zs:
            for j in js:
                reports.append(reconstruct_coefficients(z, j))
    payload = {"config": cfg.digest(), "reports": [r.to_json() for r in reports]}
    out.lines.append(json.dumps(payload, indent=1))
    return 0 if all(r.passed or r.j == 3 for r in reports) else 1


def cmd_validate(cfg: RunConfig, out: _Out) -> int:
    from .validation import SUITES, run_suite
    if cfg.suite not in SUITES and not cfg.suite.replace(",", "").isdigit():
        raise ValueError(f"unknown suite {cfg.suite!r}; choose from {sorted(SUITES)} or a list like 1,4,6")
    suite = cfg.suite if cfg.suite in SUITES else [int(k) for k in cfg.suite.split(",")]
    results = run_suite(suite, report=lambda r: print(r.line(), file=sys.stderr, flush=True))
    out.lines.append(json.dumps({"config": cfg.digest(), "checks": [r.to_json() for r in results]}, indent=1))
    return 0 if all(r.passed for r in results) else 1


FIGURE_DEFAULT_SIZE = {1: 100, 2: 160, 3: 250, 4: 1000, 5: 1000}


def cmd_export_figure(cfg: RunConfig, out: _Out) -> int:
    from .figures import figure_rows
    if cfg.figure not in FIGURE_DEFAULT_SIZE:
        raise ValueError("figure must be one of 1..5")
    rows = figure_rows(cfg.figure, cfg.size or FIGURE_DEFAULT_SIZE[cfg.figure])
    out.header()
    out.rows(_columns(rows), rows)
    return 0


COMMANDS = {
    "tables": (cmd_tables, "exact count tables as CSV", ["case", "n_max"]),
    "oracle": (cmd_oracle, "enumeration and tableau counts for small n", ["case", "n"]),
    "sample": (cmd_sample, "Monte Carlo histogram of the length", ["case", "n", "samples", "seed", "threads"]),
    "tw": (cmd_tw, "Tracy-Widom distribution and derivatives on a grid", ["beta", "grid", "order", "cheb_points"]),
    "hard-edge": (cmd_hard_edge, "hard-edge gap probabilities", ["beta", "a", "grid", "nodes"]),
    "expand": (cmd_expand, "finite-n expansions of the CDF or density", ["case", "n", "l", "m", "kind"]),
    "moments": (cmd_moments, "mean and variance expansion coefficients", ["case", "n", "m"]),
    "hypothesis": (cmd_hypothesis, "rational reconstruction of expansion terms (JSON)", ["z", "j"]),
    "validate": (cmd_validate, "run acceptance checks (JSON summary)", ["suite"]),
    "export-figure": (cmd_export_figure, "data behind one comparison figure", ["figure", "size"]),
}

_HELP = {
    "case": "incr-fpf, decr-fpf or inv", "n": "size (2-cycles for fixed-point-free cases)",
    "n_max": "largest row", "l": "bounds as a:b (default: around the bulk)",
    "beta": "symmetry index 1, 2 or 4", "a": "hard-edge parameter",
    "grid": "start:step:stop", "order": "highest derivative", "m": "expansion order",
    "kind": "cdf or pdf", "nodes": "quadrature nodes (0 = automatic)",
    "cheb_points": "Chebyshev points of the soft-edge representation",
    "seed": "random seed", "samples": "number of samples", "threads": "worker threads (0 = all)",
    "z": "comma-separated z values", "j": "comma-separated orders", "suite": "suite name or list of check numbers",
    "figure": "figure number 1..5", "size": "nu, r or n (0 = default)", "output": "output file (default stdout)",
}


def _env_default(name: str, kind, fallback):
    raw = os.environ.get("INVLEN_" + name.upper())
    if raw is None:
        return fallback
    try:
        return kind(raw)
    except ValueError:
        raise ValueError(f"INVLEN_{name.upper()}={raw!r} is not a valid {kind.__name__}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="invlen", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = RunConfig()
    types = {f.name: type(getattr(defaults, f.name)) for f in dataclasses.fields(RunConfig)}
    for name, (_, help_text, fields) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        for f in fields + ["output"]:
            p.add_argument("--" + f.replace("_", "-"), dest=f, type=types[f],
                           default=_env_default(f, types[f], getattr(defaults, f)), help=_HELP[f])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        print(json.dumps({"error": "ValueError", "message": str(exc)}), file=sys.stderr)
        return 2
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    out = _Out(cfg)
    try:
        status = COMMANDS[cfg.command][0](cfg, out)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": cfg.command}),
              file=sys.stderr)
        return 2
    out.close()
    return status


if __name__ == "__main__":
    sys.exit(main())
