"""Command-line front end: ``kerntract <command> --config run.json``.

Commands write CSV/JSON artefacts into the output directory.  Exit codes:
0 success, 1 check failure, 2 usage or configuration error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, KerntractError, ResourceLimitError, TruncationError
from .kernels import GAUSSIAN, ParamSeq, decay_rate, factor_spectra, gaussian_closed_spectrum, scaled_spectrum
from .quadrature import DEFAULT_ORDER, MAX_ORDER, gauss_hermite
from .tensor import top_k
from .tractability import (
    ABSOLUTE, NORMALIZED, CriterionSpec, _jsonable, build_report, default_gamma_grid, exponent, fit_rates,
    info_complexity, std_sample_bound, worst_case_error_all,
)
from .verify import DEFAULT_ALPHAS, DEFAULT_GAMMAS, sum_bound_checks, verify_grid

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
RATE_SLACK = 0.3


class ConfigError(InvalidArgumentError):
    """Configuration problem, located by field name and (when known) line."""

    def __init__(self, message: str, field_name: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_name is not None:
            where.append(f"field '{field_name}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field_name = field_name
        self.line = line


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class VerifySettings:
    alphas: tuple = DEFAULT_ALPHAS
    gammas: tuple = DEFAULT_GAMMAS
    index_range: int = 8
    reference: str = "nystrom"
    r: float = 1.0

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas), "gammas": list(self.gammas), "index_range": self.index_range,
                "reference": self.reference, "r": self.r}


@dataclass(frozen=True)
class RunConfig:
    param_seq: ParamSeq
    d_list: tuple = (1,)
    eps_grid: tuple = (0.1,)
    n_grid: tuple = (1,)
    quadrature_order: int = DEFAULT_ORDER
    truncation: int = 64
    criterion: CriterionSpec = field(default_factory=CriterionSpec)
    output_path: str = "out"
    seed: int = 0
    verify: VerifySettings = field(default_factory=VerifySettings)

    def to_dict(self) -> dict:
        return {
            "param_seq": self.param_seq.to_dict(),
            "d_list": list(self.d_list),
            "eps_grid": list(self.eps_grid),
            "n_grid": list(self.n_grid),
            "quadrature_order": self.quadrature_order,
            "truncation": self.truncation,
            "criterion": self.criterion.to_dict(),
            "output_path": self.output_path,
            "seed": self.seed,
            "verify": self.verify.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_FIELDS = {"param_seq", "d_list", "eps_grid", "n_grid", "quadrature_order", "truncation",
           "criterion", "output_path", "seed", "verify"}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {value!r}")
    return float(value)


def _grid(value, conv, name):
    if not isinstance(value, list) or not value:
        raise ValueError("expected a non-empty list")
    out = tuple(conv(v, name) for v in value)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("grid must be strictly increasing")
    return out


def parse_config(text: str) -> RunConfig:
    """Parse a JSON run configuration; errors carry line and field names."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", line=1)
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", unknown[0], _line_of(text, unknown[0]))
    if "param_seq" not in data:
        raise ConfigError("missing required key", "param_seq")

    kwargs = {}

    def guard(name, fn):
        if name not in data:
            return
        try:
            kwargs[name] = fn(data[name])
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc), name, _line_of(text, name)) from None

    guard("param_seq", ParamSeq.from_dict)
    guard("d_list", lambda v: _grid(v, _int, "d_list"))
    guard("eps_grid", lambda v: _grid(v, _real, "eps_grid"))
    guard("n_grid", lambda v: _grid(v, _int, "n_grid"))
    guard("quadrature_order", lambda v: _int(v, "quadrature_order"))
    guard("truncation", lambda v: _int(v, "truncation"))
    guard("criterion", _parse_criterion)
    guard("output_path", _parse_str)
    guard("seed", lambda v: _int(v, "seed"))
    guard("verify", _parse_verify)
    cfg = RunConfig(**kwargs)
    _validate(cfg, text)
    return cfg


def _parse_str(v):
    if not isinstance(v, str) or not v:
        raise ValueError("expected a non-empty string")
    return v


def _parse_criterion(v):
    if isinstance(v, str):
        crit, _, cls = v.partition("-")
        return CriterionSpec(crit, cls or "all")
    if not isinstance(v, dict):
        raise ValueError("expected an object or a string such as 'abs-all'")
    extra = set(v) - {"error_criterion", "info_class"}
    if extra:
        raise ValueError(f"unexpected keys {sorted(extra)}")
    return CriterionSpec(v.get("error_criterion", ABSOLUTE), v.get("info_class", "all"))


def _parse_verify(v):
    if not isinstance(v, dict):
        raise ValueError("expected an object")
    extra = set(v) - {"alphas", "gammas", "index_range", "reference", "r"}
    if extra:
        raise ValueError(f"unexpected keys {sorted(extra)}")
    kw = {}
    if "alphas" in v:
        kw["alphas"] = _grid(v["alphas"], _real, "alphas")
    if "gammas" in v:
        kw["gammas"] = _grid(v["gammas"], _real, "gammas")
    if "index_range" in v:
        kw["index_range"] = _int(v["index_range"], "index_range")
    if "reference" in v:
        if v["reference"] not in ("nystrom", "closed"):
            raise ValueError("reference must be 'nystrom' or 'closed'")
        kw["reference"] = v["reference"]
    if "r" in v:
        kw["r"] = _real(v["r"], "r")
    return VerifySettings(**kw)


def _validate(cfg: RunConfig, text: str = ""):
    def fail(name, msg):
        raise ConfigError(msg, name, _line_of(text, name) if text else None)

    if min(cfg.d_list) < 1:
        fail("d_list", "dimensions must be positive")
    if not all(0 < e < 1 for e in cfg.eps_grid):
        fail("eps_grid", "eps values must lie in (0, 1)")
    if min(cfg.n_grid) < 1:
        fail("n_grid", "n values must be positive")
    if not 1 <= cfg.quadrature_order <= MAX_ORDER:
        fail("quadrature_order", f"must lie in [1, {MAX_ORDER}]")
    if not 1 <= cfg.truncation <= cfg.quadrature_order:
        fail("truncation", "must lie in [1, quadrature_order]")
    v = cfg.verify
    if not all(0 <= a <= 1 for a in v.alphas):
        fail("verify", "alphas must lie in [0, 1]")
    if not all(g > 0 for g in v.gammas):
        fail("verify", "gammas must be positive")
    if v.index_range < 1 or 2 * v.index_range + 1 > cfg.quadrature_order:
        fail("verify", "index_range needs 1 <= 2*index_range+1 <= quadrature_order")
    if not v.r > 0:
        fail("verify", "r must be positive")


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    return parse_config(text)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    data = cfg.to_dict()
    if args.d is not None:
        data["d_list"] = args.d
    if args.eps is not None:
        data["eps_grid"] = args.eps
    if args.order is not None:
        data["quadrature_order"] = args.order
        data["truncation"] = min(data["truncation"], args.order)
    if args.out is not None:
        data["output_path"] = args.out
    return parse_config(json.dumps(data))


# -- output helpers -------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -----------------------------------------------------------------

@dataclass
class Outcome:
    code: int = EXIT_OK
    files: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def cmd_eigs(cfg: RunConfig) -> Outcome:
    rule = gauss_hermite(cfg.quadrature_order)
    out = Outcome()
    rows = []
    for ell, (a, g) in enumerate(cfg.param_seq.pairs(max(cfg.d_list)), start=1):
        spec = scaled_spectrum(GAUSSIAN, a, g, rule, cfg.truncation)
        closed = None
        if a == 1.0:
            closed = gaussian_closed_spectrum(g, cfg.truncation).eigenvalues
        elif a == 0.0:
            closed = np.zeros(cfg.truncation)
            closed[0] = 1.0
        for j in range(cfg.truncation):
            rows.append((ell, a, g, j + 1, float(spec.eigenvalues[j]),
                         None if closed is None else float(closed[j]), spec.trace))
    out.files.append(_write(Path(cfg.output_path), "eigs.csv",
                            csv_text(("ell", "alpha", "gamma", "j", "nystrom", "closed_form", "trace"), rows)))
    return out


def cmd_tensor_eigs(cfg: RunConfig, k: int = 50) -> Outcome:
    rule = gauss_hermite(cfg.quadrature_order)
    out = Outcome()
    rows = []
    for d in cfg.d_list:
        spectra = factor_spectra(cfg.param_seq, d, GAUSSIAN, rule, cfg.truncation)
        try:
            items = top_k(spectra, k)
        except TruncationError as exc:
            items = exc.values
            out.messages.append(f"d={d}: {exc}")
            out.code = EXIT_RESOURCE
        for rank, (v, idx) in enumerate(items, start=1):
            rows.append((d, rank, v, ";".join(map(str, idx))))
    out.files.append(_write(Path(cfg.output_path), "tensor_eigs.csv",
                            csv_text(("d", "rank", "value", "multi_index"), rows)))
    return out


def cmd_complexity(cfg: RunConfig) -> Outcome:
    rule = gauss_hermite(cfg.quadrature_order)
    out = Outcome()
    rows = []
    abs_all, norm_all = CriterionSpec(ABSOLUTE, "all"), CriterionSpec(NORMALIZED, "all")
    try:
        for d in cfg.d_list:
            spectra = factor_spectra(cfg.param_seq, d, GAUSSIAN, rule, cfg.truncation)
            for eps in cfg.eps_grid:
                rows.append((d, eps, info_complexity(abs_all, eps, spectra),
                             info_complexity(norm_all, eps, spectra), std_sample_bound(eps)))
    except ResourceLimitError as exc:
        out.code = EXIT_RESOURCE
        out.messages.append(f"{exc} (partial rows written: {len(rows)})")
    out.files.append(_write(Path(cfg.output_path), "complexity.csv",
                            csv_text(("d", "eps", "n_abs", "n_norm", "std_n_bound"), rows)))
    return out


def _try_report(cfg, d, rule, spectra, notes):
    grids = {"n_grid": list(cfg.n_grid), "eps_grid": list(cfg.eps_grid)}
    for drop in ((), ("n_grid",), ("eps_grid",), ("n_grid", "eps_grid")):
        kw = {k: (None if k in drop else v) for k, v in grids.items()}
        try:
            rep = build_report(cfg.param_seq, d, cfg.criterion, base=GAUSSIAN, rule=rule,
                               count=cfg.truncation, spectra=spectra, **kw)
        except InsufficientDataError as exc:
            notes.append(f"d={d}: {exc}")
            continue
        for k in drop:
            rep.notes.append(f"{k} not fitted: grid too small")
        return rep
    raise AssertionError("a report without fits cannot lack data")


def _fitted_q(cfg, all_spectra) -> Optional[float]:
    """Slope of log n(eps, d) against log d at the median eps."""
    if len(cfg.d_list) < 2:
        return None
    eps = cfg.eps_grid[len(cfg.eps_grid) // 2]
    ds, ns = [], []
    for d, spectra in zip(cfg.d_list, all_spectra):
        n = info_complexity(cfg.criterion if cfg.criterion.info_class == "all" else CriterionSpec(
            cfg.criterion.error_criterion, "all"), eps, spectra)
        if n > 0:
            ds.append(math.log(d))
            ns.append(math.log(n))
    if len(ds) < 2 or len(set(ds)) < 2:
        return None
    return float(np.polyfit(ds, ns, 1)[0])


def cmd_exponents(cfg: RunConfig) -> Outcome:
    rule = gauss_hermite(cfg.quadrature_order)
    out = Outcome()
    notes: list = []
    reports, all_spectra = [], []
    try:
        for d in cfg.d_list:
            spectra = factor_spectra(cfg.param_seq, d, GAUSSIAN, rule, cfg.truncation)
            all_spectra.append(spectra)
            reports.append(_try_report(cfg, d, rule, spectra, notes))
        fitted_q = _fitted_q(cfg, all_spectra)
    except ResourceLimitError as exc:
        out.code = EXIT_RESOURCE
        out.messages.append(str(exc))
        fitted_q = None
    body = {"config": cfg.to_dict(), "fitted_q": fitted_q, "notes": notes,
            "reports": [r.to_dict() for r in reports]}
    out.files.append(_write(Path(cfg.output_path), "exponents.json", _json(body)))
    failed = [f"d={r.d}: {c['name']}" for r in reports for c in r.checks if not c["passed"]]
    if failed and out.code == EXIT_OK:
        out.code = EXIT_CHECK
        out.messages.extend(f"check failed: {f}" for f in failed)
    return out


def cmd_rates(cfg: RunConfig) -> Outcome:
    """e(n) and n(eps) sweeps with reference curves of the theoretical slope
    loosened by 0.3, anchored at the first point of each sweep."""
    rule = gauss_hermite(cfg.quadrature_order)
    out = Outcome()
    r = decay_rate(cfg.param_seq)
    crit = CriterionSpec(cfg.criterion.error_criterion, "all")
    p, _ = exponent(crit, r)
    n_rows, e_rows, summary = [], [], []
    for d in cfg.d_list:
        spectra = factor_spectra(cfg.param_seq, d, GAUSSIAN, rule, cfg.truncation)
        # error decay: e(n) <~ n^{-1/p}
        slope_ref = -1.0 / p if p else -math.inf
        errs = [worst_case_error_all(spectra, n) for n in cfg.n_grid]
        n0, e0 = cfg.n_grid[0], errs[0]
        for n, e in zip(cfg.n_grid, errs):
            bound = e0 * (n / n0) ** (slope_ref + RATE_SLACK) if math.isfinite(slope_ref) else None
            n_rows.append((d, n, e, bound, None if bound is None else e <= bound * (1 + 1e-12)))
        # complexity growth: n(eps) <~ eps^{-p}
        comps = [info_complexity(crit, eps, spectra) for eps in cfg.eps_grid]
        eps0, c0 = cfg.eps_grid[-1], comps[-1]
        for eps, c in zip(cfg.eps_grid, comps):
            bound = None
            if p is not None and c0 > 0:
                bound = c0 * (eps0 / eps) ** (p + RATE_SLACK)
            e_rows.append((d, eps, c, bound, None if bound is None else c <= bound * (1 + 1e-12)))
        entry = {"d": d, "r_tilde": r, "p_all": p, "reference_rate": slope_ref}
        try:
            fit = fit_rates(cfg.param_seq, d, cfg.n_grid, None, GAUSSIAN, rule, cfg.truncation, crit, spectra)
            entry.update(fitted_rate=fit.fitted_rate, rate_rms=fit.rate_rms, non_polynomial=fit.non_polynomial)
        except InsufficientDataError as exc:
            entry["rate_fit_error"] = str(exc)
        try:
            fit = fit_rates(cfg.param_seq, d, None, cfg.eps_grid, GAUSSIAN, rule, cfg.truncation, crit, spectra)
            entry["fitted_p"] = fit.fitted_p
            if p is not None:
                entry["fitted_p_ok"] = fit.fitted_p <= p + RATE_SLACK
        except InsufficientDataError as exc:
            entry["p_fit_error"] = str(exc)
        summary.append(entry)
    header = ("d", "n_or_eps", "value", "bound", "pass")
    base = Path(cfg.output_path)
    out.files.append(_write(base, "rates_n.csv", csv_text(header, n_rows)))
    out.files.append(_write(base, "rates_eps.csv", csv_text(header, e_rows)))
    out.files.append(_write(base, "rates_fit.json", _json(_jsonable(summary))))
    bad = [f"d={s['d']}: fitted_p {s['fitted_p']:.4g} exceeds p_all + {RATE_SLACK}"
           for s in summary if s.get("fitted_p_ok") is False]
    if bad:
        out.code = EXIT_CHECK
        out.messages.extend(bad)
    return out


def cmd_verify(cfg: RunConfig, spectrum_hook: Callable | None = None) -> Outcome:
    rule = gauss_hermite(cfg.quadrature_order)
    v = cfg.verify
    out = Outcome()
    ledger = verify_grid(GAUSSIAN, v.alphas, v.gammas, rule, v.index_range,
                         reference=v.reference, spectrum_hook=spectrum_hook)
    grid = sorted(set(default_gamma_grid().tolist()) | set(v.gammas))
    for g in v.gammas:
        for a in v.alphas:
            ledger.extend(sum_bound_checks(GAUSSIAN, a, g, v.r, grid, rule))
    base = Path(cfg.output_path)
    out.files.append(_write(base, "ledger.json", ledger.to_json() + "\n"))
    out.files.append(_write(base, "ledger.txt", ledger.table() + "\n"))
    for c in ledger.failures:
        out.messages.append(f"FAIL {c.name} {c.context}: lhs={c.lhs:.17g} rhs={c.rhs:.17g}")
    if ledger.marginals:
        out.messages.append(f"warning: {len(ledger.marginals)} marginal check(s)")
    if ledger.failures:
        out.code = EXIT_CHECK
    return out


# -- entry point --------------------------------------------------------------

def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerntract", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=("eigs", "tensor-eigs", "complexity", "exponents", "rates", "verify"))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides output_path)")
    parser.add_argument("--order", type=int, help="quadrature order (overrides quadrature_order)")
    parser.add_argument("--d", type=_int_list, help="comma-separated dimensions (overrides d_list)")
    parser.add_argument("--eps", type=_float_list, help="comma-separated eps values (overrides eps_grid)")
    parser.add_argument("--k", type=int, default=50, help="products listed by tensor-eigs")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv: Sequence[str] | None = None, spectrum_hook: Callable | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    def say(msg, stream=sys.stdout):
        if not args.quiet or stream is sys.stderr:
            print(msg, file=stream)

    try:
        cfg = apply_overrides(load_config(args.config), args)
        if args.k < 1:
            raise ConfigError("--k must be positive")
    except InvalidArgumentError as exc:
        say(f"config error: {exc}", sys.stderr)
        return EXIT_USAGE

    try:
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            if args.command == "eigs":
                res = cmd_eigs(cfg)
            elif args.command == "tensor-eigs":
                res = cmd_tensor_eigs(cfg, args.k)
            elif args.command == "complexity":
                res = cmd_complexity(cfg)
            elif args.command == "exponents":
                res = cmd_exponents(cfg)
            elif args.command == "rates":
                res = cmd_rates(cfg)
            else:
                res = cmd_verify(cfg, spectrum_hook)
    except ResourceLimitError as exc:
        say(f"resource limit: {exc}", sys.stderr)
        return EXIT_RESOURCE
    except InvalidArgumentError as exc:
        say(f"error: {exc}", sys.stderr)
        return EXIT_USAGE
    except KerntractError as exc:
        say(f"error: {exc}", sys.stderr)
        return EXIT_CHECK

    for msg in res.messages:
        say(msg, sys.stderr if res.code else sys.stdout)
    for path in res.files:
        say(f"wrote {path}")
    return res.code


if __name__ == "__main__":
    sys.exit(main())
