"""Command-line driver: verification suites, matrix dumps, norm tables and spectra."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields

import numpy as np

from . import analysis, identities, operators
from .fourier import LaurentSeries, format_series, parse_series, star
from .inner import InnerFunction, Monomial, is_symmetric, parse_inner
from .modelspace import KPerpBasis

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_THETAS = (
    "z^2",  # theta_0 = 0, symmetric
    "z^3",
    "blaschke:zeros=0.5",  # theta_0 != 0, symmetric
    "blaschke:zeros=0.5i",  # theta_0 != 0, not symmetric
    "blaschke:zeros=0,0.5i",  # theta_0 = 0, not symmetric
)
DEFAULT_SYMBOLS = (
    "[(1,1,0)]",  # z
    "[(2,1,0),(-1,2,0)]",  # z^2 + 2 zbar
    "[(-2,1,0)]",  # zbar^2
)
DEFAULT_NORM_NS = (8, 16, 32, 64, 128, 256)

# every tag the verify command knows, in run order
SUITE_TAGS = (
    *operators.DEFECT_TAGS,
    "unitary-defects",
    "shift-oracle",
    "shift-inverses",
    "equation-solutions",
    "ztheta-intertwining",
    "characterizations",
    "norm-equality",
    "product-lower-bound",
    "rank-one-product",
    "brown-halmos-product",
    "commutation",
    "hyponormality",
    "symbol-recovery",
    "otoeplitz",
    "otoeplitz-curlyJ",
)
# tags that depend on theta only, not on the symbol
THETA_ONLY = {"unitary-defects", "shift-oracle", "shift-inverses", "equation-solutions", "ztheta-intertwining"}
# tags that depend on the symbol only
SYMBOL_ONLY = {"otoeplitz", "otoeplitz-curlyJ"}


class ConfigError(ValueError):
    """Invalid configuration; reported with the offending field."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"config field '{fieldname}': {message}")
        self.field = fieldname


@dataclass
class RunConfig:
    theta: list[str] = field(default_factory=list)
    symbol: list[str] = field(default_factory=list)
    nneg: int = 32
    man: int = 32
    expansion_order: int | None = None
    tol: float | None = None
    suite: list[str] = field(default_factory=list)
    out: str | None = None
    self_test: bool = False
    operator: str = "dtho"
    ns: list[int] = field(default_factory=lambda: list(DEFAULT_NORM_NS))
    input: str | None = None

    # parsed values, filled by validate()
    thetas: list[InnerFunction] = field(default_factory=list, repr=False)
    symbols: list[LaurentSeries] = field(default_factory=list, repr=False)
    explicit_suite: bool = field(default=False, repr=False)

    def validate(self) -> "RunConfig":
        thetas = self.theta or list(DEFAULT_THETAS)
        symbols = self.symbol or list(DEFAULT_SYMBOLS)
        try:
            self.thetas = [parse_inner(t) for t in thetas]
        except ValueError as exc:
            raise ConfigError("theta", str(exc)) from None
        try:
            self.symbols = [parse_series(s) for s in symbols]
        except ValueError as exc:
            raise ConfigError("symbol", str(exc)) from None
        for name in ("nneg", "man"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if self.expansion_order is not None:
            v = self.expansion_order
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError("expansion_order", f"must be a positive integer, got {v!r}")
        if self.tol is not None:
            if isinstance(self.tol, bool) or not isinstance(self.tol, (int, float)) or not self.tol > 0:
                raise ConfigError("tol", f"must be a positive number, got {self.tol!r}")
            self.tol = float(self.tol)
        unknown = [t for t in self.suite if t not in SUITE_TAGS]
        if unknown:
            raise ConfigError("suite", f"unknown tag(s) {unknown}; known tags: {', '.join(SUITE_TAGS)}")
        self.explicit_suite = bool(self.suite)
        if not self.suite:
            self.suite = list(SUITE_TAGS)
        if not self.ns or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in self.ns):
            raise ConfigError("ns", f"must be a list of positive integers, got {self.ns!r}")
        if self.operator not in OPERATORS:
            raise ConfigError("operator", f"unknown operator {self.operator!r}; expected one of {sorted(OPERATORS)}")
        return self

    def basis(self, theta: InnerFunction, nneg: int | None = None, man: int | None = None) -> KPerpBasis:
        return KPerpBasis(theta, nneg or self.nneg, man or self.man, self.expansion_order)


# -- config loading ----------------------------------------------------------------

_CONFIG_KEYS = {f.name for f in fields(RunConfig) if f.repr}
_LIST_KEYS = {"theta", "symbol", "suite", "ns"}


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    out = {}
    for key, val in data.items():
        k = key.replace("-", "_")
        if k not in _CONFIG_KEYS:
            raise ConfigError(key, f"unknown key in {path}")
        if k in _LIST_KEYS and isinstance(val, str):
            val = [val]
        out[k] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None and v != [] and v is not False:
            values[key] = v
    return RunConfig(**values).validate()


# -- checks --------------------------------------------------------------------


def _applicable(tag: str, theta: InnerFunction, phi: LaurentSeries | None, basis: KPerpBasis) -> str | None:
    """Reason the tag cannot run on this (theta, phi), or None."""
    t0 = basis.theta0
    if tag == "shift-inverses" and t0 == 0:
        return "needs theta_0 != 0"
    if tag == "ztheta-intertwining":
        f = identities.make_Ztheta_symbol(theta, 1.0, LaurentSeries(), basis=basis)
        if identities.ztheta_residual(star(f), basis) > 1e-12:
            return "z / (1 - conj(theta_0) theta) has its star outside Z_theta"
    if tag in ("rank-one-product", "brown-halmos-product", "commutation"):
        if t0 != 0:
            return "needs theta_0 = 0"
        if not is_symmetric(theta):
            return "needs a symmetric theta"
        for f in (phi, star(phi)):
            if identities.ztheta_residual(f, basis) > 1e-12:
                return "needs phi and phi* in Z_theta"
    if tag == "hyponormality" and not is_symmetric(theta):
        return "needs a symmetric theta"
    if tag == "symbol-recovery" and not isinstance(theta, Monomial):
        return "needs theta = z^n"
    return None


def _solution_params(kind: str, zero: bool) -> dict:
    one, zpoly = LaurentSeries.monomial(0), LaurentSeries({0: 1, 1: 1})
    if zero and kind in ("U*A=AU", "UA=AU*"):
        return {"eta": zpoly, "psi": one, "Phi": one}
    if zero:
        return {"psi": zpoly}
    return {"eta": zpoly, "psi": one}


def _zero_params(kind: str, zero: bool) -> dict:
    z0 = LaurentSeries()
    if zero and kind in ("U*A=AU", "UA=AU*"):
        return {"eta": z0, "psi": z0, "Phi": z0}
    if zero:
        return {"psi": z0}
    return {"eta": z0, "psi": z0}


def _equation_solutions(basis: KPerpBasis, tol: float | None) -> list[identities.ResidualReport]:
    out = []
    zero = basis.theta0 == 0
    for kind in operators.EQUATION_KINDS:
        A = operators.build_equation_solution(kind, basis, **_solution_params(kind, zero))
        r = identities.check_intertwining(A, kind, basis, tol)
        Z = operators.build_equation_solution(kind, basis, **_zero_params(kind, zero))
        zn = float(np.abs(Z.entries).max(initial=0.0))
        r.details["zero_parameters_max_entry"] = zn
        r.details["solution_norm"] = analysis.operator_norm(A, A.interior())
        r.passed = r.passed and zn == 0.0
        r.tag = f"equation-solutions[{kind}]"
        out.append(r)
    return out


def _characterizations(phi: LaurentSeries, basis: KPerpBasis, tol) -> list[identities.ResidualReport]:
    out = []
    for kind in identities.CHARACTERIZATIONS:
        out.append(identities.check_characterization(kind, phi, basis, tol=tol))
        G = operators.build_equation_solution(kind, basis, **_solution_params(kind, basis.theta0 == 0))
        r = identities.check_characterization(kind, phi, basis, G, tol=tol)
        r.tag = f"char[{kind}][perturbed]"
        out.append(r)
    return out


def _norm_equality(phi: LaurentSeries, theta: InnerFunction, cfg: RunConfig) -> identities.ResidualReport:
    ns = sorted(set(n for n in cfg.ns if n <= max(cfg.nneg, min(cfg.ns))))
    table = analysis.norm_convergence_study(phi, theta, ns)
    tol = cfg.tol or 1e-10
    last_gap = table.gaps[-1]
    ok = table.is_monotone() and last_gap >= -tol - table.target_bound
    return identities.ResidualReport(
        "norm-equality", abs(last_gap), ns[-1], tol, bool(ok),
        details={"ns": ns, "norms": table.norms, "target": table.rows[-1][2], "monotone": table.is_monotone()},
    )


def run_check(tag: str, theta: InnerFunction | None, phi: LaurentSeries | None, cfg: RunConfig,
              basis: KPerpBasis | None) -> list[identities.ResidualReport]:
    tol = cfg.tol
    if tag in operators.DEFECT_TAGS:
        rhs_tag = None
        if cfg.self_test:
            tags = operators.DEFECT_TAGS
            rhs_tag = tags[(tags.index(tag) + 1) % len(tags)]
        return [identities.check_defect(tag, phi, basis, tol, rhs_tag=rhs_tag)]
    if tag == "unitary-defects":
        return [identities.check_unitary_defects(basis, tol)]
    if tag == "shift-oracle":
        return [identities.check_shift_oracle(basis, tol)]
    if tag == "shift-inverses":
        return [identities.check_shift_inverses(basis, LaurentSeries({0: 1, 1: 1}), LaurentSeries({0: 1, 2: -0.5}), tol=tol)]
    if tag == "equation-solutions":
        return _equation_solutions(basis, tol)
    if tag == "ztheta-intertwining":
        f = identities.make_Ztheta_symbol(theta, 1.0, LaurentSeries(), basis=basis)
        r = identities.check_intertwining(operators.build_dtho(f, basis), "U*A=AU", basis, tol)
        r.tag = "ztheta-intertwining"
        r.details["symbol_hash"] = operators.symbol_hash(f)
        return [r]
    if tag == "characterizations":
        return _characterizations(phi, basis, tol)
    if tag == "norm-equality":
        return [_norm_equality(phi, theta, cfg)]
    if tag == "product-lower-bound":
        return [analysis.product_lower_bound_check([(phi, phi)], basis)]
    if tag == "rank-one-product":
        return [analysis.check_rank_one_product(phi, phi, basis, tol)]
    if tag == "brown-halmos-product":
        return [analysis.brown_halmos_product_test(phi, phi, basis, tol)]
    if tag == "commutation":
        return [analysis.commutation_test(phi, phi * 2, basis, tol)]
    if tag == "hyponormality":
        return [analysis.hyponormality_analysis(phi, basis, tol)]
    if tag == "symbol-recovery":
        rec = analysis.recover_symbol(operators.build_dtho(phi, basis), theta, tol or identities.EXACT_TOL)
        lo, hi = rec.covered
        gap = (rec.symbol - phi.restrict(lo, hi)).norm()
        t = tol or identities.EXACT_TOL
        return [identities.ResidualReport(
            "symbol-recovery", gap, len(basis), t, rec.consistent and gap <= t,
            details={"inconsistency": rec.inconsistency, "ls_residual": rec.residual, "covered": [lo, hi]},
        )]
    if tag in ("otoeplitz", "otoeplitz-curlyJ"):
        variant = "J" if tag == "otoeplitz" else "curlyJ"
        return identities.check_otoeplitz_laws(phi, LaurentSeries.monomial(-1), k=cfg.nneg,
                                                tol=tol or identities.EXACT_TOL, variant=variant)
    raise ConfigError("suite", f"unknown tag {tag!r}")


def run_verify(cfg: RunConfig) -> list[identities.ResidualReport]:
    """Run the selected suite over every (theta, symbol) pair, in a fixed order."""
    reports = []
    if cfg.explicit_suite:
        # an explicitly requested tag must run somewhere on the grid
        for tag in cfg.suite:
            if tag in THETA_ONLY | SYMBOL_ONLY:
                if tag == "shift-inverses" and all(cfg.basis(t, 1, 1).theta0 == 0 for t in cfg.thetas):
                    raise ConfigError("suite", "shift-inverses needs some theta with theta_0 != 0")
                continue
            if all(_applicable(tag, t, f, cfg.basis(t)) for t in cfg.thetas for f in cfg.symbols):
                reason = _applicable(tag, cfg.thetas[0], cfg.symbols[0], cfg.basis(cfg.thetas[0]))
                raise ConfigError("suite", f"{tag} cannot run on any (theta, symbol) pair: {reason}")

    def tagged(rs, theta, phi):
        for r in rs:
            if theta is not None:
                r.details["theta"] = str(theta)
            if phi is not None:
                r.details["symbol"] = format_series(phi)
                r.details["symbol_hash"] = r.details.get("symbol_hash", operators.symbol_hash(phi))
            r.details["nneg"], r.details["man"] = cfg.nneg, cfg.man
        return rs

    for phi in cfg.symbols:
        for tag in cfg.suite:
            if tag in SYMBOL_ONLY:
                reports += tagged(run_check(tag, None, phi, cfg, None), None, phi)
    for theta in cfg.thetas:
        basis = cfg.basis(theta)
        for tag in cfg.suite:
            if tag in THETA_ONLY and not _applicable(tag, theta, None, basis):
                reports += tagged(run_check(tag, theta, None, cfg, basis), theta, None)
        for phi in cfg.symbols:
            for tag in cfg.suite:
                if tag in THETA_ONLY | SYMBOL_ONLY or _applicable(tag, theta, phi, basis):
                    continue
                reports += tagged(run_check(tag, theta, phi, cfg, basis), theta, phi)
    return reports


# -- dumps ----------------------------------------------------------------------


def _op_dtho(cfg, basis):
    return operators.build_dtho(cfg.symbols[0], basis)


def _op_dtto(cfg, basis):
    return operators.build_dtto(cfg.symbols[0], basis)


OPERATORS = {
    "dtho": _op_dtho,
    "dtto": _op_dtto,
    "U": lambda cfg, basis: operators.build_compressed_shift(basis)[0],
    "Us": lambda cfg, basis: operators.build_compressed_shift(basis)[1],
    "identity": lambda cfg, basis: operators.identity(basis),
}


def build_operator(cfg: RunConfig) -> operators.OperatorMatrix:
    return OPERATORS[cfg.operator](cfg, cfg.basis(cfg.thetas[0]))


def spectrum_csv(values) -> str:
    lines = ["index,re,im,modulus"]
    for i, v in enumerate(values):
        re, im = _tidy(v.real), _tidy(v.imag)
        lines.append(f"{i},{re:.17g},{im:.17g},{abs(complex(re, im)):.17g}")
    return "\n".join(lines) + "\n"


def _tidy(x: float) -> float:
    return 0.0 if x == 0 else float(x)  # drop negative zero so output is stable


def write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".dtholab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def reports_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"


# -- commands ----------------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    reports = run_verify(cfg)
    write_atomic(cfg.out or "-", reports_json(reports))
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(r, file=sys.stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_matrix(cfg: RunConfig) -> int:
    write_atomic(cfg.out, build_operator(cfg).to_csv())
    return EXIT_OK


def cmd_norm(cfg: RunConfig) -> int:
    table = analysis.norm_convergence_study(cfg.symbols[0], cfg.thetas[0], cfg.ns)
    write_atomic(cfg.out, table.to_csv())
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    write_atomic(cfg.out, spectrum_csv(analysis.spectrum(build_operator(cfg))))
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    """Summarize a JSON report written by ``verify``."""
    if not cfg.input:
        raise ConfigError("input", "report needs --input pointing at a verify report")
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("input", f"cannot load {cfg.input}: {exc}") from None
    if not isinstance(data, list) or not all(isinstance(r, dict) and "tag" in r and "pass" in r for r in data):
        raise ConfigError("input", f"{cfg.input} is not a verify report")
    lines = ["tag,theta,symbol,pass,residual,tol"]
    for r in data:
        d = r.get("details", {})
        lines.append(",".join([
            r["tag"], json.dumps(d.get("theta", "")), json.dumps(d.get("symbol", "")),
            "PASS" if r["pass"] else "FAIL", f"{r.get('residual', 0):.3e}", f"{r.get('tol', 0):g}",
        ]))
    n_fail = sum(not r["pass"] for r in data)
    lines.append(f"# {len(data) - n_fail}/{len(data)} passed")
    write_atomic(cfg.out, "\n".join(lines) + "\n")
    return EXIT_FAIL if n_fail else EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "matrix": cmd_matrix,
    "norm": cmd_norm,
    "spectrum": cmd_spectrum,
    "report": cmd_report,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtholab", description="Finite-section laboratory for dual truncated Hankel operators.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--theta", action="append", help="inner function: 'z^n' or 'blaschke:c=..;zeros=a,b'")
    common.add_argument("--symbol", action="append", help="symbol as [(k, re, im), ...]")
    common.add_argument("--nneg", type=int, help="number of zbar^k basis vectors")
    common.add_argument("--man", type=int, help="number of theta z^m basis vectors")
    common.add_argument("--expansion-order", dest="expansion_order", type=int, help="Taylor order of theta")
    common.add_argument("--tol", type=float, help="residual tolerance override")
    common.add_argument("--out", help="output file (default stdout)")
    helps = {
        "verify": "run identity checks and write a JSON report",
        "matrix": "dump an operator's finite section as CSV",
        "norm": "dump a norm convergence table as CSV",
        "spectrum": "dump eigenvalues of a finite section as CSV",
        "report": "summarize a verify report",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            sp.add_argument("--suite", action="append", help=f"check tag (repeatable): {', '.join(SUITE_TAGS)}")
            sp.add_argument("--self-test", dest="self_test", action="store_true",
                            help="pair each defect with the wrong right side; must exit 1")
        if name in ("matrix", "spectrum"):
            sp.add_argument("--operator", help=f"one of {sorted(OPERATORS)} (default dtho)")
        if name == "norm":
            sp.add_argument("--ns", type=int, nargs="+", help="truncation sizes")
        if name == "report":
            sp.add_argument("--input", help="JSON report written by verify")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on bad usage
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"dtholab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
