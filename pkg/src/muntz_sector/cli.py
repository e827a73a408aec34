"""Command-line front end: ``muntz-sector <command> [options]``.

Every run prints a structured-text summary that starts with the fully
resolved configuration.  When an output directory is given (``--out`` or the
``MUNTZ_SECTOR_OUTPUT_DIR`` environment variable) the summary and the CSV
tables are also written there.  CSV headers tag each column ``[computed]``
or ``[estimate]`` and numbers use 17 significant digits.

Exit codes: 0 when every check passes, 1 on a failed check or a numerical
error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import MuntzError
from .fuchs import (
    SieveRegion,
    TruncatedProduct,
    certify_fuchs_bounds,
    g0_kernel,
    g_kernel,
    grid_points,
    psi_kernel,
    suggest_A,
)
from .functionals import (
    biorthogonal_target,
    default_g_kernel,
    incompleteness_witness,
    monomial,
    operator_table,
    recover_coefficients,
    representation_crosscheck,
)
from .sequences import ExponentSequence, arithmetic_progression, log_asymptote, muntz_density_test, parse_sequence
from .surgery import adjust_double_points, lambda_star_pipeline, minimal_epsilon, shift_residuals
from .transforms import QuadratureSpec

OUTPUT_ENV = "MUNTZ_SECTOR_OUTPUT_DIR"
COMMANDS = ("density", "fuchs-eval", "fuchs-verify", "surgery", "biortho", "recover", "witness", "crosscheck")
_QUAD_FIELDS = {f.name: f.type for f in dataclasses.fields(QuadratureSpec)}


class UsageError(Exception):
    """Bad flag or configuration value; maps to exit code 2."""


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"--z: cannot parse {text!r} as a complex number") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def parse_terms(text: str) -> list[tuple[float, int]]:
    """``coef@k,...``: coefficient and 1-based exponent index."""
    out = []
    for item in text.split(","):
        coef, sep, k = item.partition("@")
        if not sep:
            raise UsageError(f"--f: expected coef@k, got {item!r}")
        try:
            out.append((float(coef), int(k)))
        except ValueError:
            raise UsageError(f"--f: cannot parse {item!r}") from None
    return out


def parse_quad(items: list[str] | dict | None) -> QuadratureSpec:
    if not items:
        return QuadratureSpec()
    pairs = items.items() if isinstance(items, dict) else (s.partition("=")[::2] for s in items)
    kw = {}
    for key, value in pairs:
        key = key.strip().replace("-", "_")
        if key not in _QUAD_FIELDS:
            raise UsageError(f"--quad: unknown quadrature field {key!r}")
        try:
            kw[key] = int(value) if key in ("nodes_per_unit", "arc_panels") else float(value)
        except (TypeError, ValueError):
            raise UsageError(f"--quad: bad value for {key}: {value!r}") from None
    try:
        return QuadratureSpec(**kw)
    except ValueError as exc:
        raise UsageError(f"--quad: {exc}") from None


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


# --------------------------------------------------------------------------
# argument parser
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="muntz-sector", description="Muntz systems on a sector: products, functionals, surgery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, alpha=True):
        p.add_argument("--seq", help="sequence in kind:params form, e.g. power:2 or arithmetic:0.3:1")
        p.add_argument("--horizon", type=float, default=0.0, help="materialization horizon for the sequence")
        if alpha:
            p.add_argument("--alpha", type=float, default=math.pi / 4, help="sector half-angle in [0, pi)")
        p.add_argument("--quad", action="append", metavar="KEY=VALUE", help="quadrature override (repeatable)")
        p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV})")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sample grids")
        p.add_argument("--config", help="JSON file with option values; command-line flags take precedence")
        p.add_argument("--b", type=float, help="log-asymptote slope (default from the sequence rule)")
        p.add_argument("--A2", type=float, help="log-asymptote constant (default from the sequence rule)")

    p = sub.add_parser("density", help="decide Muntz density and tabulate lambda(t), Lambda(t)")
    common(p, alpha=False)
    p.add_argument("--points", type=int, default=50, help="number of table rows")

    p = sub.add_parser("fuchs-eval", help="evaluate G, g0, g and psi_k at points")
    common(p)
    p.add_argument("--z", required=False, help="comma-separated complex points, e.g. 2+1j,0.5")
    p.add_argument("--k", type=int, help="index for psi_k")
    p.add_argument("--A", type=float, help="shift constant of g (default: empirical)")

    p = sub.add_parser("fuchs-verify", help="empirical Fuchs constants on a sieve grid")
    common(p, alpha=False)
    p.add_argument("--re-range", default="0.5:40", help="real-part range lo:hi")
    p.add_argument("--im-range", default="-40:40", help="imaginary-part range lo:hi")
    p.add_argument("--counts", default="20:10", help="grid counts nre:nim before sieving")

    p = sub.add_parser("surgery", help="build Lambda* and Lambda** against the progression {n/b}")
    common(p, alpha=False)
    p.add_argument("--samples", type=int, default=100, help="number of fresh verification points")

    p = sub.add_parser("biortho", help="matrix of T_{k,delta}(zeta^lambda_m)")
    common(p)
    p.add_argument("--size", type=int, default=8, help="matrix dimension")
    p.add_argument("--delta", type=float, help="damping (default: 1/lambda_size)")
    p.add_argument("--rtol", type=float, default=1e-6, help="relative tolerance per entry")

    p = sub.add_parser("recover", help="recover Muntz coefficients of a synthetic polynomial")
    common(p)
    p.add_argument("--f", default="3@1,-2@2,0.5@5", help="terms coef@k of f = sum coef zeta^lambda_k")
    p.add_argument("--terms", type=int, default=5, help="number K of coefficients to recover")
    p.add_argument("--delta", type=float, help="damping (default: 1/lambda_K)")

    p = sub.add_parser("witness", help="lower bound for the distance from zeta^mu to the span")
    common(p)
    p.add_argument("--mu", type=float, default=2.5, help="exponent of the target monomial")
    p.add_argument("--terms", type=int, default=6, help="fit size K for the least-squares comparison")

    p = sub.add_parser("crosscheck", help="compare T(zeta^z) with the kernel value")
    common(p)
    p.add_argument("--z", default="1,4,2.5,0.5,1+1j,0.3+2j,0.7+0.2j,3+3j,1.5-1j,2+0.5j",
                   help="comma-separated points with Re z > 0")
    p.add_argument("--factor", type=float, default=10.0, help="allowed multiple of the quadrature estimate")
    return parser


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        return action.choices[command]


def resolve(argv: list[str]) -> argparse.Namespace:
    """Parse ``argv``; values from ``--config`` fill in flags that were not given."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        try:
            doc = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"--config: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("--config: expected a JSON object")
        sp = _subparser(parser, ns.command)
        known = {a.dest for a in sp._actions} - {"help", "config"}
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        unknown = sorted(set(doc) - known - {"command"})
        if unknown:
            raise UsageError(f"--config: unknown field(s) {unknown}")
        if doc.get("command", ns.command) != ns.command:
            raise UsageError(f"--config: command {doc['command']!r} does not match {ns.command!r}")
        doc.pop("command", None)
        sp.set_defaults(**doc)
        ns = parser.parse_args(argv)
    if ns.seq is None:
        raise UsageError("--seq is required")
    if hasattr(ns, "alpha") and not 0 <= ns.alpha < math.pi:
        raise UsageError("--alpha must lie in [0, pi)")
    return ns


def resolved_config(ns: argparse.Namespace) -> dict:
    doc = {k: v for k, v in sorted(vars(ns).items()) if k not in ("config", "out")}
    doc["quad"] = dataclasses.asdict(parse_quad(ns.quad))
    return doc


# --------------------------------------------------------------------------
# report container
# --------------------------------------------------------------------------


@dataclasses.dataclass
class Report:
    command: str
    config: dict
    lines: list = dataclasses.field(default_factory=list)
    tables: dict = dataclasses.field(default_factory=dict)
    passed: bool = True

    def add(self, key: str, value):
        self.lines.append(f"{key}: {value if isinstance(value, str) else fmt(value)}")

    def check(self, name: str, ok: bool):
        self.add(f"check.{name}", "pass" if ok else "fail")
        self.passed = self.passed and bool(ok)

    def table(self, name: str, header: list[str], rows):
        self.tables[name] = (header, rows)

    def summary(self) -> str:
        cfg = json.dumps(self.config, sort_keys=True, default=str, indent=2)
        body = [f"command: {self.command}", "config:", cfg, *self.lines,
                f"verdict: {'pass' if self.passed else 'fail'}"]
        return "\n".join(body) + "\n"

    def write(self, directory: Path):
        directory.mkdir(parents=True, exist_ok=True)
        stem = self.command.replace("-", "_")
        (directory / f"{stem}_summary.txt").write_text(self.summary())
        for name, (header, rows) in self.tables.items():
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
            (directory / f"{stem}_{name}.csv").write_text(buf.getvalue())


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _sequence(ns) -> ExponentSequence:
    try:
        return parse_sequence(ns.seq, ns.horizon)
    except MuntzError as exc:
        raise UsageError(f"--seq: {exc}") from None


def _asymptote(ns, seq):
    if ns.b is not None and ns.A2 is not None:
        return ns.b, ns.A2
    b, A2 = log_asymptote(seq)
    return (b if ns.b is None else ns.b), (A2 if ns.A2 is None else ns.A2)


def cmd_density(ns, rep: Report):
    seq = _sequence(ns)
    verdict = muntz_density_test(seq).value
    rep.add("density", verdict)
    rep.add("gap", seq.gap())
    top = ns.horizon or (float(seq.values[-1]) if not seq.is_generator else 100.0)
    ts = np.linspace(top / ns.points, top, ns.points)
    rep.table("table", ["t", "lambda_t[computed]", "count_t[computed]"],
              [(t, seq.characteristic_logarithm(t), seq.count(t)) for t in ts])
    return verdict


def cmd_fuchs_eval(ns, rep: Report):
    seq = _sequence(ns)
    if ns.z is None:
        raise UsageError("--z is required")
    zs = np.array(parse_complex_list(ns.z))
    if zs.size == 0:
        raise UsageError("--z: no points given")
    radius = max(float(np.max(np.abs(zs))), 1.0)
    prod = TruncatedProduct.for_radius(seq, radius)
    b, A2 = _asymptote(ns, seq)
    A = suggest_A(prod) if ns.A is None else ns.A
    rep.add("order", prod.order)
    rep.add("A", A)
    kernels = {"G": None, "g0": g0_kernel(prod, b, A2), "g": g_kernel(prod, ns.alpha, A)}
    if ns.k is not None:
        kernels[f"psi_{ns.k}"] = psi_kernel(prod, ns.k, b, A2)
    rows = []
    for name, kern in kernels.items():
        if name != "G" and np.any(zs.real < 0):
            raise MuntzError("kernels are evaluated on Re z >= 0 only")
        logs = prod.log_G(zs) if kern is None else kern.log_value(zs)
        terr = np.atleast_1d(prod.tail_error(zs))
        for z, lv, te in zip(zs, np.atleast_1d(logs), terr):
            val = np.exp(lv) if lv.real < 709 else complex(math.inf, 0)
            rows.append((name, z.real, z.imag, val.real, val.imag, lv.real, te))
    rep.table("values", ["function", "z_re", "z_im", "re[computed]", "im[computed]",
                         "log_abs[computed]", "log_error[estimate]"], rows)
    for r in rows:
        rep.add(f"{r[0]}({fmt(r[1])}{'+' if r[2] >= 0 else '-'}{fmt(abs(r[2]))}j)",
                f"{fmt(r[3])} {fmt(r[4])}")


def cmd_fuchs_verify(ns, rep: Report):
    seq = _sequence(ns)
    try:
        counts = tuple(int(c) for c in ns.counts.split(":"))
    except ValueError:
        raise UsageError(f"--counts: expected nx:ny, got {ns.counts!r}") from None
    pts = grid_points(_range(ns.re_range), _range(ns.im_range), counts)
    pts = pts[np.atleast_1d(SieveRegion(seq).contains(pts))]
    radius = float(np.max(np.abs(pts))) if pts.size else 1.0
    prod = TruncatedProduct.for_radius(seq, radius)
    report = certify_fuchs_bounds(prod, pts)
    rep.add("points", report.used)
    rep.add("excluded", report.excluded)
    rep.add("A_upper", report.a_upper)
    rep.add("A_lower", report.a_lower)
    rep.check("finite_constants", report.passed)
    rep.table("grid", ["z_re", "z_im", "log_abs_G[computed]", "bound_slack[computed]"],
              [(z.real, z.imag, lg, sl) for z, lg, sl in report.rows])


def cmd_surgery(ns, rep: Report):
    seq = _sequence(ns)
    horizon = ns.horizon or 500.0
    if ns.b is None:
        raise UsageError("--b is required (comparison progression {n/b})")
    prime = arithmetic_progression(ns.b, horizon)
    result = lambda_star_pipeline(seq, prime, horizon)
    adj = adjust_double_points(seq, result.lambda_star, ns.b)
    rng = np.random.default_rng(ns.seed)
    xs = np.sort(rng.uniform(1.0, 0.9 * horizon, ns.samples))
    eps = minimal_epsilon(seq, prime, horizon)
    lam = seq.characteristic_logarithm(xs)
    lam_star = result.characteristic_logarithm(xs)
    lam_prime = prime.characteristic_logarithm(xs)
    resid = lam + lam_star - lam_prime - result.A1
    member = np.isin(result.lambda_star, prime.exponents_upto(horizon))
    far = xs >= 2 * adj.h1 + 1
    shift = shift_residuals(result.lambda_star, adj, xs[far])
    rep.add("lambda_star_count", result.lambda_star.size)
    rep.add("A1", result.A1)
    rep.add("A1_integral", result.A1_integral)
    rep.add("A1_spread", result.A1_spread)
    rep.add("h1", adj.h1)
    rep.add("A3", adj.A3)
    rep.add("union_gap", adj.union_gap)
    rep.check("subsequence", bool(np.all(member)))
    rep.check("residual_bound", bool(np.all(np.abs(resid) <= eps(xs) + 1.0 / xs)))
    rep.check("separated", adj.separated)
    rep.check("shift_bound", bool(np.all(np.abs(shift) <= 3.0 / xs[far])))
    rep.table("residuals", ["x", "lambda[computed]", "lambda_star[computed]", "lambda_prime[computed]",
                            "residual[computed]"], list(zip(xs, lam, lam_star, lam_prime, resid)))


def _kernel_product(seq, K):
    lam_k = float(seq.head(K)[-1]) if seq.is_generator else float(seq.values[K - 1])
    return TruncatedProduct.for_radius(seq, max(lam_k, 10.0))


def cmd_biortho(ns, rep: Report):
    seq = _sequence(ns)
    prod = _kernel_product(seq, ns.size)
    b, A2 = _asymptote(ns, seq)
    lam = prod.exponents[:ns.size]
    delta = 1.0 / float(lam[-1]) if ns.delta is None else ns.delta
    quad = parse_quad(ns.quad)
    rows, worst, strict, ok = [], 0.0, 0, True
    for k in range(1, ns.size + 1):
        target = biorthogonal_target(prod, k, delta, b, A2)
        table = operator_table(psi_kernel(prod, k, b, A2, delta), ns.alpha, quad, float(lam[-1]))
        row_strict = True
        for m in range(1, ns.size + 1):
            res = table.apply(monomial(float(lam[m - 1])))
            expect = target if k == m else 0.0
            rel = abs(res.value - expect) / abs(target)
            worst = max(worst, rel)
            # the tolerance admits the combined quadrature error estimate on top of the relative bound
            ok = ok and rel <= ns.rtol + res.error / abs(target)
            row_strict = row_strict and rel <= ns.rtol
            rows.append((k, m, res.value.real, res.value.imag, complex(expect).real, complex(expect).imag,
                         res.error, rel))
        strict += row_strict
    rep.add("delta", delta)
    rep.add("worst_relative_error", worst)
    rep.add("rows_within_rtol_alone", strict)
    rep.check("biorthogonal", ok)
    rep.table("matrix", ["k", "m", "re[computed]", "im[computed]", "target_re[computed]", "target_im[computed]",
                         "error[estimate]", "relative_error[computed]"], rows)


def cmd_recover(ns, rep: Report):
    seq = _sequence(ns)
    terms = parse_terms(ns.f)
    top = max(ns.terms, max(k for _, k in terms))
    prod = _kernel_product(seq, top)
    lam = prod.exponents
    b, A2 = _asymptote(ns, seq)

    def f(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return sum(c * monomial(float(lam[k - 1]))(zeta) for c, k in terms)

    exp = recover_coefficients(f, prod, ns.terms, ns.alpha, ns.delta, b, A2, parse_quad(ns.quad))
    truth = np.zeros(ns.terms)
    for c, k in terms:
        if k <= ns.terms:
            truth[k - 1] += c
    worst = float(np.max(np.abs(exp.coefficients - truth)))
    rep.add("delta", exp.delta)
    rep.add("max_coefficient_error", worst)
    rep.add("operator_bound", exp.operator_bound)
    rep.check("delta_consistent", bool(exp.delta_consistent))
    rep.check("within_estimates", bool(np.all(np.abs(exp.coefficients - truth) <= exp.errors + 1e-12)))
    rep.table("expansion", ["lambda", "re_a[computed]", "im_a[computed]", "error[estimate]"],
              [(r["lambda"], r["re_a"], r["im_a"], r["error"]) for r in exp.to_records()])


def cmd_witness(ns, rep: Report):
    seq = _sequence(ns)
    kernel = default_g_kernel(seq, ns.alpha)
    report = incompleteness_witness(ns.mu, kernel, ns.alpha, ns.terms, parse_quad(ns.quad))
    rep.lines.extend(report.to_text().splitlines())
    rep.check("witness", report.consistent and report.lower_bound > 0)


def cmd_crosscheck(ns, rep: Report):
    seq = _sequence(ns)
    kernel = default_g_kernel(seq, ns.alpha)
    zs = np.array(parse_complex_list(ns.z))
    results = representation_crosscheck(zs, kernel, ns.alpha, parse_quad(ns.quad))
    ok = all(r.residual <= ns.factor * r.estimate for r in results)
    rep.add("A", kernel.shift)
    rep.check("representation", ok)
    rep.table("points", ["z_re", "z_im", "rhs_re[computed]", "rhs_im[computed]", "g_re[computed]",
                         "g_im[computed]", "residual[computed]", "error[estimate]"],
              [(r.z.real, r.z.imag, r.rhs.value.real, r.rhs.value.imag, r.g.real, r.g.imag,
                r.residual, r.estimate) for r in results])


_HANDLERS = {
    "density": cmd_density,
    "fuchs-eval": cmd_fuchs_eval,
    "fuchs-verify": cmd_fuchs_verify,
    "surgery": cmd_surgery,
    "biortho": cmd_biortho,
    "recover": cmd_recover,
    "witness": cmd_witness,
    "crosscheck": cmd_crosscheck,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = resolve(argv)
        rep = Report(ns.command, resolved_config(ns))
        verdict = _HANDLERS[ns.command](ns, rep)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except MuntzError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if ns.command == "density":
        print(verdict, file=stdout)
    stdout.write(rep.summary())
    out = ns.out or os.environ.get(OUTPUT_ENV)
    if out:
        rep.write(Path(out))
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
