"""Command-line interface.

Subcommands: ``translate`` (pGCL program to equation-system file), ``check``
(validate a certificate file, or a cwp manifest), ``synth`` (search for a
certificate), ``oracle`` (truncated value iteration, bracketing, Monte
Carlo), and ``bench`` (run a corpus directory).

Exit codes: 0 the claim was validated, 1 the claim could not be established
(unknown, or a refused conditional bound), 2 bad input, 3 time budget
exhausted.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from fractions import Fraction

from .certify import (
    build_constraints,
    check_certificate,
    check_numeric,
    emit_smt,
    grid_states,
)
from .eqsys import Call, Query
from .errors import DivergentNormalization, InputError, LfpcertError
from .handelman import default_degree, prove_pqe
from .oracle import (
    ABSORB_INF,
    ABSORB_ZERO,
    TruncationSpec,
    bracket,
    kleene_iterate,
    monte_carlo,
    write_trace_csv,
)
from .pgcl import parse_pgcl
from .poly import Polynomial
from .simplex import Deadline, TimeoutExpired
from .synth import CONFIGS, config_with, synthesize
from .textio import (
    certificate_has_exp,
    load_certificate,
    load_cwp_manifest,
    load_system,
    parse_certificate,
    parse_post,
    parse_query_line,
    parse_query_spec,
    serialize_certificate,
    serialize_system,
)
from .xreal import is_inf, xle
from .translate import bind_state, translate_cwp, translate_ert, translate_rt2, translate_wp

EXIT_VALID = 0
EXIT_UNKNOWN = 1
EXIT_INPUT = 2
EXIT_TIMEOUT = 3


@dataclass
class RunConfig:
    """One resolved invocation; every subcommand reads the fields it needs."""

    command: str
    inputs: tuple = ()
    property: str | None = None
    config: str | None = None
    deg_u: int | None = None
    deg_r: int | None = None
    deg_eta: int | None = None
    handelman_deg: int | None = None
    timeout: float | None = None
    truncate: tuple = ()
    iters: int = 10000
    tol: str = "0"
    seed: int = 0
    trials: int = 1000
    horizon: int = 1000
    state: str | None = None
    policy: str = "auto"
    do_bracket: bool = False
    witness: str | None = None
    cert: str | None = None
    query: str | None = None
    post: str | None = None
    out: str | None = None
    emit_smt: str | None = None
    jobs: int = 4

    def deadline(self):
        return Deadline(self.timeout) if self.timeout else None


# ---------------------------------------------------------------------------
# small parsers for flag values
# ---------------------------------------------------------------------------
def _parse_fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except ValueError:
        pass
    try:
        from decimal import Decimal

        return Fraction(Decimal(s))
    except Exception:
        raise InputError(f"cannot read {s!r} as a rational") from None


def _parse_truncate(items) -> dict:
    out = {}
    for item in items:
        if ":" not in item or ".." not in item:
            raise InputError(f"--truncate wants var:lo..hi, got {item!r}")
        var, rng = item.split(":", 1)
        lo, hi = rng.split("..", 1)
        out[var.strip()] = (_parse_fraction(lo), _parse_fraction(hi))
    return out


def _parse_policy(s: str):
    if s == "auto":
        return "auto"
    if s == "witness":
        return ("witness",)
    if s.startswith("absorb:"):
        v = s.split(":", 1)[1]
        return ABSORB_INF if v == "inf" else ("absorb", _parse_fraction(v))
    if s.startswith("default:"):
        return ("default", _parse_fraction(s.split(":", 1)[1]))
    raise InputError(f"unknown policy {s!r}")


def _parse_state(s) -> dict:
    out = {}
    if not s:
        return out
    for part in s.split(","):
        if "=" not in part:
            raise InputError(f"--state wants var=value pairs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = _parse_fraction(v.strip())
    return out


def _resolve(base_path, rel):
    if os.path.isabs(rel):
        return rel
    return os.path.join(os.path.dirname(os.path.abspath(base_path)), rel)


def _write_out(cfg, text):
    sys.stdout.write(text)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------------
def cmd_translate(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    with open(path, "r", encoding="utf-8") as fh:
        program = parse_pgcl(fh.read())
    deadline = cfg.deadline()
    prop = cfg.property or "wp"
    if cfg.post is not None and prop in ("ert", "rt2"):
        raise InputError(f"--post does not apply to {prop}")
    post = parse_post(cfg.post if cfg.post is not None else "1")

    spec = parse_query_spec(cfg.query) if cfg.query else None

    def bind(top):
        if spec is None:
            return None, None, None
        args, rel, bound = spec
        if args is not None:
            names = [v for v, _ in program.variables]
            if len(args) != len(names):
                raise InputError(
                    f"query binds {len(args)} value(s) but the program has "
                    f"{len(names)} variable(s) {tuple(names)}"
                )
            top = bind_state(top, dict(zip(names, args)))
        return top, rel, bound

    if prop == "cwp":
        if not cfg.out:
            raise InputError("cwp translation writes two files; pass --out")
        (f1, e1), (f2, e2) = translate_cwp(program, post, deadline)
        base = cfg.out[:-4] if cfg.out.endswith(".eqs") else cfg.out
        q1 = q2 = None
        if spec is not None:
            top1, rel, bound = bind(f1)
            top2, _, _ = bind(f2)
            q1 = Query(top1, rel, bound)
            q2 = Query(top2, ">=", Fraction(0))
        for suffix, system, q in ((".cwp1.eqs", e1, q1), (".cwp2.eqs", e2, q2)):
            with open(base + suffix, "w", encoding="utf-8") as fh:
                fh.write(serialize_system(system, q))
            print(f"wrote {base + suffix}")
        return EXIT_VALID

    if prop == "wp":
        top, system = translate_wp(program, post, deadline)
    elif prop == "ert":
        top, system = translate_ert(program, deadline)
    elif prop == "rt2":
        _f1, top, system = translate_rt2(program, deadline)
    else:
        raise InputError(f"unknown property {prop!r}")

    q = None
    if spec is not None:
        topq, rel, bound = bind(top)
        q = Query(topq, rel, bound)
    text = serialize_system(system, q)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(text)
    return EXIT_VALID


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------
def _lambda_text(witness) -> str:
    bits = []
    for prod, lam in zip(witness.products, witness.lambdas):
        if lam == 0:
            continue
        mono = "1" if not prod else "*".join(f"g{i}" for i in prod)
        bits.append(f"{lam}*{mono}")
    return " + ".join(bits) if bits else "0"


def _discharge_table(system, query, cert, handelman_deg, deadline):
    """One row per proof obligation: label, degree, multiplier combination."""
    cset = build_constraints(system, query, cert, deadline)
    wdeg = 0
    for _, wmap in cert.witnesses():
        for w in wmap.values():
            for _, p in w.pieces:
                wdeg = max(wdeg, p.degree())
    rows = []
    for _pred, pqe in cset.entries:
        deg = handelman_deg or max(default_degree(pqe), wdeg)
        w = prove_pqe(pqe, deg, deadline)
        rows.append(
            (pqe.label, str(deg), _lambda_text(w) if w else "(no witness)")
        )
    return rows


def _render_table(rows, headers) -> list:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return lines


def _check_one(system, query, cert, cfg, deadline, want_table=True):
    """Validate one certificate, numerically when it has exponential pieces.

    Returns (valid, lines) where lines is the human-readable report body.
    """
    lines = []
    if certificate_has_exp(cert):
        if not cfg.truncate:
            raise InputError(
                "exponential witnesses are checked pointwise; "
                "pass --truncate var:lo..hi for every variable"
            )
        states = grid_states(system, _parse_truncate(cfg.truncate))
        rep = check_numeric(system, query, cert, states, deadline)
        lines.append(f"result: {rep.summary()}")
        for label, state, value in rep.violations[:10]:
            lines.append(f"  {label} at {state}: {value}")
        return rep.consistent, lines
    rep = check_certificate(system, query, cert, cfg.handelman_deg, deadline)
    lines.append(f"result: {rep.summary()}")
    if not rep.valid:
        for label, reason in rep.failures:
            lines.append(f"  failed {label}: {reason}")
        return False, lines
    if want_table:
        rows = _discharge_table(system, query, cert, cfg.handelman_deg, deadline)
        lines.extend(_render_table(rows, ("obligation", "degree", "multipliers")))
    return True, lines


def cmd_check(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    if cfg.property == "cwp" or path.endswith(".cwp"):
        return _check_cwp(cfg)
    system, query, _meta = load_system(path)
    if cfg.query:
        query = parse_query_line(cfg.query)
    if query is None:
        raise InputError("the system has no query line; pass --query")
    if not cfg.cert:
        raise InputError("check needs --cert")
    cert, _ = load_certificate(cfg.cert)
    deadline = cfg.deadline()
    lines = [
        f"system: {path} ({len(system.predicates())} predicate(s))",
        f"certificate: {cfg.cert} ({cert.direction})",
    ]
    valid, body = _check_one(system, query, cert, cfg, deadline)
    lines += body
    if cfg.emit_smt and not certificate_has_exp(cert):
        cset = build_constraints(system, query, cert, deadline)
        deg = cfg.handelman_deg or 2
        with open(cfg.emit_smt, "w", encoding="utf-8") as fh:
            fh.write(emit_smt(cset, deg, comment=os.path.basename(path)))
        lines.append(f"smt script: {cfg.emit_smt}")
    _write_out(cfg, "\n".join(lines) + "\n")
    return EXIT_VALID if valid else EXIT_UNKNOWN


def _check_cwp(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    manifest = load_cwp_manifest(path)
    deadline = cfg.deadline()
    if manifest.truncate and not cfg.truncate:
        cfg = replace(
            cfg,
            truncate=tuple(
                f"{v}:{lo}..{hi}" for v, (lo, hi) in manifest.truncate.items()
            ),
        )
    sys1, q1, _ = load_system(_resolve(path, manifest.system1))
    sys2, q2, _ = load_system(_resolve(path, manifest.system2))
    if q1 is None or q2 is None:
        raise InputError("both cwp systems need query lines fixing the state")

    lines = [f"manifest: {path}"]
    ok = True
    for tag, system, qf, role in (
        ("cwp1 lower", sys1, q1, manifest.lower1),
        ("cwp2 lower", sys2, q2, manifest.lower2),
        ("cwp2 upper", sys2, q2, manifest.upper2),
    ):
        if role is None:
            continue
        cert_path, bound = role
        cert, _ = load_certificate(_resolve(path, cert_path))
        rel = "<=" if tag.endswith("upper") else ">="
        q = Query(qf.formula, rel, bound)
        valid, body = _check_one(system, q, cert, cfg, deadline, want_table=False)
        ok = ok and valid
        lines.append(f"{tag}: bound {rel} {bound}; " + body[0])
        lines.extend(body[1:])

    l1 = manifest.lower1[1]
    l2 = manifest.lower2[1]
    if not ok:
        _write_out(cfg, "\n".join(lines) + "\n")
        return EXIT_UNKNOWN
    if manifest.upper2 is None:
        _write_out(cfg, "\n".join(lines) + "\n")
        raise DivergentNormalization(
            "no validated upper bound on the lost mass; cannot divide by 1 - l2"
        )
    u2 = manifest.upper2[1]
    if u2 >= 1 or l2 >= 1:
        _write_out(cfg, "\n".join(lines) + "\n")
        raise DivergentNormalization(
            f"validated upper bound {u2} on the lost mass reaches 1"
        )
    value = l1 / (1 - l2)
    lines.append(f"conditional bound: value >= ({l1})/(1 - {l2}) = {value}")
    _write_out(cfg, "\n".join(lines) + "\n")
    return EXIT_VALID


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------
def _resolve_config(cfg: RunConfig):
    base = CONFIGS[cfg.config or "A"]
    overrides = {}
    if cfg.deg_u is not None:
        overrides["deg_u"] = cfg.deg_u
    if cfg.deg_r is not None:
        overrides["deg_r"] = cfg.deg_r
    if cfg.deg_eta is not None:
        overrides["deg_eta"] = cfg.deg_eta
    if cfg.handelman_deg is not None:
        overrides["handelman_deg"] = cfg.handelman_deg
    if overrides:
        return config_with(base, name="custom", **overrides)
    return base


def cmd_synth(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    system, query, _meta = load_system(path)
    if cfg.query:
        query = parse_query_line(cfg.query)
    if query is None:
        raise InputError("the system has no query line; pass --query")
    deadline = cfg.deadline()
    config = _resolve_config(cfg)
    res = synthesize(system, query, config, deadline)
    lines = [f"system: {path}", f"synthesis: {res.summary()}"]
    code = EXIT_UNKNOWN
    if res.status == "valid":
        text = serialize_certificate(res.certificate)
        reparsed, _ = parse_certificate(text, "<synthesized>")
        rep = check_certificate(system, query, reparsed, cfg.handelman_deg, deadline)
        lines.append(f"re-validation: {rep.summary()}")
        if rep.valid:
            code = EXIT_VALID
            if cfg.out:
                with open(cfg.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
                lines.append(f"certificate: {cfg.out}")
            else:
                lines.append(text.rstrip())
            if cfg.emit_smt:
                cset = build_constraints(system, query, reparsed, deadline)
                with open(cfg.emit_smt, "w", encoding="utf-8") as fh:
                    fh.write(
                        emit_smt(
                            cset,
                            cfg.handelman_deg or 2,
                            comment=os.path.basename(path),
                        )
                    )
                lines.append(f"smt script: {cfg.emit_smt}")
    print("\n".join(lines))
    return code


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------
def _query_point(query):
    """(pred, argtuple) when the query formula is one call on constants."""
    if query is None or not isinstance(query.formula, Call):
        return None
    args = []
    for a in query.formula.args:
        if isinstance(a, Polynomial):
            if not a.is_const():
                return None
            args.append(a.const_value())
            continue
        try:
            args.append(Fraction(a))
        except (TypeError, ValueError):
            return None
    return query.formula.pred, tuple(args)


def cmd_oracle(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    if path.endswith(".pgcl"):
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        res = monte_carlo(
            text,
            property=cfg.property or "wp",
            trials=cfg.trials,
            horizon=cfg.horizon,
            seed=cfg.seed,
            state=_parse_state(cfg.state),
        )
        print(
            f"estimate: {res.estimate} (~{float(res.estimate):.6g}), "
            f"ci95 {res.ci95:.3g}, {res.trials} trials, horizon {res.horizon}, "
            f"seed {res.seed}"
        )
        return EXIT_VALID

    system, query, _meta = load_system(path)
    if cfg.query:
        query = parse_query_line(cfg.query)
    spec = TruncationSpec(_parse_truncate(cfg.truncate), policy=_parse_policy(cfg.policy))
    deadline = cfg.deadline()
    witness = None
    if cfg.witness:
        cert, _ = load_certificate(cfg.witness)
        witness = cert.u
    point = _query_point(query)

    if cfg.do_bracket:
        if witness is None:
            raise InputError("--bracket needs --witness CERT with a prefixed u")
        br = bracket(system, spec, witness, iters=cfg.iters, deadline=deadline)
        lines = [
            f"bracket after {cfg.iters} sweeps "
            f"({'exact' if br.exact else 'lower-bounded'} gap identity, "
            f"{br.checked} sweeps checked)"
        ]
        if point:
            pred, args = point
            lo = br.lower.values[pred][args]
            hi = br.upper.values[pred][args]
            lines.append(
                f"{pred}({', '.join(map(str, args))}): "
                f"between {_pretty(lo)} and {_pretty(hi)}"
            )
        print("\n".join(lines))
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                write_trace_csv(br.lower, fh)
        return EXIT_VALID

    res = kleene_iterate(
        system,
        spec,
        start=witness if witness is not None else "bottom",
        max_iters=cfg.iters,
        tol=_parse_fraction(cfg.tol),
        deadline=deadline,
        keep_history=bool(cfg.out),
    )
    lines = [
        f"direction: {res.direction}",
        f"iterations: {res.iterations}",
        f"residual: {_pretty(res.residual)}",
    ]
    if point:
        pred, args = point
        v = res.values[pred].get(args)
        if v is not None:
            lines.append(f"{pred}({', '.join(map(str, args))}) = {_pretty(v)}")
            lines.append(
                f"query bound {query.relation} {query.bound}: iterate "
                f"{'meets' if _meets(v, query) else 'does not meet'} it"
            )
    print("\n".join(lines))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            write_trace_csv(res, fh)
    return EXIT_VALID


def _pretty(v) -> str:
    """An exact rational, with a float gloss; huge ones show the float only."""
    if is_inf(v):
        return "inf"
    f = Fraction(v)
    # bit_length guards the str() call: CPython refuses to print very large
    # integers, and a thousand-digit rational is unreadable anyway
    if max(f.numerator.bit_length(), f.denominator.bit_length()) > 130:
        return f"~{float(f):.9g} (exact value too long to print)"
    exact = str(v)
    if len(exact) > 40:
        return f"~{float(f):.9g} (exact value too long to print)"
    return f"{exact} (~{float(f):.9g})"


def _meets(v, query):
    if query.relation == ">=":
        return xle(query.bound, v)
    return xle(v, query.bound)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------
def _bench_one(path: str, default_timeout) -> dict:
    """Run one corpus entry in isolation; never raises."""
    name = os.path.splitext(os.path.basename(path))[0]
    t0 = time.perf_counter()
    row = {"name": name, "query": "", "config": "", "status": "error", "detail": ""}
    try:
        if path.endswith(".cwp"):
            cfg = RunConfig(command="check", inputs=(path,), property="cwp")
            manifest = load_cwp_manifest(path)
            row["config"] = "check"
            row["query"] = f"cwp at lower {manifest.lower1[1]}"
            import contextlib
            import io

            buf = io.StringIO()
            try:
                with contextlib.redirect_stdout(buf):
                    code = _check_cwp(cfg)
            except DivergentNormalization as exc:
                row["status"] = "refused"
                row["detail"] = str(exc)
            else:
                row["status"] = "valid" if code == EXIT_VALID else "unknown"
                if code == EXIT_VALID:
                    l1, l2 = manifest.lower1[1], manifest.lower2[1]
                    row["detail"] = f"conditional bound {l1 / (1 - l2)}"
        else:
            system, query, meta = load_system(path)
            if query is None:
                raise InputError("benchmark has no query line")
            timeout = float(meta["timeout"]) if "timeout" in meta else default_timeout
            cfg = RunConfig(
                command="synth",
                config=meta.get("config", "A"),
                deg_u=int(meta["deg_u"]) if "deg_u" in meta else None,
                deg_r=int(meta["deg_r"]) if "deg_r" in meta else None,
                deg_eta=int(meta["deg_eta"]) if "deg_eta" in meta else None,
                handelman_deg=(
                    int(meta["handelman_deg"]) if "handelman_deg" in meta else None
                ),
            )
            config = _resolve_config(cfg)
            row["config"] = config.name if config.name != "custom" else (
                meta.get("config", "A") + "*"
            )
            row["query"] = f"{query.relation} {query.bound}"
            deadline = Deadline(timeout) if timeout else None
            res = synthesize(system, query, config, deadline)
            row["status"] = res.status
            row["detail"] = res.summary()
    except TimeoutExpired:
        row["status"] = "timeout"
    except Exception as exc:  # noqa: BLE001 - per-benchmark isolation
        row["status"] = "error"
        row["detail"] = str(exc)
    except BaseException as exc:  # pragma: no cover - defensive
        row["status"] = "error"
        row["detail"] = repr(exc)
    row["seconds"] = f"{time.perf_counter() - t0:.2f}"
    return row


_BENCH_COLUMNS = ("name", "query", "config", "status", "seconds", "detail")


def cmd_bench(cfg: RunConfig) -> int:
    corpus = cfg.inputs[0]
    if not os.path.isdir(corpus):
        raise InputError(f"{corpus} is not a directory")
    files = sorted(
        os.path.join(corpus, f)
        for f in os.listdir(corpus)
        if f.endswith(".eqs") or f.endswith(".cwp")
    )
    rows = []
    if files:
        jobs = max(1, min(cfg.jobs, len(files)))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_bench_one, p, cfg.timeout) for p in files]
            for fut in as_completed(futures):
                rows.append(fut.result())
    rows.sort(key=lambda r: r["name"])
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=_BENCH_COLUMNS)
            w.writeheader()
            w.writerows(rows)
    if not rows:
        print("no benchmarks found")
        return EXIT_VALID
    table = [[r[c] for c in _BENCH_COLUMNS] for r in rows]
    print("\n".join(_render_table(table, _BENCH_COLUMNS)))
    return EXIT_VALID


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------
def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lfpcert",
        description="Certified bounds on least fixed points of probabilistic "
        "equation systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("translate", help="pGCL program -> equation-system file")
    t.add_argument("program", help="pGCL source file")
    t.add_argument("--property", choices=("wp", "ert", "rt2", "cwp"), default="wp")
    t.add_argument("--post", help="post-expectation, e.g. 'x' or '[m = 3]'")
    t.add_argument(
        "--query",
        help="'X(1) >= 3': the arguments bind program variables in "
        "declaration order; the name is a placeholder",
    )
    t.add_argument("--out", help="output path (.eqs); cwp writes a .cwp1/.cwp2 pair")
    t.add_argument("--timeout", type=float)

    c = sub.add_parser("check", help="validate a certificate or cwp manifest")
    c.add_argument("system", help=".eqs system (with --cert) or .cwp manifest")
    c.add_argument("--cert", help="certificate file")
    c.add_argument("--property", choices=("wp", "ert", "rt2", "cwp"))
    c.add_argument("--query", help="override the system's query line")
    c.add_argument("--handelman-deg", type=int, dest="handelman_deg")
    c.add_argument(
        "--truncate",
        action="append",
        default=[],
        metavar="x:lo..hi",
        help="grid for pointwise checks of exponential witnesses",
    )
    c.add_argument("--timeout", type=float)
    c.add_argument("--emit-smt", dest="emit_smt", metavar="PATH")
    c.add_argument("--out", help="also write the report here")

    s = sub.add_parser("synth", help="search for a certificate")
    s.add_argument("system", help=".eqs system with a query line")
    s.add_argument("--config", choices=tuple(CONFIGS), default="A")
    s.add_argument("--deg-u", type=int, dest="deg_u")
    s.add_argument("--deg-r", type=int, dest="deg_r")
    s.add_argument("--deg-eta", type=int, dest="deg_eta")
    s.add_argument("--handelman-deg", type=int, dest="handelman_deg")
    s.add_argument("--query", help="override the system's query line")
    s.add_argument("--timeout", type=float)
    s.add_argument("--out", help="certificate output path")
    s.add_argument("--emit-smt", dest="emit_smt", metavar="PATH")

    o = sub.add_parser(
        "oracle", help="truncated value iteration / bracketing / Monte Carlo"
    )
    o.add_argument("input", help=".eqs system, or .pgcl program for Monte Carlo")
    o.add_argument("--truncate", action="append", default=[], metavar="x:lo..hi")
    o.add_argument("--iters", type=int, default=10000)
    o.add_argument("--tol", default="0", help="stop when sweeps change less than this")
    o.add_argument(
        "--policy",
        default="auto",
        help="out-of-grid policy: auto, absorb:0, absorb:inf, default:V, witness",
    )
    o.add_argument("--witness", help="certificate whose u starts the iteration")
    o.add_argument("--bracket", action="store_true", dest="do_bracket")
    o.add_argument("--query", help="state to report, as a query expression")
    o.add_argument("--property", choices=("wp", "ert"), help="Monte Carlo property")
    o.add_argument("--trials", type=int, default=1000)
    o.add_argument("--horizon", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--state", help="initial state for Monte Carlo, e.g. 'x=1'")
    o.add_argument("--timeout", type=float)
    o.add_argument("--out", help="CSV trace output path")

    b = sub.add_parser("bench", help="run a corpus directory")
    b.add_argument("corpus", help="directory of .eqs/.cwp benchmarks")
    b.add_argument("--jobs", type=int, default=4)
    b.add_argument("--timeout", type=float, default=120.0)
    b.add_argument("--out", help="CSV results path")
    return p


def _to_config(ns) -> RunConfig:
    known = {f for f in RunConfig.__dataclass_fields__}
    values = {k: v for k, v in vars(ns).items() if k in known and v is not None}
    inputs = tuple(
        v
        for k, v in vars(ns).items()
        if k in ("program", "system", "input", "corpus")
    )
    values["inputs"] = inputs
    if "truncate" in values:
        values["truncate"] = tuple(values["truncate"])
    return RunConfig(**values)


_DISPATCH = {
    "translate": cmd_translate,
    "check": cmd_check,
    "synth": cmd_synth,
    "oracle": cmd_oracle,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    cfg = _to_config(ns)
    try:
        return _DISPATCH[cfg.command](cfg)
    except TimeoutExpired:
        print("error: time budget exhausted", file=sys.stderr)
        return EXIT_TIMEOUT
    except DivergentNormalization as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (LfpcertError, SyntaxError, TypeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
