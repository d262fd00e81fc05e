"""Command-line entry point.

Exit status
-----------
0  success
2  usage error (unknown flag, out-of-range value, missing argument)
3  construction failure (unknown state or state cannot be built)
4  convergence failure (best seesaw restart hit --max-iter)
5  certification failed (nothing certified, e.g. separable control)
6  I/O failure writing the report
7  verify found a failing invariant
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from . import certifier as cert_mod
from . import entropy as ent
from . import matrix_io
from . import overlap as ov
from . import states, verify

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_CONVERGENCE = 4
EXIT_CERTIFICATION = 5
EXIT_IO = 6
EXIT_VERIFY = 7

COMMANDS = ("state", "overlap", "bound", "certify", "verify")


@dataclass(frozen=True)
class RunConfig:
    command: str
    state_id: str = "tiles-delta"
    seed: int = 7
    restarts: int = ov.DEFAULT_RESTARTS
    tol: float = ov.DEFAULT_TOL
    max_iter: int = ov.DEFAULT_MAX_ITER
    n_max: int = 2
    m_list: tuple[int, ...] = (0, 1)
    output_path: str = "-"
    format: str = "text"
    allow_n3: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _m_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("attachment counts must be non-negative integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgecert", description="Irreversibility certificates for PPT edge states.")
    parser.add_argument("--version", action="version", version=f"edgecert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, state=True):
        if state:
            p.add_argument("--state", dest="state_id", default="tiles-delta",
                           help=f"state identifier, one of {sorted(states.REGISTRY)}")
        p.add_argument("--output", "-o", dest="output_path", default="-", help="report path, '-' for stdout")

    def search(p):
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--restarts", type=_positive_int, default=ov.DEFAULT_RESTARTS)
        p.add_argument("--tol", type=_positive_float, default=ov.DEFAULT_TOL)
        p.add_argument("--max-iter", dest="max_iter", type=_positive_int, default=ov.DEFAULT_MAX_ITER)

    def grid(p, fmt_default):
        p.add_argument("--n-max", dest="n_max", type=int, choices=(1, 2, 3), default=2)
        p.add_argument("--m-list", dest="m_list", type=_m_list, default=(0, 1))
        p.add_argument("--allow-n3", dest="allow_n3", action="store_true",
                       help="permit --n-max 3 (64 basis vectors of 729 amplitudes)")
        p.add_argument("--format", choices=("text", "tabular"), default=fmt_default)

    p = sub.add_parser("state", help="write a named state in the matrix text format")
    common(p)
    p = sub.add_parser("overlap", help="product-vector overlap beta of a state's support")
    common(p)
    search(p)
    p = sub.add_parser("bound", help="alpha chain and combined bounds over N, M grids")
    common(p)
    search(p)
    grid(p, "tabular")
    p = sub.add_parser("certify", help="full irreversibility certificate")
    common(p)
    search(p)
    grid(p, "text")
    p = sub.add_parser("verify", help="run the invariant self-check")
    common(p, state=False)
    return parser


def parse_args(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if getattr(ns, "n_max", 2) == 3 and not getattr(ns, "allow_n3", False):
        build_parser().error("--n-max 3 requires --allow-n3")
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _certify_config(cfg: RunConfig) -> cert_mod.CertifyConfig:
    return cert_mod.CertifyConfig(
        state_id=cfg.state_id, seed=cfg.seed, restarts=cfg.restarts, tol=cfg.tol, max_iter=cfg.max_iter,
        n_max=cfg.n_max, m_list=cfg.m_list, allow_n3=cfg.allow_n3,
    )


def _overlap(cfg: RunConfig):
    rho = states.bipartite_density(cfg.state_id)
    V = ov.support_projector(rho)
    return V, ov.seesaw_overlap(V, cfg.restarts, cfg.tol, cfg.max_iter, cfg.seed)


def dispatch(cfg: RunConfig) -> int:
    try:
        if cfg.command == "verify":
            results = verify.run_checks()
            lines = [f"{'PASS' if ok else 'FAIL'} {name}: {msg}" for name, ok, msg in results]
            _write(cfg.output_path, "\n".join(lines) + "\n")
            return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY

        if cfg.command == "state":
            try:
                obj = states.resolve(cfg.state_id)
            except Exception as exc:  # noqa: BLE001
                print(f"construction failed: {exc}", file=sys.stderr)
                return EXIT_CONSTRUCTION
            _write(cfg.output_path, matrix_io.dumps(obj))
            return EXIT_OK

        if cfg.command == "overlap":
            try:
                V, res = _overlap(cfg)
            except KeyError as exc:
                print(f"construction failed: {exc}", file=sys.stderr)
                return EXIT_CONSTRUCTION
            report = {"tool_version": __version__, "state_id": cfg.state_id, "support_dim": V.dim,
                      "esep_lower_bound": ent.esep_lower_bound(res.beta), **res.as_dict()}
            _write(cfg.output_path, _json(report))
            return EXIT_OK if res.converged else EXIT_CONVERGENCE

        if cfg.command == "bound":
            return _bound(cfg)

        if cfg.command == "certify":
            try:
                cert = cert_mod.run_certification(_certify_config(cfg))
            except cert_mod.CertificationError as exc:
                print(str(exc), file=sys.stderr)
                if exc.stage == "construct":
                    return EXIT_CONSTRUCTION
                if exc.stage == "seesaw" and "converg" in str(exc):
                    return EXIT_CONVERGENCE
                return EXIT_CERTIFICATION
            text = cert_mod.dumps_table(cert.experiments) if cfg.format == "tabular" else cert_mod.dumps_certificate(cert)
            _write(cfg.output_path, text)
            return EXIT_OK if cert.certified else EXIT_CERTIFICATION
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    raise ValueError(f"unknown command {cfg.command!r}")


def _bound(cfg: RunConfig) -> int:
    try:
        V, res = _overlap(cfg)
    except KeyError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    if not res.converged:
        print("seesaw did not converge", file=sys.stderr)
        return EXIT_CONVERGENCE
    c = ent.separability_ball_c(V)
    alpha = None if res.beta >= 1 - cert_mod.BETA_ONE_TOL else ent.alpha_bound(res.beta, c)
    rows = cert_mod.bound_experiments(V, res, alpha, _certify_config(cfg))
    if cfg.format == "tabular":
        text = cert_mod.dumps_table(rows)
    else:
        text = _json({
            "tool_version": __version__,
            "state_id": cfg.state_id,
            "beta": res.beta,
            "cert_c": c.as_dict(),
            "alpha": alpha.as_dict() if alpha else None,
            "regularized_lower_bound": ent.regularized_lower_bound(alpha) if alpha else 0.0,
            "rows": [{k: v for k, v in r.items() if k != "runtime_s"} for r in rows],
        })
    _write(cfg.output_path, text)
    return EXIT_OK if alpha is not None else EXIT_CERTIFICATION


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    return dispatch(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
