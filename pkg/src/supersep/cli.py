"""Command-line interface.

Every command prints one report ``{"command", "version", "config", "result"}``,
as JSON with ``--json`` and as indented text otherwise.  Exit codes: 0 on
success, 2 on precondition violations, 1 on I/O, parse or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import io as jio
from .bounds import bounds_demo
from .classify import (
    NonorthogonalFamilyParams,
    default_epsilon_grid,
    epsilon_scan,
    find_orthogonal_product_partner,
    nonorthogonal_unconditional_pair,
    theorem1_certificate,
)
from .discrimination import (
    build_more_nonlocal_set,
    build_two_element_ensemble,
    chefles_certificate,
    two_element_conclusive_check,
)
from .errors import InputError, ParseError, PreconditionError, PreconditionViolated, UnknownCommand
from .products import (
    DEFAULT_STARTS,
    Pencil,
    Subspace,
    classify_pencil,
    pencil_product_roots,
    product_in_subspace,
)
from .states import (
    DEFAULT_TOL,
    MINUS,
    PLUS,
    PureState,
    Tolerances,
    bell_states,
    concurrence_2x2,
    entanglement_entropy,
    schmidt_decompose,
)
from .ueb import (
    UebCandidate,
    build_paper_3ueb,
    build_partially_entangled_subspace,
    range_criterion_certificate,
    theorem3_identifiability,
    uniform_mixture,
    verify_r_ueb,
)


@dataclass
class RunConfig:
    tol: Tolerances = DEFAULT_TOL
    seed: int = 0
    starts: int = DEFAULT_STARTS
    output: str = "text"
    input_paths: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"tol": self.tol.as_dict(), "seed": self.seed, "starts": self.starts,
                "output": self.output, "input_paths": self.input_paths}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message:
            raise UnknownCommand(message)
        raise InputError(message)


# ---------------------------------------------------------------------------
# helpers


def _state(path, cfg: RunConfig) -> PureState:
    cfg.input_paths.append(str(path))
    return jio.state_from_json(jio.load_json(path), cfg.tol)


def _basis(path, cfg: RunConfig):
    cfg.input_paths.append(str(path))
    return jio.subspace_from_json(jio.load_json(path), cfg.tol)


def _pair_report(cls) -> dict:
    return {
        "verdict": cls.verdict,
        "certificate_kind": cls.certificate_kind,
        "witnesses": [{"coeffs": c, "product": w} for c, w in cls.witnesses],
        "roots": cls.roots,
    }


def _write(path, obj):
    if path:
        with open(path, "w") as fh:
            fh.write(jio.dumps(obj) + "\n")


def _example_states() -> dict:
    b = bell_states()
    e1 = PureState.from_kets(2, 2, {(0, 0): 2 / np.sqrt(5), (1, 1): 1 / np.sqrt(5)})
    e2 = PureState.from_kets(2, 2, {(0, 0): np.sqrt(0.8), (1, 1): np.sqrt(0.2)})
    return {
        "ex1_e": e1,
        "ex2_e": e2,
        "ex2_p": PureState.from_kets(2, 2, {(0, 1): 1.0}),
        "ex3_e": b["phi-"],
        "ex3_p": PureState.product(PLUS, PLUS),
    }


# ---------------------------------------------------------------------------
# commands


def cmd_schmidt(a, cfg):
    s = _state(a.state, cfg)
    sd = schmidt_decompose(s, cfg.tol)
    out = {"singular_values": sd.singular_values, "schmidt_rank": sd.numeric_rank,
           "entanglement_entropy": entanglement_entropy(s, cfg.tol)}
    if s.shape == (2, 2):
        out["concurrence"] = concurrence_2x2(s)
    return out


def cmd_classify_pair(a, cfg):
    return _pair_report(theorem1_certificate(_state(a.a, cfg), _state(a.b, cfg), cfg.tol))


def cmd_product_roots(a, cfg):
    A, B = _state(a.a, cfg), _state(a.b, cfg)
    return pencil_product_roots(Pencil.from_states(A, B), cfg.tol)


def cmd_find_orthogonal_product(a, cfg):
    return find_orthogonal_product_partner(_state(a.state, cfg), cfg.tol)


def cmd_epsilon_scan(a, cfg):
    e, p = _state(a.e, cfg), _state(a.p, cfg)
    pts = epsilon_scan(e, p, default_epsilon_grid(a.points), cfg.tol)
    return {"points": pts, "entangled_points": sum(q.schmidt_rank >= 2 for q in pts),
            "certificate_kind": "Scan"}


def cmd_subspace_products(a, cfg):
    basis, d1, d2, _ = _basis(a.subspace, cfg)
    S = Subspace.span(basis, cfg.tol)
    return product_in_subspace(S, cfg.tol, cfg.starts, cfg.seed)


def cmd_ueb_build(a, cfg):
    c = build_paper_3ueb()
    cand = jio.subspace_to_json(c.states, c.d1, c.d2, r_claimed=c.r_claimed, realization=c.realization)
    _write(a.out, cand)
    return {"candidate": cand, "report": verify_r_ueb(c, cfg.tol, cfg.starts, cfg.seed)}


def cmd_ueb_verify(a, cfg):
    basis, d1, d2, extra = _basis(a.subspace, cfg)
    c = UebCandidate(d1, d2, basis, int(extra.get("r_claimed", 3)), str(extra.get("realization", "")), cfg.tol)
    rep = verify_r_ueb(c, cfg.tol, cfg.starts, cfg.seed)
    out = {"report": rep}
    if a.identify:
        out["identifiability"] = [theorem3_identifiability(c, k, cfg.tol, cfg.starts, cfg.seed)
                                  for k in range(c.N)]
    if a.pes is not None:
        pes = build_partially_entangled_subspace(c, a.pes, cfg.tol, cfg.starts, cfg.seed)
        out["partially_entangled_subspace"] = {
            "dim": pes.subspace.dim, "product_span_dim": pes.product_span_dim,
            "deficit": pes.deficit, "certified": pes.certified, "reason": pes.reason,
            "range_criterion": range_criterion_certificate(pes, uniform_mixture(pes.subspace), cfg.tol),
        }
    return out


def cmd_identify(a, cfg):
    basis, *_ = _basis(a.states, cfg)
    targets = range(len(basis)) if a.target is None else [a.target]
    certs = [chefles_certificate(basis, k, cfg.tol, cfg.starts, cfg.seed) for k in targets]
    return {"certificates": certs,
            "all_identifiable": all(c.verdict.value == "Identifiable" for c in certs)}


def cmd_ensemble_build(a, cfg):
    ex = _example_states()
    psi1 = _state(a.psi1, cfg) if a.psi1 else ex["ex3_e"]
    phi = _state(a.phi, cfg) if a.phi else ex["ex3_p"]
    s = build_more_nonlocal_set(psi1, phi, a.completion_seed, cfg.tol)
    ens = build_two_element_ensemble(s, a.p1)
    ens_json = jio.ensemble_to_json(ens)
    _write(a.out, ens_json)
    return {"set": {"states": s.basis(), "average_entanglement": s.average_entanglement(),
                    "pair_certificate": _pair_report(s.pair_certificate),
                    "identifiability": s.identifiability},
            "ensemble": ens_json}


def cmd_ensemble_check(a, cfg):
    cfg.input_paths.append(str(a.ensemble))
    ens = jio.ensemble_from_json(jio.load_json(a.ensemble), cfg.tol)
    cert = two_element_conclusive_check(ens, cfg.tol, cfg.starts, cfg.seed)
    return {"certificate": cert,
            "conclusively_distinguishable": cert.verdict.value == "Identifiable"}


def cmd_bounds_demo(a, cfg):
    rep = bounds_demo()
    d = jio.to_jsonable(rep)
    d["pencil"] = _pair_report(rep.pencil)
    d["table"] = rep.table()
    return d


def cmd_demo_paper(a, cfg):
    ex = _example_states()
    out = {}
    part = find_orthogonal_product_partner(ex["ex1_e"], cfg.tol)
    out["example1"] = {"partner": part,
                       "pencil": _pair_report(classify_pencil(ex["ex1_e"], part.p, cfg.tol))}
    out["example2"] = _pair_report(classify_pencil(ex["ex2_e"], ex["ex2_p"], cfg.tol))
    out["example3"] = _pair_report(classify_pencil(ex["ex3_e"], ex["ex3_p"], cfg.tol))
    fam = nonorthogonal_unconditional_pair(NonorthogonalFamilyParams.from_angles(np.pi / 4, np.pi / 4))
    fam_cls = classify_pencil(fam.e, fam.p, cfg.tol)
    mm = PureState.product(MINUS, MINUS)
    out["nonorthogonal_family"] = {
        "overlap": fam.overlap,
        "pencil": _pair_report(fam_cls),
        "witness_fidelity_with_minus_minus": [w.fidelity(mm) for _, w in fam_cls.witnesses],
    }
    c = build_paper_3ueb()
    out["ueb"] = {
        "report": verify_r_ueb(c, cfg.tol, cfg.starts, cfg.seed),
        "verdicts": [theorem3_identifiability(c, k, cfg.tol, cfg.starts, cfg.seed).verdict
                     for k in range(c.N)],
    }
    pes = build_partially_entangled_subspace(c, 0, cfg.tol, cfg.starts, cfg.seed)
    out["ueb"]["partially_entangled_subspace"] = {
        "dim": pes.subspace.dim, "product_span_dim": pes.product_span_dim, "deficit": pes.deficit,
        "range_criterion": range_criterion_certificate(pes, uniform_mixture(pes.subspace), cfg.tol)}
    s = build_more_nonlocal_set(ex["ex3_e"], ex["ex3_p"], None, cfg.tol)
    ens = build_two_element_ensemble(s, 0.5)
    out["more_nonlocal"] = {
        "identifiability": s.identifiability,
        "average_entanglement": s.average_entanglement(),
        "two_element_check": two_element_conclusive_check(ens, cfg.tol, cfg.starts, cfg.seed),
    }
    out["bounds"] = cmd_bounds_demo(a, cfg)
    return out


COMMANDS = {
    "schmidt": (cmd_schmidt, "Schmidt data of a state", [("--state", True)]),
    "classify-pair": (cmd_classify_pair, "classify an (entangled, product) pair",
                      [("--a", True), ("--b", True)]),
    "product-roots": (cmd_product_roots, "product directions in span{a, b}", [("--a", True), ("--b", True)]),
    "find-orthogonal-product": (cmd_find_orthogonal_product, "orthogonal product partner of a two-qubit state",
                                [("--state", True)]),
    "epsilon-scan": (cmd_epsilon_scan, "rank along eps|e> + sqrt(1-eps^2)|p>", [("--e", True), ("--p", True)]),
    "subspace-products": (cmd_subspace_products, "search a subspace for product states",
                          [("--subspace", True)]),
    "ueb-build": (cmd_ueb_build, "build and verify the 13-state 3-UEB in C^4 x C^4", [("--out", False)]),
    "ueb-verify": (cmd_ueb_verify, "verify an r-UEB candidate", [("--subspace", True)]),
    "identify": (cmd_identify, "conclusive local identifiability certificates", [("--states", True)]),
    "ensemble-build": (cmd_ensemble_build, "build a more-nonlocal set and two-element ensemble",
                       [("--psi1", False), ("--phi", False), ("--out", False)]),
    "ensemble-check": (cmd_ensemble_check, "conclusive distinguishability of a two-element ensemble",
                       [("--ensemble", True)]),
    "bounds-demo": (cmd_bounds_demo, "superposition bounds versus exact values", []),
    "demo-paper": (cmd_demo_paper, "run every worked example", []),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol-rank", type=float, default=argparse.SUPPRESS)
    common.add_argument("--tol-norm", type=float, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--starts", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="supersep", parents=[common], description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_, files) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, parents=[common])
        for flag, required in files:
            sp.add_argument(flag, required=required, metavar="FILE")
        if name == "epsilon-scan":
            sp.add_argument("--points", type=int, default=99)
        if name == "ueb-verify":
            sp.add_argument("--identify", action="store_true")
            sp.add_argument("--pes", type=int, metavar="INDEX")
        if name == "identify":
            sp.add_argument("--target", type=int)
        if name == "ensemble-build":
            sp.add_argument("--p1", type=float, default=0.5)
            sp.add_argument("--completion-seed", type=int)
    return p


def _config(ns) -> RunConfig:
    g = vars(ns)
    seed = g.get("seed", 0)
    starts = g.get("starts", DEFAULT_STARTS)
    if starts < 1:
        raise PreconditionViolated("--starts must be at least 1")
    if seed < 0:
        raise PreconditionViolated("--seed must be nonnegative")
    t = {}
    for flag, name in (("tol_rank", "rank"), ("tol_norm", "norm")):
        if flag in g:
            if not g[flag] > 0:
                raise PreconditionViolated(f"--{flag.replace('_', '-')} must be positive")
            t[name] = g[flag]
    tol = Tolerances(**{**DEFAULT_TOL.as_dict(), **t})
    return RunConfig(tol, seed, starts, "json" if g.get("json") else "text")


def _text(obj, indent=0) -> list[str]:
    pad = "  " * indent
    if isinstance(obj, dict):
        if set(obj) >= {"d1", "d2", "coeffs"}:
            return [pad + f"<state {obj['d1']}x{obj['d2']}>"]
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_scalar_list(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
        return lines
    if isinstance(obj, list):
        lines = []
        for v in obj:
            sub = _text(v, indent + 1)
            lines.append(pad + "- " + sub[0].lstrip())
            lines.extend(sub[1:])
        return lines
    return [pad + _scalar(obj)]


def _is_scalar_list(v) -> bool:
    return isinstance(v, list) and all(isinstance(x, (int, float, str, bool)) or x is None for x in v)


def _scalar(v) -> str:
    if isinstance(v, str) and "\n" in v:
        return "\n" + v
    return str(v) if not isinstance(v, float) else f"{v:.10g}"


def render(report: dict, output: str) -> str:
    if output == "json":
        return jio.dumps(report)
    return "\n".join(_text(report))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = build_parser().parse_args(argv)
        cfg = _config(ns)
        fn = COMMANDS[ns.command][0]
        result = fn(ns, cfg)
        report = {"command": ns.command, "version": __version__,
                  "config": cfg.as_dict(), "result": jio.to_jsonable(result)}
        print(render(report, cfg.output))
        return 0
    except PreconditionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {ParseError.__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
