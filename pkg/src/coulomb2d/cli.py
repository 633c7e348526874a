"""Command-line front end.

Settings come from built-in defaults, then an optional ``key = value``
config file, then flags.  Every JSON output embeds the resolved settings.
Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

OUTPUT_DIR_ENV = "COULOMB2D_OUTPUT_DIR"

DEFAULTS: Dict[str, Any] = {
    "system": "helium-infinite",
    "masses": None,
    "charges": None,
    "ml": 0,
    "symmetry": "singlet",
    "nbase": 40,
    "alpha": "0.4",
    "theta": 0.0,
    "epsilon": 1.0,
    "field": 0.0,
    "shift": None,
    "k": 6,
    "tol": 1e-10,
    "max_iter": 400,
    "seed": 20240531,
    "format": "json",
    "output": None,
    "threads": None,
    "kind": "B",
    "dump": None,
    "verify": False,
    "thetas": "0.35,0.45",
    "match_tol": 1e-6,
    "eps_points": "0,0.005,0.01,0.015,0.02",
    "count": 5,
    "parity": 1,
    "dump_matrices": None,
}

_TYPES = {"ml": int, "nbase": int, "k": int, "max_iter": int, "seed": int, "count": int,
          "parity": int, "theta": float, "epsilon": float, "field": float, "tol": float,
          "match_tol": float, "threads": int}


class ConfigError(ValueError):
    pass


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key == "verify":
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if key == "shift":
        return complex(str(value).replace(" ", "").replace("i", "j"))
    conv = _TYPES.get(key)
    try:
        return conv(value) if conv else value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def read_config(path: str) -> Dict[str, Any]:
    """Flat ``key = value`` file; ``#`` starts a comment; dashes equal underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve(args: argparse.Namespace) -> Dict[str, Any]:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return {k: _coerce(k, v) for k, v in cfg.items()}


def _floats(text: str, n: Optional[int] = None) -> List[float]:
    vals = [float(t) for t in str(text).split(",") if t.strip()]
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def system_params(cfg):
    from .hamiltonian import SystemParams

    name = cfg["system"]
    if name == "helium-infinite":
        return SystemParams.helium()
    if name == "hminus-infinite":
        return SystemParams.hminus()
    if name == "custom":
        if not cfg["masses"] or not cfg["charges"]:
            raise ConfigError("custom system needs masses and charges")
        m = _floats(cfg["masses"], 3)
        q = _floats(cfg["charges"], 3)
        return SystemParams(m[0], m[1], m[2], q[0], q[1], q[2])
    raise ConfigError(f"unknown system {name!r}")


def _validate(cfg):
    if cfg["nbase"] < 0:
        raise ConfigError("nbase must be non-negative")
    if cfg["symmetry"] not in ("singlet", "triplet", "none"):
        raise ConfigError("symmetry must be singlet, triplet or none")
    if cfg["k"] < 1:
        raise ConfigError("k must be >= 1")
    if not cfg["tol"] > 0:
        raise ConfigError("tol must be positive")
    if cfg["alpha"] != "auto":
        try:
            a = float(cfg["alpha"])
        except ValueError as exc:
            raise ConfigError("alpha must be a number or 'auto'") from exc
        if a <= 0:
            raise ConfigError("alpha must be positive")
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")


def _write(text: str, cfg, default_name: str) -> None:
    """Write atomically to the configured path, or print."""
    path = cfg["output"]
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], default_name)
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json(payload: Dict[str, Any], cfg) -> str:
    doc = dict(payload)
    doc["config"] = {k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in cfg.items()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sig(x: float) -> float:
    return float(f"{x:.13g}")


# --- commands ---------------------------------------------------------------

def cmd_build_operators(cfg):
    from .algebra import serialize, term_count
    from .hamiltonian import OperatorKind, build_operator

    try:
        kind = OperatorKind.parse(cfg["kind"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"unknown operator kind {cfg['kind']!r}") from exc
    op = build_operator(kind)
    print(f"terms: {term_count(op)}")
    if cfg["output"]:
        _write(serialize(op), cfg, f"{kind.name}.txt")
    return EXIT_OK


def cmd_basis_count(cfg):
    from .basis import enumerate_basis

    basis = enumerate_basis(cfg["ml"], cfg["symmetry"], cfg["nbase"])
    print(len(basis))
    if cfg["dump"]:
        out = dict(cfg, output=cfg["dump"])
        _write(basis.to_csv(), out, "basis.csv")
    return EXIT_OK


def cmd_group_table(cfg):
    from .symmetry import character_table, generate_group, physical_representations

    G = generate_group()
    table = character_table(G)      # verifies orthogonality exactly on construction
    phys = physical_representations(table)
    print(f"order {len(G)}, {len(table.class_sizes)} classes")
    print(table.format())
    if cfg["verify"]:
        dims = sorted(table.dimensions)
        ok = (len(G) == 128 and len(table.class_sizes) == 29 and len(phys) == 8
              and dims == [1] * 16 + [2] * 8 + [4] * 5)
        print("verify: " + ("ok" if ok else "FAILED"))
        return EXIT_OK if ok else EXIT_SOLVER
    return EXIT_OK


def _problem(cfg, with_stark=False):
    from .assembly import build_problem
    from .basis import enumerate_basis, enumerate_stark_basis

    params = system_params(cfg)
    if with_stark:
        basis = enumerate_stark_basis(cfg["symmetry"], cfg["nbase"], cfg["parity"])
    else:
        basis = enumerate_basis(cfg["ml"], cfg["symmetry"], cfg["nbase"])
    if len(basis) == 0:
        raise ConfigError("empty basis for these quantum numbers")
    P = build_problem(params, basis, with_stark=with_stark)
    if cfg["dump_matrices"]:
        P.dump(cfg["dump_matrices"])
    return P


def _alpha(cfg, P, shift):
    from .spectra import optimize_alpha

    if cfg["alpha"] == "auto":
        a, _ = optimize_alpha(P, shift.real, cfg["epsilon"])
        return a
    return float(cfg["alpha"])


def _default_shift(cfg) -> complex:
    if cfg["shift"] is not None:
        return cfg["shift"]
    return complex(-12.5 if cfg["system"] != "hminus-infinite" else -3.0)


def cmd_spectrum(cfg):
    from .eigensolver import SolveRequest
    from .spectra import spectrum

    with_stark = bool(cfg["field"])
    P = _problem(cfg, with_stark)
    shift = _default_shift(cfg)
    alpha = _alpha(cfg, P, shift)
    if cfg["theta"] == 0:
        shift = shift.real
    req = SolveRequest(shift=shift, k=cfg["k"], tol=cfg["tol"], max_iter=cfg["max_iter"], seed=cfg["seed"])
    res = spectrum(P, alpha, req, theta=cfg["theta"], epsilon=cfg["epsilon"], F=cfg["field"])
    if cfg["format"] == "csv":
        _write(res.to_csv(), cfg, "spectrum.csv")
    else:
        payload = res.to_dict()
        payload["alpha"] = alpha
        _write(_json(payload, cfg), cfg, "spectrum.json")
    return EXIT_OK


def cmd_resonances(cfg):
    from .spectra import find_resonances

    P = _problem(cfg)
    shift = _default_shift(cfg)
    alpha = _alpha(cfg, P, complex(shift.real))
    thetas = _floats(cfg["thetas"], 2)
    cands = find_resonances(P, alpha, (thetas[0], thetas[1]), shift, k=cfg["k"], tol=cfg["match_tol"],
                            solver_tol=cfg["tol"], seed=cfg["seed"])
    if cfg["format"] == "csv":
        lines = ["re,im,drift"] + [f"{_sig(c.energy.real)!r},{_sig(c.energy.imag)!r},{c.drift:.3e}" for c in cands]
        _write("\n".join(lines) + "\n", cfg, "resonances.csv")
    else:
        payload = {"alpha": alpha, "thetas": thetas,
                   "resonances": [{"energy": [_sig(c.energy.real), _sig(c.energy.imag)],
                                   "drift": c.drift} for c in cands]}
        _write(_json(payload, cfg), cfg, "resonances.json")
    return EXIT_OK


def cmd_scan_epsilon(cfg):
    from .spectra import epsilon_scan

    import numpy as np

    P = _problem(cfg)
    shift = _default_shift(cfg).real
    alpha = _alpha(cfg, P, complex(shift))
    eps = _floats(cfg["eps_points"])
    if len(eps) < 2:
        raise ConfigError("need at least two epsilon points")
    E = epsilon_scan(P, alpha, eps, shift, tol=cfg["tol"])
    slope, intercept = np.polyfit(eps, E, 1)
    if cfg["format"] == "csv":
        lines = ["epsilon,energy"] + [f"{e!r},{_sig(x)!r}" for e, x in zip(eps, E)]
        _write("\n".join(lines) + "\n", cfg, "scan.csv")
    else:
        payload = {"alpha": alpha, "epsilon": eps, "energies": [_sig(x) for x in E],
                   "slope": _sig(slope), "intercept": _sig(intercept)}
        _write(_json(payload, cfg), cfg, "scan.json")
    return EXIT_OK


def cmd_rydberg(cfg):
    from .spectra import rydberg_table

    P = _problem(cfg)
    shift = _default_shift(cfg).real
    alpha = _alpha(cfg, P, complex(shift))
    rows = rydberg_table(P, alpha, cfg["count"], shift=shift, tol=cfg["tol"], seed=cfg["seed"])
    if cfg["format"] == "csv":
        lines = ["N,M,n,m,energy,defect"]
        for r in rows:
            l = r.label
            defect = "" if r.defect is None else f"{r.defect:.6f}"
            lines.append(f"{l.N},{l.M},{l.n},{l.m},{_sig(r.energy)!r},{defect}")
        _write("\n".join(lines) + "\n", cfg, "rydberg.csv")
    else:
        payload = {"alpha": alpha, "levels": [
            {"label": str(r.label), "energy": _sig(r.energy), "defect": None if r.defect is None else round(r.defect, 6)} for r in rows]}
        _write(_json(payload, cfg), cfg, "rydberg.json")
    return EXIT_OK


COMMANDS = {
    "build-operators": cmd_build_operators,
    "basis-count": cmd_basis_count,
    "group-table": cmd_group_table,
    "spectrum": cmd_spectrum,
    "resonances": cmd_resonances,
    "scan-epsilon": cmd_scan_epsilon,
    "rydberg": cmd_rydberg,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file (flags win)")
    common.add_argument("--system", choices=["helium-infinite", "hminus-infinite", "custom"])
    common.add_argument("--masses", help="m1,m2,m3 (inf for a fixed particle)")
    common.add_argument("--charges", help="Q1,Q2,Q3")
    common.add_argument("--ml", type=int)
    common.add_argument("--symmetry", choices=["singlet", "triplet", "none"])
    common.add_argument("--nbase", type=int)
    common.add_argument("--alpha", help="scale modulus, or 'auto' to optimize")
    common.add_argument("--theta", type=float, help="complex rotation angle (radians)")
    common.add_argument("--epsilon", type=float, help="scale of the electron-electron repulsion")
    common.add_argument("--field", type=float, help="static field strength along x")
    common.add_argument("--parity", type=int, choices=[1, -1], help="Πx parity of the field basis")
    common.add_argument("--shift", help="target energy, e.g. -1.41-0.001j")
    common.add_argument("-k", type=int, dest="k")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int, dest="max_iter")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--output", help="output path (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    common.add_argument("--threads", type=int, help="cap on BLAS threads")
    common.add_argument("--dump-matrices", dest="dump_matrices",
                        help="directory for 'row col value' dumps of the assembled pieces")

    p = argparse.ArgumentParser(prog="coulomb2d", description="Spectral solver for planar three-body Coulomb systems")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("build-operators", parents=[common], help="build a ladder-operator polynomial")
    s.add_argument("--kind")
    sub.add_parser("basis-count", parents=[common], help="size of a symmetry-adapted basis").add_argument(
        "--dump", help="write the basis states as CSV")
    sub.add_parser("group-table", parents=[common], help="character table of the symmetry group").add_argument(
        "--verify", action="store_true", default=None)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues near a shift")
    s = sub.add_parser("resonances", parents=[common], help="θ-stable complex eigenvalues")
    s.add_argument("--thetas", help="two rotation angles, e.g. 0.35,0.45")
    s.add_argument("--match-tol", type=float, dest="match_tol")
    sub.add_parser("scan-epsilon", parents=[common], help="ground state versus repulsion scale").add_argument(
        "--eps-points", dest="eps_points")
    sub.add_parser("rydberg", parents=[common], help="bound Rydberg series with quantum defects").add_argument(
        "--count", type=int)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        _validate(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg["threads"]:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(cfg["threads"])

    from .assembly import AssemblyError
    from .eigensolver import EigensolverError

    try:
        return COMMANDS[args.command](cfg)
    except (ConfigError, AssemblyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EigensolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
