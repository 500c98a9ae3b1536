"""Command-line front end.

Exit codes: 0 success, 1 usage or input-format error, 2 internal
inconsistency (e.g. the two permanent computations disagree).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .fileio import (
    ParseError,
    file_digest,
    read_binmat,
    read_config,
    read_graph,
    read_maskset,
    write_field_csv,
    write_maskset,
)
from .layout import (
    CombinationLimitError,
    LayoutParams,
    emit_rects,
    emit_svg,
    format_length,
    instance_array,
)
from .masks import MAX_HAMILTONIAN_N, MAX_PERMANENT_N, CopyLedger, build_hamiltonian, build_permanent
from .optics import OpticsParams, detect, propagate
from .solver import decide_hamiltonian, mask_selection, oracle_permanent, permanent

EXIT_OK, EXIT_USAGE, EXIT_INCONSISTENT = 0, 1, 2


class UsageError(Exception):
    pass


class Inconsistency(Exception):
    pass


def _optics_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--beta", type=float, required=required)
    p.add_argument("--tau", type=float, required=required)
    p.add_argument("--i0", type=float, required=required)
    p.add_argument("--blocked-retention", action="store_true", default=None)
    p.add_argument("--layer-order", choices=("ascending", "descending"))
    p.add_argument("--field-csv", type=Path, required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optmask", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="key=value file; flags take precedence")
    parser.add_argument("--manifest", type=Path, help="where to write the run manifest")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="synthesise a Hamiltonian mask set")
    g.add_argument("--n", type=int)
    g.add_argument("--out", type=Path)

    s = sub.add_parser("solve", help="decide a graph against a mask set")
    s.add_argument("--graph", type=Path)
    s.add_argument("--masks", type=Path)
    _optics_args(s, required=False)

    pm = sub.add_parser("permanent", help="binary permanent by mask counting")
    pm.add_argument("--matrix", type=Path)

    lay = sub.add_parser("layout", help="instance array geometry and exports")
    lay.add_argument("--n", type=int)
    lay.add_argument("--layers", type=int)
    lay.add_argument("--pixel-size", type=int, help="nm")
    lay.add_argument("--pixel-gap", type=int, help="nm")
    lay.add_argument("--mask-gap", type=int, help="nm")
    lay.add_argument("--grid-width", type=int, help="pixel columns per mask (default: square)")
    lay.add_argument("--limit", type=int)
    lay.add_argument("--svg", type=Path)
    lay.add_argument("--rects", type=Path)

    sim = sub.add_parser("simulate", help="crosstalk propagation through a mask stack")
    sim.add_argument("--graph", type=Path)
    sim.add_argument("--masks", type=Path)
    _optics_args(sim, required=False)
    return parser


DEFAULTS = {
    "gen": {},
    "solve": {},
    "permanent": {},
    "layout": {
        "pixel_size": 1500,
        "pixel_gap": 1500,
        "mask_gap": 15000,
        "limit": 10**6,
        "grid_width": None,
    },
    "simulate": {},
}
OPTICS_DEFAULTS = {"blocked_retention": False, "layer_order": "ascending"}
REQUIRED = {
    "gen": ("n", "out"),
    "solve": ("graph", "masks"),
    "permanent": ("matrix",),
    "layout": ("n", "layers", "svg", "rects"),
    "simulate": ("graph", "masks", "alpha", "beta", "tau", "i0", "field_csv"),
}


def _coerce(key: str, raw: str, current):
    if key in ("blocked_retention",):
        return raw.lower() in ("1", "true", "yes", "on")
    if key in ("n", "layers", "pixel_size", "pixel_gap", "mask_gap", "limit", "grid_width"):
        return int(raw)
    if key in ("alpha", "beta", "tau", "i0"):
        return float(raw)
    if key in ("out", "graph", "masks", "matrix", "svg", "rects", "field_csv"):
        return Path(raw)
    return raw


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge built-in defaults < config file < command-line flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.command in ("solve", "simulate"):
        cfg.update(OPTICS_DEFAULTS)
    if args.config is not None:
        for key, raw in read_config(args.config).items():
            if not hasattr(args, key) or key in ("command", "config", "manifest", "verbose"):
                raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
            try:
                cfg[key] = _coerce(key, raw, cfg.get(key))
            except ValueError as exc:
                raise UsageError(f"{args.config}: bad value for {key}: {raw!r}") from exc
    for key, value in vars(args).items():
        if key in ("command", "config", "manifest", "verbose"):
            continue
        if value is not None:
            cfg[key] = value
        else:
            cfg.setdefault(key, None)
    missing = [k for k in REQUIRED[args.command] if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return cfg


def _check_input(path: Path) -> None:
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")


def _check_output(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")


def _optics(cfg: dict) -> OpticsParams | None:
    keys = ("alpha", "beta", "tau", "i0")
    given = [cfg.get(k) is not None for k in keys]
    if not any(given):
        return None
    if not all(given):
        raise UsageError("optics needs all of --alpha --beta --tau --i0")
    p = OpticsParams(
        alpha=cfg["alpha"],
        beta=cfg["beta"],
        tau=cfg["tau"],
        i0=cfg["i0"],
        blocked_retention=bool(cfg["blocked_retention"]),
        layer_order=cfg["layer_order"],
    )
    try:
        p.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return p


# --- subcommands -------------------------------------------------------


def cmd_gen(cfg: dict, out) -> list[Path]:
    n, out_dir = cfg["n"], cfg["out"]
    if not 3 <= n <= MAX_HAMILTONIAN_N:
        raise UsageError(f"--n must be in [3, {MAX_HAMILTONIAN_N}], got {n}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out_dir}: {exc}") from exc
    ledger = CopyLedger()
    m = build_hamiltonian(n, ledger)
    mask_path = write_maskset(m, out_dir / f"hamiltonian_n{n}.mask")
    summary = (
        f"n={n}\nrows={m.rows}\ncols={m.cols}\n"
        f"block_copies={ledger.block_copies}\nelements_written={ledger.elements_written}\n"
    )
    ledger_path = out_dir / f"ledger_n{n}.txt"
    ledger_path.write_text(summary, encoding="utf-8")
    print(f"maskset: {mask_path}", file=out)
    out.write(summary)
    return [mask_path, ledger_path]


def _load_pair(cfg: dict):
    _check_input(cfg["graph"])
    _check_input(cfg["masks"])
    g = read_graph(cfg["graph"])
    m = read_maskset(cfg["masks"])
    if m.kind != "hamiltonian":
        raise UsageError(f"{cfg['masks']}: not a hamiltonian mask set")
    if m.n != g.n:
        raise UsageError(f"n mismatch: graph n={g.n}, mask set n={m.n}")
    return g, m


def _report_optics(m, g, p: OpticsParams, csv_path, out) -> list[Path]:
    field = propagate(m, mask_selection(g), p)
    det = detect(field, p)
    print(f"optics_above_tau: {str(det.any_pixel_above_tau).lower()}", file=out)
    print(f"optics_cells: {','.join(map(str, det.cell_list))}", file=out)
    print(f"optics_total_intensity: {det.total_intensity:.12g}", file=out)
    if csv_path is None:
        return []
    _check_output(csv_path)
    return [write_field_csv(field, csv_path)]


def cmd_solve(cfg: dict, out) -> list[Path]:
    g, m = _load_pair(cfg)
    p = _optics(cfg)
    res = decide_hamiltonian(m, g)
    print(f"exists: {str(res.exists).lower()}", file=out)
    print(f"witnesses: {len(res.witness_rows)}", file=out)
    for r, cyc in zip(res.witness_rows, res.cycles(m)):
        print(f"cycle: row={r} " + "->".join(map(str, (*cyc, cyc[0]))), file=out)
    hist = " ".join(f"{k}:{v}" for k, v in res.histogram().items())
    print(f"histogram: {hist}", file=out)
    if p is None:
        if cfg.get("field_csv") is not None:
            raise UsageError("--field-csv needs optics parameters")
        return []
    return _report_optics(m, g, p, cfg.get("field_csv"), out)


def cmd_simulate(cfg: dict, out) -> list[Path]:
    g, m = _load_pair(cfg)
    p = _optics(cfg)
    return _report_optics(m, g, p, cfg["field_csv"], out)


def cmd_permanent(cfg: dict, out) -> list[Path]:
    _check_input(cfg["matrix"])
    a = read_binmat(cfg["matrix"])
    n = a.shape[0]
    ryser = oracle_permanent(a)
    if 1 <= n <= MAX_PERMANENT_N:
        masked = permanent(build_permanent(n), a)
        print(f"permanent_masks: {masked}", file=out)
        print(f"permanent_ryser: {ryser}", file=out)
        if masked != ryser:
            raise Inconsistency(f"mask count {masked} != Ryser {ryser}")
    else:
        print("permanent_masks: skipped (n outside mask range)", file=out)
        print(f"permanent_ryser: {ryser}", file=out)
    print(f"permanent: {ryser}", file=out)
    return []


def cmd_layout(cfg: dict, out) -> list[Path]:
    for key in ("svg", "rects"):
        _check_output(cfg[key])
    n = cfg["n"]
    if not 3 <= n <= MAX_HAMILTONIAN_N:
        raise UsageError(f"--n must be in [3, {MAX_HAMILTONIAN_N}], got {n}")
    try:
        params = LayoutParams(cfg["pixel_size"], cfg["pixel_gap"], cfg["mask_gap"])
        arr = instance_array(n, cfg["layers"], params, limit=cfg["limit"], width=cfg["grid_width"])
    except CombinationLimitError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mw, mh = arr.mask_extent_nm
    bw, bh = arr.extent_nm
    print(f"combos={len(arr.combos)}", file=out)
    print(f"grid={arr.grid_side}x{arr.grid_side}", file=out)
    print(f"last_row_used={arr.last_row_used}", file=out)
    print(f"unused={arr.last_row_unused}", file=out)
    print(f"unused_cells={arr.unused_cells}", file=out)
    print(f"pixels={arr.mask_grid.height}x{arr.mask_grid.width}", file=out)
    print(f"mask={format_length(mw)}x{format_length(mh)}", file=out)
    print(f"box={format_length(bw)}x{format_length(bh)}", file=out)
    return [emit_svg(arr, cfg["svg"]), emit_rects(arr, cfg["rects"])]


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "permanent": cmd_permanent,
    "layout": cmd_layout,
    "simulate": cmd_simulate,
}
INPUT_KEYS = ("graph", "masks", "matrix")


def _manifest_path(args, cfg: dict) -> Path | None:
    if args.manifest is not None:
        return args.manifest
    if args.command == "gen":
        return cfg["out"] / "manifest.json"
    if args.command == "layout":
        return cfg["svg"].with_suffix(".manifest.json")
    if cfg.get("field_csv") is not None:
        return cfg["field_csv"].with_suffix(".manifest.json")
    return None


def write_manifest(path: Path, args, cfg: dict, outputs: list[Path]) -> None:
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(cfg.items())}
    if args.config is not None:
        config["config_file"] = str(args.config)
    doc = {
        "tool": "optmask",
        "version": __version__,
        "command": args.command,
        "config": config,
        "inputs": {
            str(cfg[k]): file_digest(cfg[k]) for k in INPUT_KEYS if cfg.get(k) is not None
        },
        "outputs": {str(p): file_digest(p) for p in outputs},
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        outputs = COMMANDS[args.command](cfg, out)
        manifest = _manifest_path(args, cfg)
        if manifest is not None:
            write_manifest(manifest, args, cfg, outputs)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Inconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK



def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
