"""Command-line front door.

Subcommands::

    binbench binarize INPUT -m METHOD -o OUT.pbm [--params FILE] [--debug]
    binbench evaluate MANIFEST -o OUT.json [--format json|csv]
    binbench rank EVAL.json -o BOARD.csv [--format csv|json]
    binbench gen -o OUTDIR [-n N] [--seed S] [--profile NAME]

Exit codes are a stable contract: 0 success, 2 decode failure, 3 invalid
parameters, 4 dimension mismatch, 5 insufficient methods, 6 I/O error.

Every option can also live in a JSON config file (``--config``), keyed by
subcommand; command-line flags win over the file.  ``BINBENCH_THREADS``
caps evaluation concurrency (the output is identical either way).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import binarizers, metrics, pnm, scoring, synthgen
from .errors import (
    BinbenchError,
    DecodeError,
    InsufficientMethodsError,
    InvalidSpecError,
    ShapeMismatchError,
)

EXIT_OK = 0
EXIT_DECODE = 2
EXIT_PARAMS = 3
EXIT_DIMENSION = 4
EXIT_METHODS = 5
EXIT_IO = 6

EVAL_CSV_HEADER = "image,method,fmeasure,pfmeasure,psnr,drd,mpm,nrm"


def _fail(code: int, message: str) -> int:
    print(f"binbench: error: {message}", file=sys.stderr)
    return code


def _thread_count() -> int:
    raw = os.environ.get("BINBENCH_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(4, os.cpu_count() or 1)
    return n


# ---------------------------------------------------------------------------
# binarize


def _write_su_debug(stages: binarizers.SuStages, out_path: Path) -> None:
    stem = out_path.with_suffix("")
    pnm.write_gray(f"{stem}.stage1_contrast.pgm", stages.contrast)
    pnm.write_gray(f"{stem}.stage2_text_edges.pgm", pnm.mask_to_gray(stages.text_edges))
    pnm.write_gray(f"{stem}.stage3_raw_mask.pgm", pnm.mask_to_gray(stages.raw_mask))
    pnm.write_gray(f"{stem}.stage4_final.pgm", pnm.mask_to_gray(stages.mask))


def cmd_binarize(args) -> int:
    try:
        img = pnm.read_gray(args.input)
    except (DecodeError, OSError) as exc:
        return _fail(EXIT_DECODE, f"cannot read {args.input}: {exc}")
    try:
        if args.params:
            params = binarizers.BinarizerParams.from_json(args.params, method=args.method)
        else:
            params = binarizers.BinarizerParams(method=args.method)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_PARAMS, f"invalid parameters: {exc}")

    out_path = Path(args.output)
    try:
        if args.method == "su-contrast":
            stages = binarizers.su_contrast_stages(img, params)
            mask = stages.mask
            if args.debug:
                _write_su_debug(stages, out_path)
        else:
            mask = binarizers.binarize(img, args.method, params)
            if args.debug and args.method in ("niblack", "sauvola-grid", "niblack-ensemble"):
                _write_threshold_debug(img, args.method, params, out_path)
        pnm.write_mask(out_path, mask)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    return EXIT_OK


def _write_threshold_debug(img, method, params, out_path: Path) -> None:
    from .raster import local_stats

    if method == "niblack-ensemble":
        filtered = binarizers.conditional_median_filter(img)
        tmap = binarizers.ensemble_threshold_maps(filtered, params)["mean"]
    elif method == "niblack":
        mean, std = local_stats(img, params.window)
        k = params.k if params.k is not None else -0.2
        tmap = mean + k * std
    else:  # sauvola-grid
        tmap = binarizers.sauvola_grid_threshold(img, params)
    pnm.write_gray(
        f"{out_path.with_suffix('')}.threshold.pgm",
        np.clip(np.rint(tmap), 0, 255).astype(np.uint8),
    )


# ---------------------------------------------------------------------------
# evaluate


def _load_manifest(path: Path) -> tuple[list[dict], dict]:
    doc = json.loads(path.read_text())
    entries = doc.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ValueError("manifest needs a non-empty 'entries' list")
    options = doc.get("options", {})
    return entries, options


def _evaluate_entry(entry: dict, base: Path, nrm_mode: str, mpm_d_mode: str) -> list[dict]:
    image_id = entry["id"]
    gt = pnm.read_mask(base / entry["gt"])
    prepared = metrics.PreparedGroundTruth(gt)
    rows = []
    for method in sorted(entry["binarizations"]):
        b = pnm.read_mask(base / entry["binarizations"][method])
        if b.shape != gt.shape:
            raise ShapeMismatchError(
                f"entry {image_id!r}, method {method!r}: binarization is "
                f"{b.shape[1]}x{b.shape[0]} but ground truth is {gt.shape[1]}x{gt.shape[0]}"
            )
        report = prepared.evaluate(b, nrm_mode=nrm_mode, mpm_d_mode=mpm_d_mode)
        rows.append({"image": image_id, "method": method, **report.to_json_dict()})
    return rows


def cmd_evaluate(args) -> int:
    manifest_path = Path(args.manifest)
    try:
        entries, options = _load_manifest(manifest_path)
    except (OSError, ValueError) as exc:
        return _fail(EXIT_DECODE, f"cannot read manifest {args.manifest}: {exc}")

    nrm_mode = args.nrm_mode or options.get("nrm_mode", "paper-literal")
    mpm_d_mode = args.mpm_d_mode or options.get("mpm_d_mode", "all-pixels")
    if nrm_mode not in metrics.NRM_MODES:
        return _fail(EXIT_PARAMS, f"unknown nrm mode {nrm_mode!r}")
    if mpm_d_mode not in metrics.MPM_D_MODES:
        return _fail(EXIT_PARAMS, f"unknown mpm D mode {mpm_d_mode!r}")

    base = manifest_path.parent
    try:
        with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
            chunks = list(pool.map(
                lambda e: _evaluate_entry(e, base, nrm_mode, mpm_d_mode), entries
            ))
    except ShapeMismatchError as exc:
        return _fail(EXIT_DIMENSION, str(exc))
    except (DecodeError, OSError) as exc:
        return _fail(EXIT_DECODE, str(exc))
    except BinbenchError as exc:
        # e.g. a ground truth with no ink at all cannot be scored
        return _fail(EXIT_DECODE, f"unusable manifest entry: {exc}")
    except KeyError as exc:
        return _fail(EXIT_DECODE, f"manifest entry missing key {exc}")

    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r["image"], r["method"]))
    try:
        if args.format == "csv":
            lines = [EVAL_CSV_HEADER]
            for r in rows:
                report = metrics.MetricReport.from_json_dict(r)
                lines.append(",".join([r["image"], r["method"]] + report.csv_fields()))
            Path(args.output).write_text("\n".join(lines) + "\n")
        else:
            doc = {
                "options": {"nrm_mode": nrm_mode, "mpm_d_mode": mpm_d_mode},
                "rows": rows,
            }
            Path(args.output).write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# rank


def cmd_rank(args) -> int:
    try:
        rows, _options = scoring.load_evaluation_rows(args.evaluation)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(EXIT_DECODE, f"cannot read evaluation {args.evaluation}: {exc}")
    try:
        table = scoring.ResultTable.from_rows(rows)
        board = scoring.score(table)
    except InsufficientMethodsError as exc:
        return _fail(EXIT_METHODS, str(exc))
    except (KeyError, ValueError) as exc:
        return _fail(EXIT_DECODE, f"bad evaluation rows: {exc}")

    try:
        if args.format == "json":
            Path(args.output).write_text(json.dumps(board.to_json_dict(), indent=2) + "\n")
        else:
            Path(args.output).write_text(board.to_csv())
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    for method, value, rank in board.ordered():
        print(f"{rank}  {method}  {value:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.profile not in synthgen.PROFILES:
        return _fail(
            EXIT_PARAMS,
            f"unknown profile {args.profile!r}; valid profiles: "
            + ", ".join(sorted(synthgen.PROFILES)),
        )
    try:
        synthgen.generate_corpus(
            n=args.count,
            base_seed=args.seed,
            outdir=args.outdir,
            profile=args.profile,
            width=args.width,
            height=args.height,
            strokes=args.strokes,
        )
    except InvalidSpecError as exc:
        return _fail(EXIT_PARAMS, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write corpus: {exc}")
    print(str(Path(args.outdir) / "manifest.json"))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binbench",
        description="Document-image binarization benchmark toolkit",
    )
    parser.add_argument("--config", help="JSON config file with per-subcommand defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("binarize", help="binarize one gray image")
    p.add_argument("input", help="input image (PGM/PBM/PNG)")
    p.add_argument("-m", "--method", default="otsu", choices=binarizers.METHODS)
    p.add_argument("--params", help="JSON file with binarizer parameters")
    p.add_argument("-o", "--output", required=True, help="output mask (.pbm or .pgm)")
    p.add_argument("--debug", action="store_true", help="write stage dumps next to the output")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("evaluate", help="score binarizations against ground truths")
    p.add_argument("manifest", help="evaluation manifest JSON")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--nrm-mode", choices=metrics.NRM_MODES)
    p.add_argument("--mpm-d-mode", choices=metrics.MPM_D_MODES)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="rank methods from an evaluation JSON output")
    p.add_argument("evaluation", help="output of `binbench evaluate --format json`")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("gen", help="generate a synthetic degraded corpus")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("-n", "--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--profile", default="phibc-like")
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--strokes", type=int, default=14)
    p.set_defaults(func=cmd_gen)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Splice config-file values in as defaults: flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        config_path = argv[i + 1]
    except IndexError:
        return argv
    doc = json.loads(Path(config_path).read_text())
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        return rest
    command = rest[0]
    section = doc.get(command, {})
    extra: list[str] = []
    for key, value in section.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        else:
            extra.extend([flag, str(value)])
    # config values go first so explicit command-line flags override them
    return [command] + extra + rest[1:]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_PARAMS, f"cannot read config: {exc}")
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
