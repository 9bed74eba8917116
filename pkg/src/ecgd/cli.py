"""Command line front door: ``ecgd digitize | synth | feature-stats``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import raster, synth
from .charclean import CharFilterConfig
from .errors import EcgdError
from .pipeline import RunConfig, digitize_file, feature_rows, manifest

log = logging.getLogger("ecgd")

FEATURE_COLUMNS = ("label", "area", "width", "height", "aspect_ratio", "centroid_row", "centroid_col")


def _num(x: float) -> str:
    # +0.0 folds negative zero
    return f"{round(float(x), 6) + 0.0:.6f}"


def signal_csv(sig) -> bytes:
    lines = ["t_ms,v_mv"]
    lines += [f"{_num(t)},{_num(v)}" for t, v in zip(sig.t_ms, sig.v_mv)]
    return ("\n".join(lines) + "\n").encode()


def signal_json(sig) -> bytes:
    doc = {
        "lead": sig.name,
        "index": sig.lead_index,
        "t_ms": [round(float(t), 6) + 0.0 for t in sig.t_ms],
        "v_mv": [round(float(v), 6) + 0.0 for v in sig.v_mv],
    }
    return (json.dumps(doc) + "\n").encode()


def output_dirs(inputs, out_dir: Path):
    """One directory per input, named after its stem, deduplicated."""
    seen = {}
    dirs = []
    for p in inputs:
        stem = Path(p).stem
        n = seen.get(stem, 0)
        seen[stem] = n + 1
        dirs.append(out_dir / (stem if n == 0 else f"{stem}_{n}"))
    return dirs


def process_one(path, dest: Path, cfg: RunConfig) -> bool:
    """Digitize one input and write its files; returns success."""
    result = digitize_file(path, cfg)
    dest.mkdir(parents=True, exist_ok=True)
    files = {}
    if result.ok:
        ext = cfg.output_format
        for lead in result.leads:
            name = f"{lead.index:02d}_{lead.name}.{ext}"
            data = signal_csv(lead.signal) if ext == "csv" else signal_json(lead.signal)
            raster.atomic_write_bytes(dest / name, data)
            files[lead.index] = name
    if cfg.debug_images:
        for rel, img in result.debug:
            target = dest / "debug" / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            raster.save_image(img, target)
    doc = manifest(result, cfg, files)
    raster.atomic_write_bytes(dest / "manifest.json", (json.dumps(doc, indent=2) + "\n").encode())
    if result.ok:
        log.info("%s: %d leads at %.3f px/mm", path, len(result.leads), result.px_per_mm)
    return result.ok


def _process_star(args):
    return process_one(*args)


def cmd_digitize(args) -> int:
    cfg = RunConfig(
        inputs=list(args.inputs),
        out_dir=Path(args.out),
        mv_per_mm=args.mv_per_mm,
        ms_per_mm=args.ms_per_mm,
        px_per_mm=args.px_per_mm,
        otsu_scale=args.otsu_scale,
        char_filter=CharFilterConfig(),
        debug_images=args.debug_images,
        output_format=args.format,
    )
    jobs = [(p, d, cfg) for p, d in zip(cfg.inputs, output_dirs(cfg.inputs, cfg.out_dir))]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            oks = list(pool.map(_process_star, jobs))
    else:
        oks = [process_one(*job) for job in jobs]
    failed = oks.count(False)
    if failed:
        log.error("%d of %d inputs failed", failed, len(oks))
    return 1 if failed else 0


def cmd_synth(args) -> int:
    try:
        spec = synth.SheetSpec.from_dict(json.loads(Path(args.spec).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        log.error("invalid sheet spec %s: %s", args.spec, exc)
        return 1
    try:
        img, truth = synth.render_sheet(spec)
        img = synth.apply_distortions(img, args.blur, args.desaturate, args.rotate, spec.paper_color)
    except (EcgdError, ValueError) as exc:
        log.error("cannot render %s: %s", args.spec, exc)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.spec).stem
    raster.save_image(img, out / f"{stem}.png")
    raster.atomic_write_bytes(out / f"{stem}.truth.json", (truth.to_json() + "\n").encode())
    return 0


def cmd_feature_stats(args) -> int:
    cfg = RunConfig(inputs=[args.input], px_per_mm=args.px_per_mm)
    try:
        blobs = feature_rows(raster.load_image(args.input), args.stripe, cfg, args.input)
    except EcgdError as exc:
        log.error("%s", exc)
        return 1
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_COLUMNS)
    for b in blobs:
        writer.writerow([b.label, b.area, b.width, b.height, f"{b.aspect_ratio:.6f}",
                         f"{b.centroid[0]:.6f}", f"{b.centroid[1]:.6f}"])
    sys.stdout.write(buf.getvalue())
    return 0


def _positive(x):
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecgd", description="Digitize scanned paper ECGs.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("digitize", help="convert scans to per-lead signal files")
    d.add_argument("inputs", nargs="+", help="PNG or P6 PPM scans (color, ~600 dpi)")
    d.add_argument("--out", required=True, help="output directory")
    d.add_argument("--mv-per-mm", type=_positive, default=0.1)
    d.add_argument("--ms-per-mm", type=_positive, default=40.0)
    d.add_argument("--px-per-mm", type=_positive, default=None,
                   help="skip grid pitch estimation and use this resolution")
    d.add_argument("--otsu-scale", type=_positive, default=0.5,
                   help="fraction of the Otsu level used to threshold the grid index")
    d.add_argument("--debug-images", action="store_true", help="dump every intermediate raster")
    d.add_argument("--format", choices=("csv", "json"), default="csv")
    d.add_argument("--jobs", type=int, default=1, help="inputs processed in parallel")
    d.set_defaults(func=cmd_digitize)

    s = sub.add_parser("synth", help="render a synthetic sheet and its ground truth")
    s.add_argument("--spec", required=True, help="sheet spec JSON")
    s.add_argument("--blur", type=float, default=0.0, help="Gaussian sigma in px")
    s.add_argument("--desaturate", type=float, default=0.0, help="factor in [0, 1]")
    s.add_argument("--rotate", type=float, default=0.0, help="degrees counterclockwise")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("feature-stats", help="dump blob features of one stripe as CSV")
    f.add_argument("input")
    f.add_argument("--stripe", type=int, required=True)
    f.add_argument("--px-per-mm", type=_positive, default=None)
    f.set_defaults(func=cmd_feature_stats)
    return p


def setup_logging():
    level = os.environ.get("ECGD_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "blur", 0) < 0:
        build_parser().error("--blur must be >= 0")
    if not 0 <= getattr(args, "desaturate", 0) <= 1:
        build_parser().error("--desaturate must lie in [0, 1]")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
