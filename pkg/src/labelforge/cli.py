"""The ``forge`` command line.

Subcommands: generate (batch pseudo labels), evaluate (metric report with
figures), encode (dump assembled input tensors for offline model runs),
and serve (annotation HTTP service plus optional static UI). The FORGE_LOG
environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .assembly import assemble
from .backends import parse_backend_spec
from .encoding import EnergyConfig, encode_energy
from .errors import LabelForgeError
from .io import load_image, load_manifest, resolve_prompts, save_tensor
from .metrics import MetricConfig
from .pipeline import run_manifest
from .postprocess import MATCHER_NAMES, PostprocessConfig
from .report import evaluate_dirs, write_report

log = logging.getLogger(__name__)


def _setup_logging() -> None:
    name = os.environ.get("FORGE_LOG", "INFO").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _add_energy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=4.0, help="Gaussian peak half-width (px)")
    p.add_argument(
        "--truncation",
        type=int,
        default=0,
        help="blob truncation radius in px (0 = ceil(3*sigma))",
    )
    p.add_argument("--combine", choices=("sum", "max"), default="sum", help="blob overlap rule")


def _add_post_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matcher", choices=MATCHER_NAMES, default="bbm", help="false-alarm filter")
    p.add_argument("--tau-s", type=float, default=0.5, help="saliency binarization threshold")
    p.add_argument(
        "--tpm-radius", type=float, default=3.0, help="centroid matcher radius (tpm only)"
    )


def _energy_cfg(args) -> EnergyConfig:
    return EnergyConfig(sigma=args.sigma, truncation_radius=args.truncation, combine=args.combine)


def _post_cfg(args) -> PostprocessConfig:
    return PostprocessConfig(tau_s=args.tau_s, matcher=args.matcher, tpm_radius=args.tpm_radius)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge", description="point-prompt pseudo-label generation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate pseudo labels for a manifest")
    gen.add_argument("--manifest", required=True, help="dataset manifest JSON")
    gen.add_argument(
        "--backend",
        default="reference",
        help="reference | precomputed:PATTERN | remote:URL",
    )
    _add_post_args(gen)
    _add_energy_args(gen)
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--workers", type=int, default=4, help="parallel images")

    ev = sub.add_parser("evaluate", help="score labels against ground truth")
    ev.add_argument("--pred", required=True, help="directory of predicted mask PNGs")
    ev.add_argument("--gt", required=True, help="directory of ground-truth mask PNGs")
    ev.add_argument("--deviation", type=float, default=3.0, help="centroid match radius (px)")
    ev.add_argument("--report", required=True, help="report JSON path (CSV/figure side files)")
    ev.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    enc = sub.add_parser("encode", help="write assembled input tensors as TNSR files")
    enc.add_argument("--manifest", required=True, help="dataset manifest JSON")
    enc.add_argument("--out", required=True, help="output directory")
    _add_energy_args(enc)

    srv = sub.add_parser("serve", help="run the annotation HTTP service")
    srv.add_argument("--addr", default="127.0.0.1:8765", help="HOST:PORT to bind")
    srv.add_argument(
        "--backend",
        default="reference",
        help="reference | precomputed:PATTERN | remote:URL",
    )
    srv.add_argument("--out", default="out", help="directory for finalized labels")
    srv.add_argument("--manifest", default=None, help="dataset manifest for image lookup")
    srv.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /")
    _add_post_args(srv)
    _add_energy_args(srv)
    return parser


def cmd_generate(args) -> int:
    manifest = load_manifest(args.manifest)
    summary = run_manifest(
        manifest,
        backend=parse_backend_spec(args.backend),
        energy_cfg=_energy_cfg(args),
        post_cfg=_post_cfg(args),
        out_dir=args.out,
        workers=args.workers,
    )
    ok = len(summary.entries) - summary.failed
    print(f"generated {ok}/{len(summary.entries)} labels in {args.out} (summary.json written)")
    for entry in summary.entries:
        if entry["status"] != "ok":
            print(f"  failed {entry['image_id']}: {entry['error']}", file=sys.stderr)
    return 1 if summary.failed else 0


def cmd_evaluate(args) -> int:
    cfg = MetricConfig(deviation_px=args.deviation)
    report = evaluate_dirs(args.pred, args.gt, cfg)
    paths = write_report(report, args.report, cfg, figures=not args.no_figures)
    print(
        f"images={len(report.per_image)} iou={report.iou:.6f} pd={report.pd:.6f} "
        f"fa(x1e-6)={report.fa * cfg.fa_scale:.6f} fat={report.fat:.6f}"
    )
    for kind, path in paths.items():
        print(f"  {kind}: {path}")
    return 0


def cmd_encode(args) -> int:
    manifest = load_manifest(args.manifest)
    energy_cfg = _energy_cfg(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for image_id in manifest.ids():
        image = load_image(manifest.image(image_id).image_path)
        prompts = resolve_prompts(manifest, image_id)
        energy = encode_energy(prompts, image.width, image.height, energy_cfg)
        model_input = assemble(image, energy)
        save_tensor(model_input.stacked(), out / f"{image_id}.tnsr")
    print(f"encoded {len(manifest.ids())} input tensors to {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import create_app, serve

    host, _, port_text = args.addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise LabelForgeError(f"--addr must be HOST:PORT, got {args.addr!r}")
    manifest = load_manifest(args.manifest) if args.manifest else None
    app = create_app(
        manifest=manifest,
        backend=parse_backend_spec(args.backend),
        energy_cfg=_energy_cfg(args),
        post_cfg=_post_cfg(args),
        out_dir=args.out,
        ui_dir=args.ui_dir,
    )
    serve(app, host=host, port=int(port_text))
    return 0


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "evaluate": cmd_evaluate,
        "encode": cmd_encode,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (LabelForgeError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
