"""``pwclock`` command-line entry point."""

import argparse
import csv
import io
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from pwclock import __version__, _kernels
from pwclock.config import SpecError, parse_spec, spec_to_mapping
from pwclock.observer import run_observer, theory_curve
from pwclock.tomography import noise_calibration, run_superobserver

log = logging.getLogger("pwclock")

THEORY_POINTS = 512


def theory_csv(omega):
    """Exact p(t) over one clock period, 512 uniform samples (endpoint excluded)."""
    period = 2 * np.pi / omega
    t = np.arange(THEORY_POINTS) * period / THEORY_POINTS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "p"))
    for ti, pi in zip(t, theory_curve(t, omega)):
        w.writerow((repr(float(ti)), repr(float(pi))))
    return buf.getvalue()


def _versions():
    out = {"pwclock": __version__, "python": platform.python_version(), "numpy": np.__version__}
    if _kernels.numba is not None:
        out["numba"] = _kernels.numba.__version__
    out["backend"] = "numba" if _kernels.USE_NUMBA else "numpy"
    return out


def run(spec):
    """Execute a resolved spec, writing all artifacts. Returns (exit_code, manifest)."""
    out = Path(spec.output_dir)
    warnings_ = []
    files = {}

    if spec.mode in ("observer", "both"):
        ds = run_observer(spec.observer)
        if spec.output_format == "csv":
            files["observer.csv"] = ds.to_csv()
        else:
            files["observer.json"] = json.dumps(ds.to_records(), indent=2) + "\n"
        files["theory.csv"] = theory_csv(spec.observer.omega)

    if spec.mode in ("superobserver", "both"):
        report = run_superobserver(spec.tomography)
        if not report.all_converged:
            bad = [r.external_time for r in report.rows if not r.converged]
            warnings_.append(f"mle_not_converged at external times {bad}")
        if spec.output_format == "csv":
            files["tomography.csv"] = report.to_csv()
        else:
            files["tomography.json"] = json.dumps(report.to_records(), indent=2) + "\n"
        files["tomography.txt"] = report.to_text_table()

    calibration = noise_calibration()
    manifest = {
        "seed": spec.seed,
        "resolved_config": spec_to_mapping(spec),
        "artifact_version": __version__,
        "warnings": warnings_,
        "versions": _versions(),
        "noise_calibration": {
            "reference_erasure_visibility": calibration["erasure_visibility"],
            "reference_counts_per_projection": calibration["counts_per_projection"],
            "target_fidelity": calibration["target_fidelity"],
            "applied_erasure_visibility": spec.tomography.erasure_visibility,
            "applied_counts_per_projection": spec.tomography.counts_per_projection,
        },
        "files": sorted(files) + ["manifest.json"],
    }
    files["manifest.json"] = json.dumps(manifest, indent=2) + "\n"

    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8")
    except OSError as exc:
        log.error("cannot write outputs to %s: %s", out, exc)
        return 3, manifest
    for w in warnings_:
        log.warning(w)
    return 0, manifest


def build_parser():
    p = argparse.ArgumentParser(prog="pwclock", description="Simulate the two-photon emergent-time experiment.")
    p.add_argument("config", help="experiment description (YAML/JSON) or a previous manifest.json")
    p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument("--mode", choices=("observer", "superobserver", "both"), default=None)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        log.error("cannot read %s: %s", args.config, exc)
        return 3
    try:
        spec = parse_spec(text).with_overrides(seed=args.seed, output_dir=args.out, mode=args.mode)
    except SpecError as exc:
        log.error("invalid experiment description: %s", exc)
        return 2
    code, _ = run(spec)
    if code == 0:
        log.info("wrote outputs to %s", spec.output_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
