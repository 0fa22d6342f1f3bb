"""Command-line front end: simulate, reduce, scan, cluster, evaluate.

Every subcommand prints a plain ``key=value`` report that echoes the
effective configuration. Exit codes: 0 success, 1 runtime failure,
2 usage error (bad or missing flags, out-of-domain values).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import constants as C
from . import io
from .baselines import KMeansConfig, kmeans, kmeans_plus
from .datagen import ImageSimSpec, MixtureSpec, gen_images, gen_mixture, gen_toy
from .gammasup import GammaSupConfig, gamma_nonblurring, gamma_sup, gamma_sup_plus
from .metrics import LabelPair, c_impurity, confusion, impurity, purity_number
from .reduce import mpca_fit, mpca_project, pca_fit_project
from .tuning import default_grid, scan_tau


class UsageError(Exception):
    """Flag values that parse but are out of domain."""


def _report(pairs: dict, out=None) -> None:
    out = out or sys.stdout
    for key, value in pairs.items():
        if isinstance(value, float):
            value = repr(value)
        elif value is None:
            value = "none"
        elif isinstance(value, bool):
            value = str(value).lower()
        print(f"{key}={value}", file=out)


def _sidecar(out: str, tag: str) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}.{tag}.txt"))


def _usage(fn, *args, **kw):
    """Call a constructor, turning domain errors into usage errors."""
    try:
        return fn(*args, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# simulate

def cmd_simulate(a) -> dict:
    labels_out = a.labels_out or _sidecar(a.out, "labels")
    report = {"command": "simulate", "kind": a.kind, "seed": a.seed, "out": a.out, "labels_out": labels_out}
    if a.kind == "mixture":
        spec = _usage(MixtureSpec, c=a.c, pi0=a.pi0, n=a.n, seed=a.seed)
        x, labels = gen_mixture(spec)
        io.write_matrix(a.out, x)
        report.update(c=spec.c, pi0=spec.pi0, n=spec.n)
    elif a.kind == "toy":
        x, labels = gen_toy(a.seed)
        io.write_matrix(a.out, x)
        report.update(n=len(x))
    else:
        spec = _usage(
            ImageSimSpec,
            n_templates=a.n_templates,
            image_side=a.side,
            n_images=a.n,
            sigma_eps=a.sigma_eps,
            misalign_frac=a.misalign_frac,
            seed=a.seed,
        )
        imgs = gen_images(spec)
        if io.is_csv(a.out):
            io.write_csv(a.out, imgs.data)
        else:
            io.write_images(a.out, imgs.images)
        labels = imgs.labels
        mask_out = a.mask_out or _sidecar(a.out, "mask")
        io.write_labels(mask_out, imgs.misaligned.astype(int))
        report.update(
            n=spec.n_images,
            n_templates=spec.n_templates,
            side=spec.image_side,
            sigma_eps=spec.sigma_eps,
            misalign_frac=spec.misalign_frac,
            n_misaligned=int(imgs.misaligned.sum()),
            mask_out=mask_out,
            snr=imgs.snr,
        )
    io.write_labels(labels_out, labels)
    return report


# cluster

_STOCHASTIC = {"kmeans", "kmeans-plus", "gsup-plus"}


def _gsup_config(a) -> GammaSupConfig:
    if a.tau is None:
        raise UsageError(f"--tau is required for {a.method}")
    return _usage(
        GammaSupConfig.make,
        a.tau,
        s=a.s,
        conv_eps=a.conv_eps,
        merge_eps=a.merge_eps,
        max_iter=a.max_iter,
        threads=a.threads,
    )


def cmd_cluster(a) -> dict:
    if a.method in _STOCHASTIC and a.seed is None:
        raise UsageError(f"--seed is required for {a.method}")
    report = {"command": "cluster", "method": a.method, "data": a.data}
    if a.method.startswith("gsup"):
        cfg = _gsup_config(a)
        report.update(
            s=cfg.params.s, tau=cfg.params.tau, conv_eps=cfg.conv_eps, merge_eps=cfg.merge_eps,
            max_iter=cfg.max_iter, threads=cfg.threads,
        )
        x = io.read_matrix(a.data)
        if a.method == "gsup":
            res = gamma_sup(x, cfg)
        elif a.method == "gsup-nb":
            res = gamma_nonblurring(x, cfg)
        else:
            if a.size_threshold < 2:
                raise UsageError("--size-threshold must be >= 2")
            report.update(size_threshold=a.size_threshold, seed=a.seed)
            res = gamma_sup_plus(x, cfg, size_threshold=a.size_threshold, seed=a.seed)
    else:
        if a.k is None:
            raise UsageError(f"--k is required for {a.method}")
        kc = _usage(KMeansConfig, k=a.k, n_init=a.n_init, seed=a.seed, dismiss_threshold=a.dismiss)
        report.update(k=kc.k, n_init=kc.n_init, seed=kc.seed)
        if a.method == "kmeans-plus":
            report.update(dismiss=kc.dismiss_threshold)
        x = io.read_matrix(a.data)
        res = (kmeans if a.method == "kmeans" else kmeans_plus)(x, kc)
    if a.labels_out:
        io.write_labels(a.labels_out, res.labels)
    if a.centers_out:
        io.write_matrix(a.centers_out, res.centers)
    report.update(
        n=len(res.labels), K=res.k, iterations=res.iterations, converged=res.converged,
        largest=int(res.sizes.max()), labels_out=a.labels_out, centers_out=a.centers_out,
    )
    if res.wcss is not None:
        report["wcss"] = res.wcss
    return report


# scan

def _parse_taus(text: str) -> np.ndarray:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts:
        raise UsageError("--taus is empty")
    try:
        return np.array([float(t) for t in parts])
    except ValueError as exc:
        raise UsageError(f"--taus: {exc}") from exc


def cmd_scan(a) -> dict:
    if a.grid_points < 1:
        raise UsageError("--grid-points must be >= 1")
    if not a.s > 0:
        raise UsageError("--s must be positive")
    x = io.read_matrix(a.data)
    taus = _parse_taus(a.taus) if a.taus is not None else default_grid(x, a.grid_points)
    base = _usage(GammaSupConfig.make, 1.0, s=a.s, conv_eps=a.conv_eps, merge_eps=a.merge_eps, max_iter=a.max_iter)
    try:
        res = scan_tau(x, taus, s=a.s, base=base, workers=a.threads, min_size=a.min_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    Path(a.out).write_text("tau,K\n" + "".join(f"{float(t)!r},{int(k)}\n" for t, k in zip(res.taus, res.counts)))
    plateau = res.plateau
    return {
        "command": "scan", "data": a.data, "s": a.s, "conv_eps": a.conv_eps, "merge_eps": a.merge_eps,
        "max_iter": a.max_iter, "min_size": a.min_size, "threads": a.threads, "grid": len(taus),
        "n": res.n, "out": a.out, "transition_tau": res.transition_tau,
        "plateau_K": None if plateau is None else plateau[2],
        "plateau_len": None if plateau is None else plateau[1] - plateau[0],
        "recommended_tau": res.recommended_tau, "stable_tau": res.stable_tau,
    }


# evaluate

def cmd_evaluate(a) -> dict:
    truth = io.read_labels(a.truth)
    pred = io.read_labels(a.pred)
    pair = LabelPair(truth, pred)
    m = confusion(pair)
    return {
        "command": "evaluate", "purity": purity_number(pair), "impurity": impurity(pair),
        "c_impurity": c_impurity(pair), "n": pair.n, "K_true": m.shape[0], "K_pred": m.shape[1],
    }


# reduce

def cmd_reduce(a) -> dict:
    report = {"command": "reduce", "method": a.method, "data": a.data, "out": a.out}
    if a.method == "mpca":
        if a.r1 is None or a.r2 is None:
            raise UsageError("--r1 and --r2 are required for mpca")
        images = io.read_images(a.data)
        model = _usage(mpca_fit, images, a.r1, a.r2, n_sweeps=a.sweeps)
        z = mpca_project(model, images)
        if a.model_out:
            io.write_mpca(a.model_out, model)
        report.update(r1=a.r1, r2=a.r2, sweeps=a.sweeps, mpca_error=model.errors[-1], model_out=a.model_out)
    else:
        if a.rank is None:
            raise UsageError("--rank is required for pca")
        z = io.read_matrix(a.data)
    if a.rank is not None:
        pca = _usage(pca_fit_project, z, a.rank, correlation=a.correlation)
        z = pca.scores
        report.update(rank=a.rank, correlation=a.correlation, explained=float(pca.explained_ratio.sum()))
    io.write_matrix(a.out, z)
    report.update(n=z.shape[0], p=z.shape[1])
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsup", description="gamma-SUP clustering toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a seeded synthetic dataset")
    sim.add_argument("kind", choices=["mixture", "toy", "images"])
    sim.add_argument("--out", required=True, help="data matrix (.csv or raw; images default to raw stacks)")
    sim.add_argument("--labels-out")
    sim.add_argument("--mask-out", help="misalignment mask (images only)")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--c", type=float, default=4.0)
    sim.add_argument("--pi0", type=float, default=0.8)
    sim.add_argument("--n", type=int, help="points (mixture, default 100) or images (default 800)")
    sim.add_argument("--n-templates", type=int, default=16)
    sim.add_argument("--side", type=int, default=16)
    sim.add_argument("--sigma-eps", type=float, default=40.0)
    sim.add_argument("--misalign-frac", type=float, default=0.1)
    sim.set_defaults(func=cmd_simulate)

    cl = sub.add_parser("cluster", help="cluster a data matrix")
    cl.add_argument("method", choices=["gsup", "gsup-nb", "gsup-plus", "kmeans", "kmeans-plus"])
    cl.add_argument("data")
    cl.add_argument("--s", type=float, default=C.DEFAULT_S)
    cl.add_argument("--tau", type=float)
    cl.add_argument("--conv-eps", type=float, default=C.CONV_EPS)
    cl.add_argument("--merge-eps", type=float, default=C.MERGE_EPS)
    cl.add_argument("--max-iter", type=int, default=C.MAX_ITER)
    cl.add_argument("--k", type=int)
    cl.add_argument("--n-init", type=int, default=C.KMEANS_N_INIT)
    cl.add_argument("--seed", type=int)
    cl.add_argument("--dismiss", type=int, default=C.CL2D_DISMISS)
    cl.add_argument("--size-threshold", type=int, default=C.PLUS_SIZE_THRESHOLD)
    cl.add_argument("--threads", type=int, default=1)
    cl.add_argument("--labels-out")
    cl.add_argument("--centers-out")
    cl.set_defaults(func=cmd_cluster)

    sc = sub.add_parser("scan", help="cluster count over a tau grid")
    sc.add_argument("data")
    sc.add_argument("--out", required=True, help="two-column csv tau,K")
    sc.add_argument("--s", type=float, default=C.DEFAULT_S)
    sc.add_argument("--taus", help="comma-separated ascending grid (default: automatic log grid)")
    sc.add_argument("--grid-points", type=int, default=C.DEFAULT_GRID_POINTS)
    sc.add_argument("--min-size", type=int, default=1, help="clusters smaller than this are ignored when seeking the plateau")
    sc.add_argument("--conv-eps", type=float, default=C.CONV_EPS)
    sc.add_argument("--merge-eps", type=float, default=C.MERGE_EPS)
    sc.add_argument("--max-iter", type=int, default=C.MAX_ITER)
    sc.add_argument("--threads", type=int, default=1)
    sc.set_defaults(func=cmd_scan)

    ev = sub.add_parser("evaluate", help="purity and impurity counts")
    ev.add_argument("truth")
    ev.add_argument("pred")
    ev.set_defaults(func=cmd_evaluate)

    rd = sub.add_parser("reduce", help="PCA or MPCA+PCA dimension reduction")
    rd.add_argument("data")
    rd.add_argument("--method", choices=["pca", "mpca"], default="pca")
    rd.add_argument("--out", required=True)
    rd.add_argument("--rank", type=int, help="PCA rank (after MPCA when both are given)")
    rd.add_argument("--correlation", action="store_true")
    rd.add_argument("--r1", type=int)
    rd.add_argument("--r2", type=int)
    rd.add_argument("--sweeps", type=int, default=C.MPCA_SWEEPS)
    rd.add_argument("--model-out")
    rd.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.command == "simulate" and a.n is None:
        a.n = 800 if a.kind == "images" else 100
    if getattr(a, "threads", 1) < 1:
        print("gsup: error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        report = a.func(a)
    except UsageError as exc:
        print(f"gsup: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"gsup: failed: {exc}", file=sys.stderr)
        return 1
    _report(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
