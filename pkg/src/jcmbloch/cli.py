"""Command line entry point: one subcommand per dataset, one directory per run."""
from __future__ import annotations

import argparse
import shlex
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bloch, diophantine, equidistribution, fluid, spectra, zerocross
from .io import (
    CsvWriter,
    PlotSpec,
    RunManifest,
    default_threads,
    fmt,
    run_directory,
    svg_line,
    svg_scatter,
    svg_vectors,
)
from .precision import with_precision
from .series import ThermalParams


class UsageError(Exception):
    pass


def _exact(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not an exact decimal or rational: {text!r}") from None


def _range(text: str):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"expected lo:hi[:step], got {text!r}")
    return tuple(_exact(p) for p in parts)


def _grid(dt: str, n: int, enforce=False) -> bloch.SampleGrid:
    try:
        return bloch.SampleGrid.parse(dt, n, enforce)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad --dt {dt!r}: {e}") from None


class Run:
    """Collects the outputs of one subcommand into its run directory."""

    def __init__(self, args, header):
        self.args = args
        self.dir = run_directory(args.out)
        self.csv = CsvWriter(self.dir / "data.csv", header)
        self.ctx = with_precision(args.digits)
        self.t0 = time.perf_counter()
        self.extra = {}
        self.terms = "-"

    def finish(self, svg: str | None = None):
        self.csv.close()
        digests = {"data.csv": self.csv.digest}
        if svg is not None and self.args.svg:
            (self.dir / "plot.svg").write_text(svg, encoding="ascii")
        params = {k: v for k, v in sorted(vars(self.args).items())
                  if k not in ("func", "out", "svg", "threads", "argv")}
        man = RunManifest(
            command_line=" ".join(shlex.quote(a) for a in self.args.argv),
            parameters=params, digits=self.args.digits, truncation_terms=self.terms,
            row_count=self.csv.rows, wall_time=time.perf_counter() - self.t0,
            digests=digests, extra=self.extra)
        man.write(self.dir / "manifest")
        return 0


def cmd_trajectory(args) -> int:
    """Continuous trajectory sampled every --step up to --t-max (full precision)."""
    params = ThermalParams(_exact(args.beta), _exact(args.delta_omega), _exact(args.g))
    step = _exact(args.step)
    n = int(_exact(args.t_max) / step)
    grid = bloch.SampleGrid(step.numerator, step.denominator, n)
    s0 = bloch.BlochState(*(_exact(v) for v in args.s0.split(",")))
    run = Run(args, ["t", "sx", "sy", "sz"])
    run.terms = params.n_max(run.ctx) + 1
    xs, zs = [], []
    for t, st in bloch.sample_trajectory(s0, grid, params, run.ctx):
        run.csv.write((t.coeff, st.sx, st.sy, st.sz))
        xs.append(float(st.sx))
        zs.append(float(st.sz))
    return run.finish(svg_line(xs, zs, PlotSpec()))


def _window(text):
    if not text:
        return None
    lo_x, hi_x, lo_z, hi_z = (float(v) for v in text.split(":"))
    return bloch.Viewport(lo_x, hi_x, lo_z, hi_z)


def cmd_scatter(args) -> int:
    """Discrete samples S(n dt), n = 0..N, in the (S_x, S_z) plane."""
    params = ThermalParams(_exact(args.beta))
    grid = _grid(args.dt, args.n)
    win = _window(args.window)
    run = Run(args, ["n", "t", "sx", "sz"])
    run.terms = params.n_max(run.ctx) + 1
    xs, zs = [], []
    if args.fast:
        for js, sx, _, sz in bloch.sample_trajectory_fast(grid, params, win):
            for j, a, c in zip(js, sx, sz):
                run.csv.write((int(j), grid.time(int(j)), float(a), float(c)))
            xs.append(sx)
            zs.append(sz)
        xs = np.concatenate(xs) if xs else np.array([])
        zs = np.concatenate(zs) if zs else np.array([])
    else:
        s0 = bloch.BlochState(1, 0, 0)
        for n, (t, st) in enumerate(bloch.sample_trajectory(s0, grid, params, run.ctx)):
            if win is not None and not win.contains(st.sx, st.sz):
                continue
            run.csv.write((n, t, st.sx, st.sz))
            xs.append(float(st.sx))
            zs.append(float(st.sz))
    spec = PlotSpec(dot_ratio=args.dot_ratio) if win is None else PlotSpec(
        (win.x_lo, win.x_hi), (win.z_lo, win.z_hi), dot_ratio=args.dot_ratio)
    return run.finish(svg_scatter(xs, zs, spec))


def cmd_zerocross(args) -> int:
    """(beta, S_x) at the grid points where |S_z| <= epsilon(beta)."""
    lo, hi, step = _range(args.beta_range)
    run = Run(args, ["beta", "n", "t", "sx", "sz"])
    bs, xs = [], []
    for h in zerocross.scatter_sweep(lo, hi, step, args.dt, _exact(args.scale), run.ctx,
                                     args.threads, args.allow_out_of_range):
        run.csv.write((h.beta, h.n, h.t, h.sx, h.sz))
        bs.append(float(h.beta))
        xs.append(float(h.sx))
    spec = PlotSpec((float(lo), float(hi) if hi > lo else float(lo) + 1), (-1, 1),
                    log_x=True, x_label="beta", y_label="S_x")
    return run.finish(svg_scatter(bs, xs, spec))


def _q_set(name: str):
    if name == "m":
        return diophantine.build_candidate_set()
    if name == "mtilde":
        return diophantine.third_order_filter(diophantine.build_candidate_set())
    return sorted({int(v) for v in name.split(",")})


def cmd_qpi(args) -> int:
    """(beta, q, S_x(q pi), S_z(q pi)) over a q set and a beta grid."""
    lo, hi, step = _range(args.beta_range)
    qs = _q_set(args.set)
    run = Run(args, ["beta", "q", "sx", "sz"])
    bs, xs = [], []
    for r in zerocross.qpi_scan(qs, lo, hi, step, run.ctx):
        run.csv.write((r.beta, r.q, r.sx, r.sz))
        bs.append(float(r.beta))
        xs.append(float(r.sx))
    run.extra["q_count"] = len(qs)
    spec = PlotSpec((float(lo), float(hi) if hi > lo else float(lo) + 1), (-1, 1),
                    log_x=True, x_label="beta", y_label="S_x")
    return run.finish(svg_scatter(bs, xs, spec))


def cmd_fluid(args) -> int:
    """Normalised velocity or force arrows on the unit disc of the xz-plane."""
    params = ThermalParams(_exact(args.beta))
    run = Run(args, ["x", "z", "u", "w"])
    rows = fluid.xz_vector_grid(_exact(args.t), params, run.ctx, args.grid, args.field)
    run.csv.write_many(rows)
    return run.finish(svg_vectors(rows, PlotSpec(x_label="x", y_label="z")))


def cmd_weyl(args) -> int:
    """Weyl sums (1/(N+1)) sum exp(i m n dt) for m = 1..m_max, with the closed-form bound."""
    grid = _grid(args.dt, args.n)
    run = Run(args, ["m", "magnitude", "phase", "bound"])
    for m in range(1, args.m_max + 1):
        w = equidistribution.weyl_sum(m, grid, run.ctx)
        run.csv.write((m, w.magnitude, w.phase, equidistribution.weyl_bound(m, grid, run.ctx)))
    return run.finish(None)


def cmd_spectrum(args) -> int:
    """Transient spectrum S(w) on a uniform frequency grid, with detected peaks."""
    lo, hi, step = _range(args.omega_range)
    k = int((hi - lo) / step)
    sp = spectra.SpectrumParams(_exact(args.gamma), _exact(args.T), _exact(args.beta))
    run = Run(args, ["omega", "value"])
    omegas = [lo + i * step for i in range(k + 1)]
    if args.hp:
        vals = [spectra.spectrum_closed(w, sp, run.ctx) for w in omegas]
    else:
        vals = list(spectra.spectrum_grid([float(w) for w in omegas], sp.Gamma, sp.T, sp.beta))
    for w, v in zip(omegas, vals):
        run.csv.write((w, v))
    peaks = spectra.find_peaks(list(zip(omegas, vals)))
    run.extra["peaks"] = " ".join(f"{p:.6f}" for p in peaks)
    print("peaks: " + run.extra["peaks"])
    fv = [float(v) for v in vals]
    top = max(fv) if fv else 1.0
    spec = PlotSpec((float(lo), float(hi)), (0.0, top * 1.05 or 1.0),
                    x_label="omega", y_label="S")
    return run.finish(svg_line([float(w) for w in omegas], fv, spec))


def cmd_dft(args) -> int:
    """Discrete Fourier coefficients c_k of the sampled fluorescence (closed form)."""
    grid = _grid(args.dt, args.n)
    ks = range(args.n) if not args.k_range else range(*(int(v) for v in args.k_range.split(":")))
    run = Run(args, ["k", "re", "im", "abs"])
    xs, ys = [], []
    for k in ks:
        c = spectra.dft_closed(k, grid.dt, args.n, _exact(args.beta), ctx=run.ctx)
        run.csv.write((k, c.real, c.imag, abs(c)))
        xs.append(k)
        ys.append(float(abs(c)))
    top = max(ys) if ys else 1.0
    spec = PlotSpec((0, max(args.n - 1, 1)), (0, top * 1.05 or 1.0), x_label="k", y_label="|c_k|")
    return run.finish(svg_line(xs, ys, spec))


def cmd_histogram(args) -> int:
    """Value histograms of a sampled function on two grids and their KS distance."""
    beta = _exact(args.beta)
    dt_a, dt_b = _grid(args.dt_a, 1).dt, _grid(args.dt_b, 1).dt
    a = equidistribution.sampled_values(args.function, dt_a, args.n, beta)
    b = equidistribution.sampled_values(args.function, dt_b, args.n, beta)
    w = float(_exact(args.bin))
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    lo = np.floor(lo / w) * w
    hi = np.ceil(hi / w) * w + w
    ha = equidistribution.histogram(a, lo, hi, w)
    hb = equidistribution.histogram(b, lo, hi, w)
    ks = equidistribution.ks_binned(a, b, w)
    run = Run(args, ["bin_lo", "bin_hi", "count_a", "count_b"])
    for (e0, e1, ca), (_, _, cb) in zip(ha.rows(), hb.rows()):
        run.csv.write((e0, e1, ca, cb))
    run.extra["ks"] = fmt(ks, 6)
    print(f"KS distance = {ks:.6f} (threshold {equidistribution.KS_THRESHOLD})")
    centers = (ha.edges[:-1] + ha.edges[1:]) / 2
    top = float(max(ha.counts.max(), hb.counts.max()))
    spec = PlotSpec((float(lo), float(hi)), (0, top * 1.05 or 1.0), x_label="value",
                    y_label="count")
    return run.finish(svg_line(centers, ha.counts, spec))


def cmd_diophantine(args) -> int:
    """Convergent table of sqrt(2)/k with approximation errors."""
    ks = [int(v) for v in args.alpha.split(",")]
    run = Run(args, ["alpha_label", "index", "p", "q", "err_decimal"])
    for k, c in diophantine.candidate_convergents(ks, args.min_index, args.digit_cap):
        alpha = diophantine.sqrt2_over(k)
        q = diophantine.quality(alpha, c, run.ctx)
        run.csv.write((diophantine.ALPHA_LABELS.get(k, f"sqrt2/{k}"), c.index, c.p, c.q, q.err))
    if args.filter_beta:
        M = diophantine.build_candidate_set(ks, args.min_index, args.digit_cap)
        mt = diophantine.third_order_filter(M, _exact(args.filter_beta), _exact(args.threshold))
        run.extra["M_size"] = len(M)
        run.extra["Mtilde"] = " ".join(str(q) for q in mt)
        print("M~ = {" + ", ".join(str(q) for q in mt) + "}")
    return run.finish(None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jcmbloch", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=func.__doc__)
        sp.add_argument("--out", default=None, help="run directory (default runs/<command>)")
        sp.add_argument("--svg", action="store_true", help="also write plot.svg")
        sp.add_argument("--digits", type=int, default=50, help="working decimal digits")
        sp.add_argument("--threads", type=int, default=default_threads(),
                        help="worker threads (default JCMBLOCH_THREADS or 1)")
        sp.set_defaults(func=func)
        return sp

    sp = add("trajectory", cmd_trajectory, "continuous Bloch trajectory")
    sp.add_argument("--beta", default="1.0")
    sp.add_argument("--t-max", default="30")
    sp.add_argument("--step", default="1/100")
    sp.add_argument("--delta-omega", default="0")
    sp.add_argument("--g", default="1")
    sp.add_argument("--s0", default="1,0,0", help="initial Bloch vector x,y,z")

    sp = add("scatter", cmd_scatter, "discrete-time samples")
    sp.add_argument("--beta", default="1.0")
    sp.add_argument("--dt", default="7/2")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--window", default=None, help="x_lo:x_hi:z_lo:z_hi")
    sp.add_argument("--dot-ratio", type=float, default=1e-3)
    sp.add_argument("--fast", action="store_true", help="double-precision path")

    sp = add("zerocross", cmd_zerocross, "near-zeros of S_z over a beta grid")
    sp.add_argument("--beta-range", default="4.0:5.0:0.1")
    sp.add_argument("--dt", default="7/2")
    sp.add_argument("--scale", default="1")
    sp.add_argument("--allow-out-of-range", action="store_true")

    sp = add("qpi", cmd_qpi, "S_x(q pi) over a candidate set")
    sp.add_argument("--set", default="mtilde", help="m, mtilde or a comma list of q")
    sp.add_argument("--beta-range", default="1.0:2.5:0.01")

    sp = add("fluid", cmd_fluid, "velocity or force field arrows")
    sp.add_argument("--beta", default="1.0")
    sp.add_argument("--t", default="1")
    sp.add_argument("--grid", type=int, default=21)
    sp.add_argument("--field", choices=("velocity", "force"), default="velocity")

    sp = add("weyl", cmd_weyl, "Weyl sums on a time grid")
    sp.add_argument("--dt", default="7/2")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--m-max", type=int, default=5)

    sp = add("spectrum", cmd_spectrum, "transient spectrum and peaks")
    sp.add_argument("--beta", default="2.0")
    sp.add_argument("--gamma", default="0.01")
    sp.add_argument("--T", default="100")
    sp.add_argument("--omega-range", default="0:3.5:0.001")
    sp.add_argument("--hp", action="store_true", help="full-precision closed form")

    sp = add("dft", cmd_dft, "discrete Fourier coefficients")
    sp.add_argument("--beta", default="1.0")
    sp.add_argument("--dt", default="7/2")
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--k-range", default=None, help="k_lo:k_hi")

    sp = add("histogram", cmd_histogram, "value histograms on two grids")
    sp.add_argument("--beta", default="1.0")
    sp.add_argument("--dt-a", default="7/2")
    sp.add_argument("--dt-b", default="9/2")
    sp.add_argument("--n", type=int, default=500000)
    sp.add_argument("--bin", default="0.0025")
    sp.add_argument("--function", choices=equidistribution.SAMPLED_FUNCTIONS,
                    default="fluorescence")

    sp = add("diophantine", cmd_diophantine, "convergent tables and candidate sets")
    sp.add_argument("--alpha", default="1,2,3,4", help="k values for sqrt(2)/k")
    sp.add_argument("--min-index", type=int, default=12)
    sp.add_argument("--digit-cap", type=int, default=15)
    sp.add_argument("--filter-beta", default=None, help="also print the filtered set")
    sp.add_argument("--threshold", default="0.002")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["jcmbloch"] + argv
    if args.out is None:
        args.out = str(Path("runs") / args.command)
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (ArithmeticError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
