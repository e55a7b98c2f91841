"""``pitchwarp`` command line.

Exit status: 0 on success, 2 for usage or input errors, 1 for anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .benchmark import ALGORITHMS, align, parse_algo, report_json, report_table, run_benchmark
from .curve import (DEFAULT_HOP_SECONDS, DEFAULT_REF_HZ, HZ, SEMITONE, as_unit,
                    interpolate_unvoiced, load_curve, save_curve, z_normalize)
from .dtw import euclidean_cost, load_path, save_path
from .metrics import DEFAULT_TOLERANCE, paa
from .pitch import F0_MAX, F0_MIN, FRAME_SIZE, HOP_SIZE, VOICING_THRESHOLD, extract_f0, read_wav
from .sadtw import SADTWParams, dump_descriptors, sadtw_cost, shape_descriptors
from .synth import (AmateurParams, CorpusParams, TemplateParams, gen_corpus, load_gt,
                    save_corpus)
from .warp import load_features, save_features, warp_features

# every package error derives from ValueError
INPUT_ERRORS = (ValueError, OSError, KeyError)


class UsageError(Exception):
    pass


def _write_json(obj, fname):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if fname in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(fname).write_text(text, encoding="utf-8")


def _freq_scale(value: str):
    if value == "robust_std":
        return value
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'robust_std' or a positive number") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("fixed scale must be positive")
    return v


# -- extract-f0 ---------------------------------------------------------------


def cmd_extract_f0(args) -> int:
    wav = read_wav(args.wav)
    curve = extract_f0(wav, args.frame_size, args.hop_size, args.f0_min, args.f0_max,
                       args.voicing_threshold)
    save_curve(curve, args.out)
    print(f"{len(curve)} frames, {int(curve.voiced.sum())} voiced -> {args.out}")
    return 0


# -- align --------------------------------------------------------------------


def _sadtw_params(args) -> SADTWParams:
    return SADTWParams(m=args.m, n=args.n, half_width=args.half_width,
                       freq_scale=args.freq_scale)


def cmd_align(args) -> int:
    a = load_curve(args.amateur, hop_seconds=args.hop)
    p = load_curve(args.template, hop_seconds=args.hop)
    a = as_unit(interpolate_unvoiced(a), args.unit, args.ref_hz)
    p = as_unit(interpolate_unvoiced(p), args.unit, args.ref_hz)
    if args.algo == "sadtw":
        options = _sadtw_params(args).as_dict()
    elif args.algo == "ctw":
        options = dict(d=args.ctw_d, lag=args.ctw_lag, k=args.ctw_k, reg=args.ctw_reg,
                       max_iter=args.ctw_max_iter)
    else:
        options = {}
    path = align(args.algo, a, p, band=args.band, **options)
    if args.band is not None:
        path.meta["band"] = args.band
    if args.out:
        save_path(path, args.out)
    else:
        _write_json(path.to_dict(), None)
    if args.cost_image:
        from .plotting import write_pgm
        if args.algo == "sadtw":
            cost = sadtw_cost(a, p, _sadtw_params(args))
        elif args.algo == "dtw":
            cost = euclidean_cost(a, p)
        else:
            cost = euclidean_cost(z_normalize(a), z_normalize(p))
        write_pgm(cost, args.cost_image)
    if args.dump_descriptors:
        params = _sadtw_params(args)
        kw = dict(m=params.m, n=params.n, half_width=params.half_width,
                  freq_scale=params.freq_scale)
        dump_descriptors(shape_descriptors(a, **kw), args.dump_descriptors + ".amateur.json")
        dump_descriptors(shape_descriptors(p, **kw), args.dump_descriptors + ".template.json")
    if args.plot:
        from .plotting import plot_alignment
        gt = load_gt(args.gt) if args.gt else None
        plot_alignment(a, p, path, args.plot, gt_map=gt, title=args.algo.upper())
    print(f"{args.algo}: {len(path)} pairs, total cost {path.total_cost:.6g}", file=sys.stderr)
    return 0


# -- eval ---------------------------------------------------------------------


def cmd_eval(args) -> int:
    path = load_path(args.path)
    gt = load_gt(args.gt)
    score = paa(path, gt, args.tolerance)
    result = {"paa": score, "tolerance_frames": args.tolerance, "n_frames": int(gt.size)}
    print(f"PAA = {score:.2f}% (tolerance {args.tolerance} frames)")
    if args.out:
        _write_json(result, args.out)
    return 0


# -- synth / bench ------------------------------------------------------------


def _corpus(args) -> CorpusParams:
    t = TemplateParams(
        n_notes=args.n_notes,
        note_len_range=(args.note_len_min, args.note_len_max),
        vibrato_depth_st=args.vibrato_depth,
        vibrato_rate_hz=args.vibrato_rate,
        transition_frames=args.transition_frames,
        max_leap_st=args.max_leap,
        hop_seconds=args.hop,
    )
    a = AmateurParams(
        warp_knots=args.warp_knots,
        warp_strength=args.warp_strength,
        offkey_prob=args.offkey_prob,
        offkey_range_st=args.offkey_range,
        jitter_st=args.jitter,
        drift_st=args.drift,
    )
    if args.note_len_min > args.note_len_max or args.note_len_min < 1:
        raise UsageError("need 1 <= --note-len-min <= --note-len-max")
    return CorpusParams(t, a)


def cmd_synth(args) -> int:
    corpus = _corpus(args)
    pairs = gen_corpus(corpus, args.n, args.seed)
    save_corpus(pairs, args.out, corpus, args.seed)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return 0


def cmd_bench(args) -> int:
    algos = [s for s in (x.strip() for x in args.algos.split(";" if ":" in args.algos else ","))
             if s]
    for label in algos:
        parse_algo(label)
    units = [u.strip() for u in args.units.split(",") if u.strip()]
    report = run_benchmark(_corpus(args), args.n, algos, args.tolerance, args.seed, units,
                           threads=args.threads)
    table = report_table(report)
    if args.out:
        Path(args.out).write_text(report_json(report), encoding="utf-8")
        Path(args.out).with_suffix(".txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    if args.plot:
        from .plotting import plot_benchmark
        plot_benchmark(report, args.plot)
    return 0


# -- warp ---------------------------------------------------------------------


def cmd_warp(args) -> int:
    feats = load_features(args.features)
    path = load_path(args.path)
    target = args.target_len if args.target_len is not None else path.shape[1]
    out = warp_features(feats, path, target, mode=args.mode)
    save_features(out, args.out)
    print(f"warped {feats.shape[0]}x{feats.shape[1]} -> {out.shape[0]}x{out.shape[1]}")
    return 0


# -- parser -------------------------------------------------------------------


def _add_corpus_flags(p):
    g = p.add_argument_group("corpus")
    t, a = TemplateParams(), AmateurParams()
    g.add_argument("--n-notes", type=int, default=t.n_notes, help="notes per template")
    g.add_argument("--note-len-min", type=int, default=t.note_len_range[0], help="frames")
    g.add_argument("--note-len-max", type=int, default=t.note_len_range[1], help="frames")
    g.add_argument("--vibrato-depth", type=float, default=t.vibrato_depth_st, help="semitones")
    g.add_argument("--vibrato-rate", type=float, default=t.vibrato_rate_hz, help="Hz")
    g.add_argument("--transition-frames", type=int, default=t.transition_frames,
                   help="note glide length")
    g.add_argument("--max-leap", type=float, default=t.max_leap_st,
                   help="largest interval between consecutive notes, semitones")
    g.add_argument("--hop", type=float, default=t.hop_seconds,
                   help="seconds per frame (default 128/22050)")
    g.add_argument("--warp-knots", type=int, default=a.warp_knots, help="tempo-warp segments")
    g.add_argument("--warp-strength", type=float, default=a.warp_strength,
                   help="max local tempo ratio; <= 1 disables warping")
    g.add_argument("--offkey-prob", type=float, default=a.offkey_prob,
                   help="chance each note is sung off key")
    g.add_argument("--offkey-range", type=float, default=a.offkey_range_st, help="semitones")
    g.add_argument("--jitter", type=float, default=a.jitter_st, help="semitones (std)")
    g.add_argument("--drift", type=float, default=a.drift_st, help="semitones (peak)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="pitchwarp", description="Pitch-curve time warping toolkit.",
                                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-f0", help="YIN F0 track of a 16-bit mono WAV", formatter_class=fmt)
    p.add_argument("wav")
    p.add_argument("-o", "--out", required=True, help="curve file (.json or .csv)")
    p.add_argument("--frame-size", type=int, default=FRAME_SIZE, help="samples")
    p.add_argument("--hop-size", type=int, default=HOP_SIZE, help="samples")
    p.add_argument("--f0-min", type=float, default=F0_MIN, help="Hz")
    p.add_argument("--f0-max", type=float, default=F0_MAX, help="Hz")
    p.add_argument("--voicing-threshold", type=float, default=VOICING_THRESHOLD,
                   help="CMNDF dip needed to call a frame voiced")
    p.set_defaults(func=cmd_extract_f0)

    p = sub.add_parser("align", help="align an amateur curve to a template", formatter_class=fmt)
    p.add_argument("amateur")
    p.add_argument("template")
    p.add_argument("--algo", choices=ALGORITHMS, default="sadtw", help="alignment algorithm")
    p.add_argument("--unit", choices=(HZ, SEMITONE), default=SEMITONE,
                   help="unit the curves are aligned in")
    p.add_argument("--ref-hz", type=float, default=DEFAULT_REF_HZ,
                   help="semitone reference frequency")
    p.add_argument("--hop", type=float, default=DEFAULT_HOP_SECONDS,
                   help="seconds per frame for CSV inputs")
    p.add_argument("--band", type=float, default=None,
                   help="Sakoe-Chiba radius as a fraction of the longer curve")
    defaults = SADTWParams()
    g = p.add_argument_group("sadtw")
    g.add_argument("--m", type=int, default=defaults.m, help="time windows")
    g.add_argument("--n", type=int, default=defaults.n, help="angle sectors")
    g.add_argument("--half-width", type=int, default=defaults.half_width, help="frames")
    g.add_argument("--freq-scale", type=_freq_scale, default=defaults.freq_scale,
                   help="'robust_std' or a fixed positive scale")
    g.add_argument("--dump-descriptors", metavar="PREFIX",
                   help="write descriptor JSON to PREFIX.amateur.json / PREFIX.template.json")
    g = p.add_argument_group("ctw")
    g.add_argument("--ctw-d", type=int, default=5, help="delay-embedding dimension")
    g.add_argument("--ctw-lag", type=int, default=2, help="delay-embedding lag")
    g.add_argument("--ctw-k", type=int, default=2, help="canonical components")
    g.add_argument("--ctw-reg", type=float, default=1e-4, help="ridge on covariances")
    g.add_argument("--ctw-max-iter", type=int, default=20, help="alternation rounds")
    p.add_argument("--out", help="path JSON (stdout if omitted)")
    p.add_argument("--plot", help="figure of curves and warp (.svg, .png, .pdf)")
    p.add_argument("--gt", help="ground-truth map to draw in the plot")
    p.add_argument("--cost-image", help="write the cost matrix as a PGM image")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("eval", help="PAA of a path against a ground-truth map", formatter_class=fmt)
    p.add_argument("path")
    p.add_argument("gt")
    p.add_argument("--tolerance", type=int, default=DEFAULT_TOLERANCE, help="frames")
    p.add_argument("--out", help="result JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic pairs", formatter_class=fmt)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-n", "--n", type=int, default=1, help="number of pairs")
    p.add_argument("--out", required=True, help="output directory")
    _add_corpus_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("warp", help="warp features onto the template timeline",
                       formatter_class=fmt)
    p.add_argument("features", help=".csv rows or binary feature file")
    p.add_argument("path")
    p.add_argument("--out", required=True)
    p.add_argument("--target-len", type=int, default=None,
                   help="template frames (default: from the path)")
    p.add_argument("--mode", choices=("mean", "nearest"), default="mean",
                   help="how to merge amateur frames sharing a template frame")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("bench", help="PAA benchmark on a synthetic corpus", formatter_class=fmt)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-n", "--n", type=int, default=200, help="number of pairs")
    p.add_argument("--algos", default=",".join(ALGORITHMS),
                   help="comma list; use ';' between entries carrying options, "
                        "e.g. 'dtw;sadtw:half_width=16'")
    p.add_argument("--units", default=f"{HZ},{SEMITONE}", help="comma list of curve units")
    p.add_argument("--tolerance", type=int, default=DEFAULT_TOLERANCE, help="frames")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="report JSON; a .txt table is written next to it")
    p.add_argument("--plot", help="bar chart of the summary (.png, .svg, .pdf)")
    _add_corpus_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except INPUT_ERRORS as exc:
        print(f"pitchwarp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"pitchwarp {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
