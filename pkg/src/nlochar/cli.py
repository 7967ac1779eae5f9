"""Command-line entry point.

Subcommands: ``synthesize`` (write a ground-truth channel file),
``characterize`` (run the two-stage protocol and write a result file),
``analyze`` (emit decomposition tables from a channel/result file), and
``verify`` (compare a result against a truth file).

Exit codes: 0 success, 1 verification failure, 2 input error,
3 convergence failure. The environment variable NLOCHAR_THREADS caps the
BLAS thread count; it must be read before numpy is imported, so the
heavy modules are imported lazily inside main().
"""

import argparse
import os
import sys


def _apply_thread_limit() -> None:
    threads = os.environ.get("NLOCHAR_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlochar",
        description="Simulate, characterize, and analyze multimode Gaussian channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synthesize", help="build a ground-truth channel file")
    synth.add_argument("--config", required=True, help="experiment config (JSON)")
    synth.add_argument("--out", default=".", help="output directory")

    char = sub.add_parser("characterize", help="run the two-stage probe protocol")
    char.add_argument("--config", required=True, help="experiment config (JSON)")
    char.add_argument("--seed", type=int, default=None, help="override the config seed")
    char.add_argument("--shots", type=int, default=None, help="override both stage shot counts")
    char.add_argument("--out", default=".", help="output directory")
    char.add_argument(
        "--emit-figures", action="store_true", help="also write analysis tables"
    )

    ana = sub.add_parser("analyze", help="decompose a channel or result file")
    ana.add_argument("--result", required=True, help="channel or result file (JSON)")
    ana.add_argument("--out", default=".", help="output directory")
    ana.add_argument(
        "--ppt-partition",
        action="append",
        default=None,
        help="comma-separated transposed mode indices (repeatable); "
        "defaults to the mirror pairs (m, M-1-m)",
    )

    ver = sub.add_parser("verify", help="compare a result file against a truth file")
    ver.add_argument("--result", required=True)
    ver.add_argument("--truth", required=True)
    ver.add_argument("--tol-amp", type=float, default=0.02, help="max-abs tolerance on A")
    ver.add_argument("--tol-noise", type=float, default=0.05, help="max-abs tolerance on N")
    return parser


def _cmd_synthesize(args) -> int:
    from . import serialization as ser
    from .core import physicality_margin

    config = ser.read_json(args.config)
    channel = ser.build_channel_from_spec(config.get("channel", {}))
    margin = physicality_margin(channel)
    out_dir = _ensure_dir(args.out)
    name = config.get("outputs", {}).get("channel", "channel.json")
    path = os.path.join(out_dir, name)
    ser.write_json(path, ser.channel_to_dict(channel))
    print(f"wrote {path}")
    print(f"physicality margin: {margin:.6e}")
    if margin < -1e-9:
        print(
            f"warning: channel is unphysical (margin {margin:.3e} < 0)", file=sys.stderr
        )
    return 0


def _cmd_characterize(args) -> int:
    from . import serialization as ser
    from .characterization import characterize

    config = ser.read_json(args.config)
    channel = ser.build_channel_from_spec(config.get("channel", {}))
    protocol = ser.protocol_from_config(config)
    if args.seed is not None:
        protocol.seed = args.seed
    if args.shots is not None:
        if args.shots < 1:
            raise ser.ConfigError("--shots", "must be >= 1")
        protocol.shots_mean_stage = args.shots
        protocol.shots_vacuum_stage = args.shots

    result = characterize(channel, protocol)

    out_dir = _ensure_dir(args.out)
    name = config.get("outputs", {}).get("result", "result.json")
    path = os.path.join(out_dir, name)
    protocol_block = {
        "q_amplitude": protocol.q_amplitude,
        "seed": protocol.seed,
        "shots_mean_stage": protocol.shots_mean_stage,
        "shots_vacuum_stage": protocol.shots_vacuum_stage,
    }
    ser.write_json(path, ser.result_to_dict(result, protocol_block))
    print(f"wrote {path}")
    print(
        f"converged: {result.converged} after {result.iterations} iterations, "
        f"margin {result.margin:.3e}, loglik {result.loglik:.6g}"
    )
    if args.emit_figures or config.get("outputs", {}).get("emit_figures", False):
        _write_analysis_tables(result.channel(), out_dir, None)
    if not result.converged:
        print("error: noise MLE did not converge", file=sys.stderr)
        return 3
    return 0


def _parse_partitions(raw, modes: int):
    from . import serialization as ser

    if raw is None:
        # mirror pairs (m, M-1-m); the middle mode of an odd count has no partner
        return [[m] for m in range((modes + 1) // 2, modes)]
    partitions = []
    for item in raw:
        try:
            subset = sorted(int(tok) for tok in item.split(","))
        except ValueError as exc:
            raise ser.ConfigError("--ppt-partition", f"bad subset {item!r}") from exc
        partitions.append(subset)
    return partitions


def _write_analysis_tables(channel, out_dir: str, partitions) -> None:
    import numpy as np

    from . import serialization as ser
    from .analysis import noise_eigendecomposition, svd_channel, to_amplitude_phase
    from .core import apply_channel, ppt_min_eigenvalue, reduced_covariance, vacuum_state

    analysis = svd_channel(channel.amp)
    modes = channel.modes
    if partitions is None:
        partitions = _parse_partitions(None, modes)

    def phase_table(matrix):
        rows = []
        for m in range(matrix.shape[1]):
            view = to_amplitude_phase(matrix[:, m])
            rows.append(
                {
                    "index": m,
                    "amplitudes": view.amplitudes.tolist(),
                    "phases": view.phases.tolist(),
                }
            )
        return rows

    ser.write_json(
        os.path.join(out_dir, "singular_values.json"),
        {"singular_values": analysis.d.tolist()},
    )
    ser.write_json(
        os.path.join(out_dir, "eigenquadratures_input.json"),
        {"eigenquadratures": phase_table(analysis.v)},
    )
    ser.write_json(
        os.path.join(out_dir, "eigenquadratures_output.json"),
        {"eigenquadratures": phase_table(analysis.u)},
    )
    evals, evecs = noise_eigendecomposition(channel.noise)
    ser.write_json(
        os.path.join(out_dir, "noise_eigendecomposition.json"),
        {"eigenvalues": evals.tolist(), "eigenvectors": evecs.tolist()},
    )
    output = apply_channel(channel, vacuum_state(modes))
    ppt_rows = []
    for subset in partitions:
        if len(subset) == 1 and subset[0] != modes - 1 - subset[0]:
            # singleton: evaluate on the reduced state of its mirror pair
            m = subset[0]
            partner = modes - 1 - m
            pair_cov = reduced_covariance(output.cov, [partner, m])
            value = ppt_min_eigenvalue(pair_cov, [1])
            ppt_rows.append({"transposed_modes": [m], "pair": [partner, m], "value": value})
        else:
            value = ppt_min_eigenvalue(output.cov, subset)
            ppt_rows.append({"transposed_modes": subset, "value": value})
    ser.write_json(
        os.path.join(out_dir, "ppt_eigenvalues.json"), {"vacuum_output": ppt_rows}
    )


def _cmd_analyze(args) -> int:
    from . import serialization as ser

    data = ser.read_json(args.result)
    channel, _ = ser.result_from_dict(data)
    out_dir = _ensure_dir(args.out)
    partitions = _parse_partitions(args.ppt_partition, channel.modes)
    _write_analysis_tables(channel, out_dir, partitions)
    print(f"wrote analysis tables to {out_dir}")
    return 0


def _cmd_verify(args) -> int:
    import numpy as np

    from . import serialization as ser
    from .analysis import degenerate_groups, subspace_overlap, svd_channel
    from .core import physicality_margin

    est, _ = ser.result_from_dict(ser.read_json(args.result), "result")
    truth, _ = ser.result_from_dict(ser.read_json(args.truth), "truth")
    if est.modes != truth.modes:
        raise ser.ConfigError("result/truth", "mode counts differ")

    amp_err = float(np.max(np.abs(est.amp - truth.amp)))
    noise_err = float(np.max(np.abs(est.noise - truth.noise)))
    print(f"max|A_hat - A*|: {amp_err:.6e} (tolerance {args.tol_amp})")
    print(f"max|N_hat - N*|: {noise_err:.6e} (tolerance {args.tol_noise})")
    print(f"margin estimate: {physicality_margin(est):.3e}")
    print(f"margin truth:    {physicality_margin(truth):.3e}")

    ana_est = svd_channel(est.amp)
    ana_true = svd_channel(truth.amp)
    groups = degenerate_groups(ana_true.d)
    group_of = {int(m): g for g in groups for m in g}
    print("m  d_true      d_est       v_overlap^2  u_overlap^2")
    for m in range(2 * truth.modes):
        g = group_of[m]
        v_ov = subspace_overlap(ana_est.v[:, g], ana_true.v[:, m])
        u_ov = subspace_overlap(ana_est.u[:, g], ana_true.u[:, m])
        print(
            f"{m:<2d} {ana_true.d[m]:<11.6f} {ana_est.d[m]:<11.6f} "
            f"{v_ov:<12.6f} {u_ov:<12.6f}"
        )
    if amp_err <= args.tol_amp and noise_err <= args.tol_noise:
        print("verification: PASS")
        return 0
    print("verification: FAIL", file=sys.stderr)
    return 1


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def main(argv=None) -> int:
    _apply_thread_limit()
    parser = build_parser()
    args = parser.parse_args(argv)
    from .serialization import ConfigError

    handlers = {
        "synthesize": _cmd_synthesize,
        "characterize": _cmd_characterize,
        "analyze": _cmd_analyze,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
