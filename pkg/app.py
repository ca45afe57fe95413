"""
Command-line entry point.

    python app.py present --key 00000000000000000000 --pt 0000000000000000
    python app.py sim-energy --freq-mhz 5,10,12.5,25,50 --out sweep.csv
    python app.py gen-traces --family cmos --traces 5120 --out cmos.amtj
    python app.py cpa --traces cmos.amtj --json cpa.json
    python app.py metrics

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
import argparse
import logging
import os
import sys

from config import (
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_MTD_STEP,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_SAMPLES_PER_PERIOD,
    FAMILIES,
    MIN_SAMPLES_PER_PERIOD,
    SWEEP_FREQUENCIES_MHZ,
    TOOL_NAME,
    TOOL_VERSION,
    WORKERS,
    RunConfig,
    setup_logging,
)
from energy_model import energy_sweep
from present_cipher import (
    format_key,
    format_state,
    parse_key_hex,
    parse_state_hex,
    present_encrypt,
    round1_targets,
)
from reports import build_report, emit_cpa_plots, emit_energy_sweep, energy_sweep_figure, write_svg
from sca_cpa import HypothesisKind, HypothesisModel, cpa_full, guess_evolution, mtd, prefix_evolution
from trace_io import export_csv, read_trace_file, write_trace_file
from trace_lab import family_cfg, gen_trace_set, random_key
from uniformity import compare_sbox_uniformity

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command-line input detected before any work is done"""


def _freq_list(text):
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of MHz values: {text!r}")
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("frequencies must be positive MHz values")
    return values


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _samples_per_period(text):
    value = _positive_int(text)
    if value < MIN_SAMPLES_PER_PERIOD:
        raise argparse.ArgumentTypeError(f"must be at least {MIN_SAMPLES_PER_PERIOD}, got {value}")
    return value


def _non_negative_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return value


def _nibble(text):
    try:
        value = int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex nibble: {text!r}")
    if not 0 <= value <= 0xF:
        raise argparse.ArgumentTypeError(f"nibble must lie in 0..F, got {text!r}")
    return value


def _hex_type(parser_fn, what):
    def parse(text):
        try:
            return parser_fn(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid {what}: {e}")
    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Energy and side-channel workbench for CMOS vs adiabatic-MTJ PRESENT-80",
    )
    parser.add_argument('--version', action='version', version=f"{TOOL_NAME} {TOOL_VERSION}")
    parser.add_argument('--log-level', default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest='command', required=True, metavar='command')

    p = sub.add_parser('present', help="encrypt one block or print round-1 S-box targets")
    p.add_argument('--key', required=True, type=_hex_type(parse_key_hex, "key"), help="20 hex characters")
    p.add_argument('--pt', required=True, type=_hex_type(parse_state_hex, "plaintext"), help="16 hex characters")
    p.add_argument('--encrypt', action='store_true', help="print the ciphertext (default)")
    p.add_argument('--targets', action='store_true', help="print round-1 S-box inputs and outputs")
    p.add_argument('--rounds', type=int, default=31, choices=range(1, 32), metavar='1..31')

    p = sub.add_parser('sim-energy', help="energy per cycle sweep for both families")
    p.add_argument('--family', choices=list(FAMILIES) + ['both'], default='both')
    p.add_argument('--freq-mhz', type=_freq_list, default=list(SWEEP_FREQUENCIES_MHZ))
    p.add_argument('--out', help="CSV output path")
    p.add_argument('--svg', help="SVG chart output path")
    p.add_argument('--report', help="JSON report output path")

    p = sub.add_parser('gen-traces', help="synthesize a trace set")
    p.add_argument('--family', choices=list(FAMILIES), required=True)
    p.add_argument('--traces', type=_positive_int, required=True, help="number of traces")
    p.add_argument('--freq-mhz', type=_freq_list, default=[DEFAULT_FREQUENCY_HZ / 1e6])
    p.add_argument('--samples-per-period', type=_samples_per_period, default=DEFAULT_SAMPLES_PER_PERIOD)
    p.add_argument('--seed', type=_seed, default=0)
    p.add_argument('--key', type=_hex_type(parse_key_hex, "key"), default=None,
                   help="80-bit key as 20 hex characters (default: derived from the seed)")
    p.add_argument('--noise-sigma', type=_non_negative_float, default=DEFAULT_NOISE_SIGMA,
                   help="Gaussian noise per sample, amperes")
    p.add_argument('--blind', action='store_true', help="do not store the key in the trace file")
    p.add_argument('--out', required=True, help="trace file output path")
    p.add_argument('--csv', help="also export the traces as CSV")

    p = sub.add_parser('cpa', help="correlation power analysis on a trace file")
    p.add_argument('--traces', required=True, help="trace file path")
    p.add_argument('--model', choices=[k.value for k in HypothesisKind], default='hw')
    p.add_argument('--hd-reference', type=_nibble,
                   default=None, help="reference nibble of the Hamming-distance model")
    p.add_argument('--mtd-step', type=_positive_int, default=DEFAULT_MTD_STEP)
    p.add_argument('--nibble', type=int, default=0, choices=range(16), metavar='0..15',
                   help="nibble to plot")
    p.add_argument('--workers', type=_positive_int, default=WORKERS)
    p.add_argument('--json', help="JSON result output path")
    p.add_argument('--csv-prefix', help="prefix of the correlation CSV outputs")
    p.add_argument('--svg', action='store_true', help="also write SVG charts next to the CSVs")

    p = sub.add_parser('metrics', help="S-box energy uniformity (NED/NSD) of both families")
    p.add_argument('--freq-mhz', type=_freq_list, default=[DEFAULT_FREQUENCY_HZ / 1e6])
    p.add_argument('--samples-per-period', type=_samples_per_period, default=DEFAULT_SAMPLES_PER_PERIOD)
    p.add_argument('--out', help="CSV output path")
    p.add_argument('--report', help="JSON report output path")
    return parser


def _check_output(path, flag):
    if path is None:
        return
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise UsageError(f"{flag}: directory does not exist: {directory}")


def _check_input(path, flag):
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise UsageError(f"{flag}: cannot read {path}")


def _run_config(command, **kwargs):
    try:
        return RunConfig(command=command, **kwargs)
    except ValueError as e:
        raise UsageError(str(e))


def cmd_present(args):
    cfg = _run_config('present', key_hex=format_key(args.key),
                      extra={'pt': format_state(args.pt), 'rounds': args.rounds})
    logger.debug("present run %s", cfg.config_hash()[:12])
    if args.targets:
        for j, (x, y) in enumerate(round1_targets(args.pt, args.key)):
            print(f"nibble {j:2d}: sbox_in={x:X} sbox_out={y:X}")
    if args.encrypt or not args.targets:
        print(format_state(present_encrypt(args.pt, args.key, args.rounds)))
    return 0


def cmd_sim_energy(args):
    for path, flag in ((args.out, '--out'), (args.svg, '--svg'), (args.report, '--report')):
        _check_output(path, flag)
    cfg = _run_config('sim-energy', family=args.family, frequencies=args.freq_mhz,
                      output_path=args.out)

    df = energy_sweep(args.freq_mhz)
    columns = {'cmos': ['freq_mhz', 'cmos_pj'],
               'adiabatic-mtj': ['freq_mhz', 'adiabatic_pj']}.get(args.family, list(df.columns))
    print(df[columns].to_string(index=False, float_format=lambda v: f"{v:.4f}"))

    if args.out:
        emit_energy_sweep(df, args.out, svg_path=args.svg)
    elif args.svg:
        write_svg(energy_sweep_figure(df), args.svg)
    if args.report:
        build_report(cfg, {'energy_sweep': df.to_dict(orient='records')}).write(args.report)
    return 0


def cmd_gen_traces(args):
    if len(args.freq_mhz) != 1:
        raise UsageError("--freq-mhz: gen-traces takes a single frequency")
    _check_output(args.out, '--out')
    _check_output(args.csv, '--csv')
    key = args.key if args.key is not None else random_key(args.seed)
    cfg = _run_config('gen-traces', family=args.family, frequencies=args.freq_mhz,
                      trace_count=args.traces, key_hex=format_key(key), seed=args.seed,
                      noise_sigma=args.noise_sigma, output_path=args.out,
                      samples_per_period=args.samples_per_period)

    family = family_cfg(args.family, frequency_hz=args.freq_mhz[0] * 1e6,
                        samples_per_period=args.samples_per_period)
    ts = gen_trace_set(args.traces, key, family, seed=args.seed, noise_sigma=args.noise_sigma,
                       include_key=not args.blind)
    write_trace_file(ts, args.out)
    if args.csv:
        export_csv(ts, args.csv)
    print(ts.describe())
    logger.debug("gen-traces run %s", cfg.config_hash()[:12])
    return 0


def cmd_cpa(args):
    _check_input(args.traces, '--traces')
    _check_output(args.json, '--json')
    if args.csv_prefix:
        _check_output(args.csv_prefix, '--csv-prefix')
    kind = HypothesisKind(args.model)
    try:
        model = HypothesisModel(kind=kind, reference=args.hd_reference)
    except ValueError as e:
        raise UsageError(f"--hd-reference: {e}")
    cfg = _run_config('cpa', input_path=args.traces, output_path=args.json,
                      extra={'model': args.model, 'mtd_step': args.mtd_step})

    ts = read_trace_file(args.traces)
    result = cpa_full(ts, model=model, workers=args.workers)
    evolution = None
    if ts.key is not None:
        evolution = prefix_evolution(ts, step=args.mtd_step, model=model)
        result.mtd = mtd(ts, step=args.mtd_step, model=model, evolution=evolution)
    elif args.csv_prefix:
        evolution = guess_evolution(ts, step=args.mtd_step, model=model)

    print(f"traces: {len(ts)}")
    print(f"recovered round key: {format_state(result.recovered_roundkey)}")
    if result.success is not None:
        print(f"success={str(result.success).lower()} "
              f"({result.correct_nibbles}/16 nibbles correct)")
        print(f"mtd: {result.mtd if result.mtd is not None else 'not found'}")

    if args.json:
        build_report(cfg, result.to_dict()).write(args.json)
    if args.csv_prefix:
        emit_cpa_plots(result, args.csv_prefix, nibble_idx=args.nibble, evolution=evolution,
                       svg=args.svg)
    return 0


def cmd_metrics(args):
    if len(args.freq_mhz) != 1:
        raise UsageError("--freq-mhz: metrics takes a single frequency")
    _check_output(args.out, '--out')
    _check_output(args.report, '--report')
    cfg = _run_config('metrics', frequencies=args.freq_mhz, output_path=args.out,
                      samples_per_period=args.samples_per_period)

    df = compare_sbox_uniformity(frequency_hz=args.freq_mhz[0] * 1e6,
                                 samples_per_period=args.samples_per_period)
    print(df.to_string(index=False, float_format=lambda v: f"{v:.4g}"))
    if args.out:
        df.to_csv(args.out, index=False, float_format='%.6g', lineterminator='\n')
    if args.report:
        build_report(cfg, {'sbox_uniformity': df.to_dict(orient='records')}).write(args.report)
    return 0


COMMAND_HANDLERS = {
    'present': cmd_present,
    'sim-energy': cmd_sim_energy,
    'gen-traces': cmd_gen_traces,
    'cpa': cmd_cpa,
    'metrics': cmd_metrics,
}


def run(argv=None):
    """Parse argv, run the sub-command and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    setup_logging(args.log_level)
    try:
        return COMMAND_HANDLERS[args.command](args)
    except UsageError as e:
        print(f"{TOOL_NAME}: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.error("%s failed: %s", args.command, e)
        logger.debug("traceback", exc_info=True)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
