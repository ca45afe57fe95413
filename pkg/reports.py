"""
CSV tables, SVG charts and JSON run reports.

CSV files are byte-deterministic for a fixed run; SVG files additionally
carry a comment naming the tool version.
"""
import json
import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import plotly.graph_objects as go

from config import FAMILIES, TOOL_NAME, TOOL_VERSION
from present_cipher import nibble

logger = logging.getLogger(__name__)

LAYOUT = dict(
    legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
    template="plotly_white",
    margin=dict(l=40, r=40, t=50, b=40),
)
OTHER_GUESS_COLOR = '#AAAAAA'


@dataclass
class Report:
    """JSON summary of one command-line run"""
    command: str
    results: dict
    config_hash: str
    tool_version: str = TOOL_VERSION
    tool: str = TOOL_NAME
    config: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default)

    def write(self, path):
        with open(path, 'w') as f:
            f.write(self.to_json() + "\n")
        logger.info("Wrote report to %s", path)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def build_report(run_config, results):
    return Report(command=run_config.command, results=results,
                  config_hash=run_config.config_hash(), config=run_config.to_dict())


def version_comment():
    return f"<!-- {TOOL_NAME} {TOOL_VERSION} -->"


def write_svg(fig, path):
    """Render with kaleido and tag the file with the tool version"""
    svg = fig.to_image(format="svg").decode('utf-8')
    if svg.startswith("<?xml"):
        head, _, rest = svg.partition("?>")
        svg = head + "?>" + version_comment() + rest
    else:
        svg = version_comment() + "\n" + svg
    with open(path, 'w') as f:
        f.write(svg)
    logger.info("Wrote chart to %s", path)
    return path


def energy_sweep_figure(df):
    fig = go.Figure()
    for family, column in (('cmos', 'cmos_pj'), ('adiabatic-mtj', 'adiabatic_pj')):
        fig.add_trace(go.Scatter(
            x=df['freq_mhz'],
            y=df[column],
            mode='lines+markers',
            name=FAMILIES[family]['label'],
            line=dict(color=FAMILIES[family]['color']),
            marker=dict(size=6)
        ))
    fig.update_layout(
        title="Energy per cycle of one PRESENT round",
        xaxis_title="Frequency (MHz)",
        yaxis_title="Energy per cycle (pJ)",
        **LAYOUT
    )
    return fig


def emit_energy_sweep(df, path, svg_path=None):
    """CSV of the sweep (freq_mhz, cmos_pj, adiabatic_pj, reduction_pct), optional SVG chart"""
    if len(df) == 0:
        raise ValueError("energy sweep needs at least one frequency")
    df[['freq_mhz', 'cmos_pj', 'adiabatic_pj', 'reduction_pct']].to_csv(
        path, index=False, float_format='%.6g', lineterminator='\n')
    written = [path]
    if svg_path:
        written.append(write_svg(energy_sweep_figure(df), svg_path))
    return written


def correlation_figure(result, nibble_idx=0):
    """|r| against sample index for every guess of one nibble"""
    r = result.per_nibble[nibble_idx]
    true_guess = None
    if result.true_roundkey is not None:
        true_guess = nibble(result.true_roundkey, nibble_idx)
    samples = np.arange(r.corr.shape[1])
    fig = go.Figure()
    # true guess drawn last so it stays on top
    for guess in sorted(range(r.corr.shape[0]), key=lambda g: g == true_guess):
        is_true = guess == true_guess
        fig.add_trace(go.Scatter(
            x=samples,
            y=np.abs(r.corr[guess]),
            mode='lines',
            name=f"key 0x{guess:X}" + (" (true)" if is_true else ""),
            line=dict(color=FAMILIES['cmos']['color'] if is_true else OTHER_GUESS_COLOR,
                      width=2 if is_true else 1),
            showlegend=is_true or true_guess is None,
        ))
    fig.update_layout(
        title=f"Correlation per key guess, nibble {nibble_idx}",
        xaxis_title="Sample",
        yaxis_title="|r|",
        **LAYOUT
    )
    return fig


def evolution_figure(evolution, nibble_idx=0):
    """Peak |r| against the number of traces: true vs best wrong guess, or every guess when blind"""
    rows = evolution[evolution['nibble'] == nibble_idx]
    fig = go.Figure()
    if 'true_peak' in rows:
        fig.add_trace(go.Scatter(x=rows['n_traces'], y=rows['true_peak'], mode='lines+markers',
                                 name="True key", line=dict(color=FAMILIES['cmos']['color'])))
        fig.add_trace(go.Scatter(x=rows['n_traces'], y=rows['best_wrong_peak'], mode='lines+markers',
                                 name="Best wrong key", line=dict(color=OTHER_GUESS_COLOR, dash='dash')))
    else:
        for guess, per_guess in rows.groupby('guess'):
            fig.add_trace(go.Scatter(x=per_guess['n_traces'], y=per_guess['peak_abs_corr'],
                                     mode='lines', name=f"key 0x{guess:X}",
                                     line=dict(color=OTHER_GUESS_COLOR, width=1)))
    fig.update_layout(
        title=f"Peak correlation against traces, nibble {nibble_idx}",
        xaxis_title="Traces",
        yaxis_title="max |r|",
        **LAYOUT
    )
    return fig


def emit_cpa_plots(result, prefix, nibble_idx=0, evolution=None, svg=False):
    """
    Correlation CSV (16 guesses × n_samples rows) for one nibble, the prefix
    evolution CSV when given (prefix_evolution, or guess_evolution for a
    blind set), and the matching SVG charts on request.
    """
    if not result.per_nibble:
        raise ValueError("CPA result is empty")
    written = []
    corr_csv = f"{prefix}_corr_nibble{nibble_idx}.csv"
    result.correlation_frame(nibble_idx).to_csv(corr_csv, index=False, float_format='%.9g',
                                                lineterminator='\n')
    written.append(corr_csv)
    if svg:
        written.append(write_svg(correlation_figure(result, nibble_idx),
                                 f"{prefix}_corr_nibble{nibble_idx}.svg"))
    if evolution is not None:
        evo_csv = f"{prefix}_evolution.csv"
        evolution.to_csv(evo_csv, index=False, float_format='%.9g', lineterminator='\n')
        written.append(evo_csv)
        if svg:
            written.append(write_svg(evolution_figure(evolution, nibble_idx),
                                     f"{prefix}_evolution_nibble{nibble_idx}.svg"))
    logger.info("Wrote %s", ", ".join(os.path.basename(p) for p in written))
    return written
