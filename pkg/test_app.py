import json

import pandas as pd
import pytest

from app import build_parser, run

ZERO_KEY = "0" * 20
ZERO_PT = "0" * 16


def test_present_zero_vector(capsys):
    assert run(['present', '--key', ZERO_KEY, '--pt', ZERO_PT]) == 0
    assert capsys.readouterr().out.strip() == "5579C1387B228445"


def test_present_targets(capsys):
    assert run(['present', '--key', ZERO_KEY, '--pt', ZERO_PT, '--targets']) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 16
    assert lines[0] == "nibble  0: sbox_in=0 sbox_out=C"


def test_present_targets_and_ciphertext(capsys):
    assert run(['present', '--key', ZERO_KEY, '--pt', ZERO_PT, '--targets', '--encrypt']) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "5579C1387B228445"


@pytest.mark.parametrize("argv", [
    ['present', '--key', ZERO_KEY, '--pt', ZERO_PT, '--bogus'],
    ['present', '--key', ZERO_KEY],
    ['present', '--key', 'XYZ', '--pt', ZERO_PT],
    ['gen-traces', '--family', 'ecl', '--traces', '4', '--out', 'x.amtj'],
    ['gen-traces', '--family', 'cmos', '--traces', '0', '--out', 'x.amtj'],
    ['gen-traces', '--family', 'cmos', '--traces', '4', '--samples-per-period', '4', '--out', 'x.amtj'],
    ['sim-energy', '--freq-mhz', '5,-1'],
    ['frobnicate'],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_unreadable_trace_file(tmp_path):
    assert run(['cpa', '--traces', str(tmp_path / "missing.amtj")]) == 2


def test_gen_traces_takes_one_frequency(tmp_path):
    out = tmp_path / "t.amtj"
    assert run(['gen-traces', '--family', 'cmos', '--traces', '4', '--freq-mhz', '5,10',
                '--out', str(out)]) == 2
    assert not out.exists()


def test_output_directory_must_exist(tmp_path):
    out = tmp_path / "nowhere" / "t.amtj"
    assert run(['gen-traces', '--family', 'cmos', '--traces', '4', '--out', str(out)]) == 2


def test_hd_model_needs_reference(tmp_path, capsys):
    out = tmp_path / "t.amtj"
    assert run(['gen-traces', '--family', 'cmos', '--traces', '8', '--out', str(out)]) == 0
    assert run(['cpa', '--traces', str(out), '--model', 'hd']) == 2


def test_adiabatic_pipeline(tmp_path, capsys):
    out = tmp_path / "adiabatic.amtj"
    assert run(['gen-traces', '--family', 'adiabatic-mtj', '--traces', '100', '--seed', '3',
                '--out', str(out)]) == 0
    assert "100 traces" in capsys.readouterr().out
    assert run(['cpa', '--traces', str(out)]) == 0
    printed = capsys.readouterr().out
    assert "traces: 100" in printed
    assert "success=false" in printed
    assert "mtd: not found" in printed


def test_cmos_pipeline_with_outputs(tmp_path, capsys):
    traces = tmp_path / "cmos.amtj"
    assert run(['gen-traces', '--family', 'cmos', '--traces', '256', '--key', '0123456789ABCDEF0123',
                '--csv', str(tmp_path / "cmos.csv"), '--out', str(traces)]) == 0
    report = tmp_path / "cpa.json"
    assert run(['cpa', '--traces', str(traces), '--json', str(report), '--mtd-step', '64',
                '--nibble', '3', '--csv-prefix', str(tmp_path / "cmos")]) == 0
    printed = capsys.readouterr().out
    assert "success=true (16/16 nibbles correct)" in printed

    data = json.loads(report.read_text())
    assert data['command'] == "cpa"
    assert len(data['config_hash']) == 64
    assert data['results']['success'] is True
    assert data['results']['mtd'] is not None
    assert (tmp_path / "cmos_corr_nibble3.csv").exists()
    assert (tmp_path / "cmos_evolution.csv").exists()
    assert len(pd.read_csv(tmp_path / "cmos.csv", skiprows=1)) == 256


def test_blind_pipeline(tmp_path, capsys):
    traces = tmp_path / "blind.amtj"
    assert run(['gen-traces', '--family', 'cmos', '--traces', '64', '--blind', '--out', str(traces)]) == 0
    assert "key withheld" in capsys.readouterr().out
    assert run(['cpa', '--traces', str(traces)]) == 0
    printed = capsys.readouterr().out
    assert "recovered round key" in printed
    assert "success" not in printed
    assert run(['cpa', '--traces', str(traces), '--csv-prefix', str(tmp_path / "blind"), '--mtd-step', '32']) == 0
    evolution = pd.read_csv(tmp_path / "blind_evolution.csv")
    assert sorted(evolution['n_traces'].unique()) == [32, 64]
    assert len(evolution) == 2 * 16 * 16


def test_corrupt_trace_file(tmp_path):
    bad = tmp_path / "bad.amtj"
    bad.write_bytes(b"NOT A TRACE FILE AT ALL")
    assert run(['cpa', '--traces', str(bad)]) == 1


def test_sim_energy_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert run(['sim-energy', '--family', 'cmos', '--freq-mhz', '5,10,12.5,25,50', '--out', str(out)]) == 0
    df = pd.read_csv(out)
    assert len(df) == 5
    assert df['freq_mhz'].tolist() == [5.0, 10.0, 12.5, 25.0, 50.0]
    assert "adiabatic_pj" not in capsys.readouterr().out


def test_sim_energy_report(tmp_path):
    report = tmp_path / "energy.json"
    assert run(['sim-energy', '--freq-mhz', '12.5', '--report', str(report)]) == 0
    data = json.loads(report.read_text())
    assert 'config_hash' in data
    assert len(data['results']['energy_sweep']) == 1


def test_metrics(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    assert run(['metrics', '--out', str(out)]) == 0
    assert len(pd.read_csv(out)) == 2
    assert "Adiabatic-MTJ" in capsys.readouterr().out


def test_parser_defaults():
    args = build_parser().parse_args(['cpa', '--traces', 'x.amtj'])
    assert args.model == 'hw'
    assert args.mtd_step == 128
    assert args.hd_reference is None
