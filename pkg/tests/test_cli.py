import json
import subprocess
import sys

import pytest

from flowtopo.cli import main


def run(args):
    return main([str(a) for a in args])


@pytest.fixture()
def small_flow_csv(tmp_path):
    out = tmp_path / "flows.csv"
    rc = run(["synth", "--out", out, "--n-clients", 4, "--n-servers", 2,
              "--duration", 7200, "--seed", 5, "--scan-window", 12])
    assert rc == 0
    return out


class TestSynth:
    def test_writes_flow_csv(self, tmp_path):
        out = tmp_path / "f.csv"
        assert run(["synth", "--out", out, "--duration", 600]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sTime,eTime,sIP,dIP,sPort,dPort,flags"
        assert len(lines) > 1

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["--duration", 1200, "--seed", 3, "--scan-window", 1]
        assert run(["synth", "--out", a] + args) == 0
        assert run(["synth", "--out", b] + args) == 0
        assert a.read_bytes() == b.read_bytes()


class TestPipeline:
    def test_ingest_features_detect(self, tmp_path, small_flow_csv):
        sessions = tmp_path / "sessions.csv"
        feats = tmp_path / "features.csv"
        reports = tmp_path / "reports.jsonl"
        assert run(["ingest", "--in", small_flow_csv, "--out", sessions]) == 0
        assert sessions.read_text().startswith("window_start,client_ip")

        assert run(["features", "--in", sessions, "--out", feats]) == 0
        header = feats.read_text().splitlines()[0]
        assert header.startswith("window_start,n_records,")

        assert run(["detect", "--in", feats, "--out", reports,
                    "--capacity", 8]) == 0
        lines = reports.read_text().splitlines()
        assert len(lines) == 24 - 8
        for line in lines:
            parsed = json.loads(line)
            assert list(parsed) == ["window_start", "score", "threshold",
                                    "anomalous", "attribution"]

    def test_detect_rerun_byte_identical(self, tmp_path, small_flow_csv):
        sessions = tmp_path / "s.csv"
        feats = tmp_path / "f.csv"
        run(["ingest", "--in", small_flow_csv, "--out", sessions])
        run(["features", "--in", sessions, "--out", feats])
        r1, r2 = tmp_path / "r1.jsonl", tmp_path / "r2.jsonl"
        assert run(["detect", "--in", feats, "--out", r1, "--capacity", 8]) == 0
        assert run(["detect", "--in", feats, "--out", r2, "--capacity", 8]) == 0
        assert r1.read_bytes() == r2.read_bytes()

    def test_topo_columns(self, tmp_path, small_flow_csv):
        sessions = tmp_path / "s.csv"
        topo = tmp_path / "t.csv"
        run(["ingest", "--in", small_flow_csv, "--out", sessions])
        assert run(["topo", "--in", sessions, "--out", topo]) == 0
        lines = topo.read_text().splitlines()
        assert lines[0] == ("window_start,n_vertices,n_edges,max_vertex_degree,"
                            "max_edge_size,mean_edge_size,max_support_multiplicity,"
                            "max_ecp_in_degree,max_ecp_out_degree,rbs_beta0,rbs_beta1")
        assert len(lines) == 1 + 24
        # scan window (index 12) has a much larger in-degree than the rest
        rows = [ln.split(",") for ln in lines[1:]]
        in_deg = [int(r[7]) for r in rows]
        assert in_deg[12] == max(in_deg)
        assert in_deg[12] > 3 * max(d for i, d in enumerate(in_deg) if i != 12)


class TestPh:
    def test_unit_square_golden(self, tmp_path):
        cloud = tmp_path / "cloud.csv"
        cloud.write_text("0,0\n1,0\n1,1\n0,1\n")
        out = tmp_path / "diagram.csv"
        assert run(["ph", "--in", cloud, "--out", out, "--max-eps", 2,
                    "--max-dim", 1]) == 0
        assert out.read_text() == (
            "dim,birth,death\n"
            "0,0,1\n0,0,1\n0,0,1\n0,0,inf\n"
            "1,1,1.4142135623730951\n")

    def test_non_numeric_line(self, tmp_path, capsys):
        cloud = tmp_path / "cloud.csv"
        cloud.write_text("0,0\nfoo,1\n")
        rc = run(["ph", "--in", cloud, "--out", tmp_path / "d.csv"])
        assert rc == 1
        assert "line 2" in capsys.readouterr().err


class TestAutoencoderCommands:
    def test_train_and_denoise(self, tmp_path, small_flow_csv):
        sessions = tmp_path / "s.csv"
        feats = tmp_path / "f.csv"
        run(["ingest", "--in", small_flow_csv, "--out", sessions])
        run(["features", "--in", sessions, "--out", feats])
        model = tmp_path / "model.txt"
        assert run(["train-ae", "--in", feats, "--out", model,
                    "--epochs", 150, "--seed", 1]) == 0
        model_text = model.read_text()
        assert model_text.startswith("mlp-v1\n")
        assert "nan" not in model_text and "inf" not in model_text

        cleaned = tmp_path / "cleaned.csv"
        assert run(["denoise", "--in", feats, "--out", cleaned,
                    "--model", model]) == 0
        feat_lines = feats.read_text().splitlines()
        clean_lines = cleaned.read_text().splitlines()
        assert clean_lines[0] == feat_lines[0]
        assert len(clean_lines) == len(feat_lines)
        # window_start column rides through unchanged
        for f_ln, c_ln in zip(feat_lines[1:], clean_lines[1:]):
            assert f_ln.split(",")[0] == c_ln.split(",")[0]
        # reconstructions on raw rows beat the constant column-mean predictor
        import numpy as np
        raw = np.array([[float(v) for v in ln.split(",")[1:]]
                        for ln in feat_lines[1:]])
        out = np.array([[float(v) for v in ln.split(",")[1:]]
                        for ln in clean_lines[1:]])
        assert np.isfinite(out).all()
        mse_model = np.mean((raw - out) ** 2)
        mse_mean = np.mean((raw - raw.mean(axis=0)) ** 2)
        assert mse_model < 0.8 * mse_mean


class TestConfigAndErrors:
    def test_config_file_applies(self, tmp_path, small_flow_csv):
        cfgfile = tmp_path / "det.cfg"
        cfgfile.write_text("window_width = 600.0\nfeatures = n_records\n")
        sessions = tmp_path / "s.csv"
        feats = tmp_path / "f.csv"
        assert run(["ingest", "--in", small_flow_csv, "--out", sessions,
                    "--config", cfgfile]) == 0
        assert run(["features", "--in", sessions, "--out", feats,
                    "--config", cfgfile]) == 0
        lines = feats.read_text().splitlines()
        assert lines[0] == "window_start,n_records"
        assert len(lines) == 1 + 12  # 7200 / 600

    def test_flag_overrides_config(self, tmp_path, small_flow_csv):
        cfgfile = tmp_path / "det.cfg"
        cfgfile.write_text("window_width = 600.0\n")
        sessions = tmp_path / "s.csv"
        assert run(["ingest", "--in", small_flow_csv, "--out", sessions,
                    "--config", cfgfile, "--window-width", 300]) == 0
        starts = {ln.split(",")[0] for ln in sessions.read_text().splitlines()[1:]}
        assert "300" in starts

    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as e:
            run(["synth", "--out", tmp_path / "x", "--bogus"])
        assert e.value.code == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as e:
            run([])
        assert e.value.code == 2

    def test_missing_input_reports_once(self, tmp_path, capsys):
        rc = run(["ingest", "--in", tmp_path / "nope.csv", "--out", tmp_path / "o"])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("flowtopo ingest:")
        assert err.count("\n") == 1

    def test_bad_config_reported(self, tmp_path, capsys):
        cfgfile = tmp_path / "det.cfg"
        cfgfile.write_text("nonsense = 5\n")
        cloud = tmp_path / "cloud.csv"
        cloud.write_text("0,0\n1,0\n")
        rc = run(["ph", "--in", cloud, "--out", tmp_path / "d.csv",
                  "--config", cfgfile])
        assert rc == 1
        assert "unknown key" in capsys.readouterr().err

    def test_failed_run_leaves_no_output(self, tmp_path):
        cloud = tmp_path / "cloud.csv"
        cloud.write_text("0,0\nbad,1\n")
        out = tmp_path / "d.csv"
        assert run(["ph", "--in", cloud, "--out", out]) == 1
        assert not out.exists()


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "flowtopo", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        for cmd in ("synth", "ingest", "features", "topo", "ph", "detect",
                    "train-ae", "denoise"):
            assert cmd in proc.stdout
