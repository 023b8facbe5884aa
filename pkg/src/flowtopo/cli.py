"""Command-line pipeline: synth -> ingest -> features -> detect, plus stage tools.

Every subcommand is deterministic given its inputs, flags and seed; outputs
are built in memory and written in one shot, so failures leave no partial
files behind.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import autoencoder, detector, flows, hypergraph, persistence, synth, topology
from .flows import fmt


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text().splitlines()


def _load_config(args) -> dict:
    cfg = dict(detector.DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(detector.parse_config(Path(args.config).read_text()))
    for key in ("capacity", "window_width", "max_eps", "max_dim", "quantile"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _cmd_synth(args) -> None:
    profile = synth.TrafficProfile(
        n_clients=args.n_clients, n_servers=args.n_servers,
        mean_flows=args.mean_flows, duration=args.duration,
        window_width=args.window_width or detector.DEFAULTS["window_width"],
        seed=args.seed if args.seed is not None else 7)
    records = synth.generate_normal(profile)
    for w_idx in args.scan_window or []:
        lo, hi = (int(p) for p in args.scan_ports.split(":"))
        scan = synth.ScanSpec(scanner_ip=args.scanner_ip,
                              target_ip=args.target_ip or profile.server_ip(0),
                              port_range=(lo, hi), window_index=w_idx)
        records = synth.inject_scan(records, scan, profile)
    Path(args.out).write_text(flows.serialize_flows(records))


def _cmd_ingest(args) -> None:
    cfg = _load_config(args)
    records = flows.parse_flows(_read_lines(args.input))
    sessions = flows.pair_bidirectional(records)
    windows = flows.window(sessions, width=cfg["window_width"], origin=args.origin)
    Path(args.out).write_text(flows.serialize_windowed_sessions(windows))


def _windows_from_csv(path: str, width: float):
    return flows.parse_windowed_sessions(_read_lines(path), width=width)


def _cmd_features(args) -> None:
    cfg = _load_config(args)
    names = tuple(cfg["features"])
    windows = _windows_from_csv(args.input, cfg["window_width"])
    lines = ["window_start," + ",".join(names)]
    for w in windows:
        v = detector.summarize_window(w, features=names)
        lines.append(fmt(v.window_start) + "," + ",".join(fmt(x) for x in v.values))
    Path(args.out).write_text("\n".join(lines) + "\n")


def _cmd_topo(args) -> None:
    cfg = _load_config(args)
    windows = _windows_from_csv(args.input, cfg["window_width"])
    cols = ("window_start", "n_vertices", "n_edges", "max_vertex_degree",
            "max_edge_size", "mean_edge_size", "max_support_multiplicity",
            "max_ecp_in_degree", "max_ecp_out_degree", "rbs_beta0", "rbs_beta1")
    lines = [",".join(cols)]
    for w in windows:
        h = hypergraph.build_hypergraph(w)
        st = hypergraph.stats(h)
        ecp = topology.build_ecp(h)
        rbs = topology.order_complex(ecp, max_dim=2)
        b0, b1 = topology.betti(rbs, 1) if rbs.count(0) else (0, 0)
        lines.append(",".join([
            fmt(w.start), str(st.n_vertices), str(st.n_edges),
            str(st.max_vertex_degree), str(st.max_edge_size),
            fmt(st.mean_edge_size), str(st.max_support_multiplicity),
            str(ecp.max_in_degree()), str(ecp.max_out_degree()),
            str(b0), str(b1)]))
    Path(args.out).write_text("\n".join(lines) + "\n")


def _cmd_ph(args) -> None:
    cfg = _load_config(args)
    points = []
    for lineno, line in enumerate(_read_lines(args.input), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            points.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ValueError(f"point cloud line {lineno}: not numeric: {line!r}") from None
    filtration = persistence.vietoris_rips(points, max_eps=cfg["max_eps"],
                                           max_dim=cfg["max_dim"])
    diagram = persistence.barcode(filtration).restrict(cfg["max_dim"])
    Path(args.out).write_text(persistence.diagram_to_csv(diagram))


def _parse_feature_csv(path: str):
    lines = _read_lines(path)
    if not lines:
        raise ValueError("feature CSV is empty")
    header = lines[0].split(",")
    if header[0] != "window_start":
        raise ValueError("feature CSV must start with a window_start column")
    names = tuple(header[1:])
    vectors = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        vectors.append(detector.FeatureVector(
            window_start=float(parts[0]),
            values=tuple(float(v) for v in parts[1:])))
    return names, vectors


def _cmd_detect(args) -> None:
    cfg = _load_config(args)
    names, vectors = _parse_feature_csv(args.input)
    reports = detector.run_detector(vectors, capacity=cfg["capacity"],
                                    max_eps=cfg["max_eps"], max_dim=cfg["max_dim"],
                                    quantile=cfg["quantile"], features=names)
    Path(args.out).write_text("".join(r.to_json() + "\n" for r in reports))


def _cmd_train_ae(args) -> None:
    import numpy as np

    _, vectors = _parse_feature_csv(args.input)
    if not vectors:
        raise ValueError("no feature vectors to train on")
    data = np.array([v.values for v in vectors], dtype=float)
    d = data.shape[1]
    bottleneck = args.bottleneck if args.bottleneck is not None else max(1, d // 2)
    hidden = args.hidden if args.hidden is not None else max(2 * d, 8)
    cfg = autoencoder.TrainConfig(learning_rate=args.lr, momentum=args.momentum,
                                  batch_size=args.batch_size, epochs=args.epochs,
                                  seed=args.seed if args.seed is not None else 0)
    # train on standardized features (raw count scales blow up the descent),
    # then fold the affine scaling into the outer layers so the saved model
    # maps raw rows to raw rows
    mean = data.mean(axis=0)
    std = data.std(axis=0)
    std[std == 0.0] = 1.0
    model, _ = autoencoder.train_autoencoder((data - mean) / std,
                                             (d, hidden, bottleneck, hidden, d), cfg)
    model.weights[0] = model.weights[0] / std[None, :]
    model.biases[0] = model.biases[0] - model.weights[0] @ mean
    model.weights[-1] = std[:, None] * model.weights[-1]
    model.biases[-1] = std * model.biases[-1] + mean
    model.save(args.out)


def _cmd_denoise(args) -> None:
    model = autoencoder.Mlp.load(args.model)
    names, vectors = _parse_feature_csv(args.input)
    lines = ["window_start," + ",".join(names)]
    for v in vectors:
        cleaned = model.denoise(list(v.values))
        lines.append(fmt(v.window_start) + "," + ",".join(fmt(x) for x in cleaned))
    Path(args.out).write_text("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowtopo",
        description="Topological anomaly detection pipeline for netflow logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--in", dest="input", required=True, help="input file")
        p.add_argument("--out", required=True, help="output file")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--window-width", dest="window_width", type=float)
        p.add_argument("--max-eps", dest="max_eps", type=float)
        p.add_argument("--max-dim", dest="max_dim", type=int)
        p.add_argument("--capacity", type=int)
        p.add_argument("--quantile", type=float)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("synth", help="generate synthetic flow CSV")
    common(p, needs_input=False)
    p.add_argument("--n-clients", type=int, default=12)
    p.add_argument("--n-servers", type=int, default=3)
    p.add_argument("--mean-flows", type=float, default=3.0)
    p.add_argument("--duration", type=float, default=18000.0)
    p.add_argument("--scan-window", type=int, action="append",
                   help="window index to inject a scan into (repeatable)")
    p.add_argument("--scan-ports", default="1:100", help="lo:hi scanned port range")
    p.add_argument("--scanner-ip", default="10.9.9.9")
    p.add_argument("--target-ip", default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="flow CSV -> windowed sessions CSV")
    common(p)
    p.add_argument("--origin", type=float, default=0.0)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("features", help="sessions CSV -> feature vector CSV")
    common(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("topo", help="sessions CSV -> per-window topology stats CSV")
    common(p)
    p.set_defaults(func=_cmd_topo)

    p = sub.add_parser("ph", help="point cloud CSV -> persistence diagram CSV")
    common(p)
    p.set_defaults(func=_cmd_ph)

    p = sub.add_parser("detect", help="feature CSV -> anomaly reports (JSON lines)")
    common(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("train-ae", help="feature CSV -> trained autoencoder model")
    common(p)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--bottleneck", type=int, default=None)
    p.set_defaults(func=_cmd_train_ae)

    p = sub.add_parser("denoise", help="feature CSV -> denoised feature CSV")
    common(p)
    p.add_argument("--model", required=True, help="trained model file")
    p.set_defaults(func=_cmd_denoise)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (OSError, ValueError) as exc:
        print(f"flowtopo {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
