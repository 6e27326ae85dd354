"""CSV emission of streams, trajectories and estimate series.

Layout per stream file: timestamp_s, one column per channel, then one
integer flag column per channel (flag_<channel>). Values are written with
12 significant digits, which round-trips deterministically.
"""

import csv

import numpy as np

from ..models.measurement import MeasurementStream


def _fmt(x) -> str:
    return f"{x:.12g}"


def write_stream(stream: MeasurementStream, path):
    names = stream.channel_names
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_s"] + names + [f"flag_{n}" for n in names])
        for k in range(len(stream)):
            row = [_fmt(stream.times[k])]
            row += [_fmt(stream.channels[n][k]) for n in names]
            row += [str(int(stream.quality[n][k])) for n in names]
            w.writerow(row)


def read_stream(path, name=None, kind="SV") -> MeasurementStream:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    names = [c for c in header[1:] if not c.startswith("flag_")]
    data = np.array([[float(v) for v in row[:1 + len(names)]] for row in rows])
    flags = np.array([[int(v) for v in row[1 + len(names):]] for row in rows],
                     dtype=int)
    channels = {n: data[:, 1 + i] for i, n in enumerate(names)}
    quality = {n: flags[:, i] for i, n in enumerate(names)}
    return MeasurementStream(name or "replay", kind, data[:, 0], channels,
                             quality)


def write_trajectory(traj, path):
    n_alg = traj.algebraic.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["timestamp_s"]
        header += [f"x{i}_{lab}" for i, lab in enumerate(traj.labels)]
        header += [f"v{b}_re" for b in range(n_alg)]
        header += [f"v{b}_im" for b in range(n_alg)]
        w.writerow(header)
        for k in range(len(traj.times)):
            row = [_fmt(traj.times[k])]
            row += [_fmt(v) for v in traj.states[k]]
            row += [_fmt(v) for v in traj.algebraic[k].real]
            row += [_fmt(v) for v in traj.algebraic[k].imag]
            w.writerow(row)


def write_estimates(times, means, chi2, gated, path, labels=None):
    """Estimate series mirroring the stream format plus chi2/gate columns."""
    means = np.atleast_2d(means)
    n = means.shape[1]
    labels = labels or [f"x{i}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_s"] + list(labels) + ["chi2", "gated"])
        for k in range(len(times)):
            row = [_fmt(times[k])]
            row += [_fmt(v) for v in means[k]]
            row.append(_fmt(chi2[k]))
            row.append(";".join(gated[k]) if gated and gated[k] else "")
            w.writerow(row)
