"""Smoke test for the gravchan extension module and CLI summaries.

Usage:
    cargo build --release -p gravchan-py -p gravchan-cli
    python3 python/smoke_test.py

If `gravchan` is not importable (no `maturin develop`), the freshly built
shared library under target/ is loaded instead.
"""

import importlib.util
import json
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    try:
        import gravchan  # noqa: F401

        return gravchan
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libgravchan.so"
        if lib.exists():
            staging = pathlib.Path(tempfile.mkdtemp(prefix="gravchan-py-"))
            target = staging / "gravchan.so"
            shutil.copy(lib, target)
            spec = importlib.util.spec_from_file_location("gravchan", target)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("gravchan not importable and no libgravchan.so under target/; build it first")


def close(a, b, tol=1e-12):
    return abs(a - b) < tol


def check_module(g):
    h = math.sqrt(0.5)

    bell = g.make_channel(g.ChannelSpec.bell())
    prepared = g.prepare_bell()
    assert close(prepared.fidelity(bell), 1.0)
    state, residual = g.prepare_pair()
    assert residual < 1e-12 and close(state.norm(), 1.0)
    amps = prepared.amplitudes()
    assert close(amps["ge;+0"], h) and close(amps["eg;+0"], h)

    params = g.InterferometerParams()
    for d in (0.0, math.pi / 2, math.pi, 2.3):
        out = g.run_transfer(g.ChannelSpec.bell(), params, 0, d)
        assert close(out.p_joint_g, (1 + math.cos(d)) / 4)
        assert close(out.p_joint_g, out.p_closed_form)
        assert close(g.direct_measurement(params, d), (1 + math.cos(d)) / 2)

    a1, a2, b1, b2 = g.composite_coefficients(0.1, 0.2, 0.3, 1.0)
    assert close(abs(a1) ** 2 + abs(a2) ** 2, 1.0)
    assert abs(a1 * b1.conjugate() + a2 * b2.conjugate()) < 1e-12

    probe = g.PureState.basis("g")
    pulsed = g.run_pulse_sequence(probe, params, 0.7)
    composite = g.apply_composite(probe, params, 0.7)
    assert close(pulsed.fidelity(composite), 1.0)

    grid = [2 * math.pi * j / 16 for j in range(16)]
    mix = g.fringe_scan(g.ChannelSpec.classical_mixture(), grid)
    ent = g.fringe_scan(g.ChannelSpec.bell(), grid)
    assert all(close(m.p_joint_g, e.p_joint_g) for m, e in zip(mix, ent))

    cat = g.ChannelSpec.cat(3)
    assert cat.n_atoms == 3
    r0 = g.fringe_scan(cat, grid, remote_atom=0)
    r1 = g.fringe_scan(cat, grid, remote_atom=1)
    assert all(close(x.p_joint_g, y.p_joint_g) for x, y in zip(r0, r1))

    general = g.ChannelSpec.general(0.6, 0.8j)
    assert close(general.remote_ground_weight, 0.36)
    try:
        g.ChannelSpec.general(0.6, 0.9)
    except ValueError:
        pass
    else:
        raise AssertionError("unnormalized channel accepted")

    assert close(g.estimate_phase(0.25, 0.5), math.pi / 2)
    assert close(g.shot_noise_closed_form(10**6, True) / g.shot_noise_closed_form(10**6, False), math.sqrt(2), 1e-15)
    assert g.phase_noise_ratio() == h
    assert close(g.phase_noise_ratio(0.6), math.sqrt(0.6 * 0.8), 1e-15)

    report = g.snr_report(n_atoms=100_000, n_runs=2_000)
    assert close(report["shot_ratio"], math.sqrt(2), 1e-15)
    assert report["channel_reduces_noise"]
    assert abs(report["mc_phase_ratio"][0] / h - 1) < 0.05

    opt = g.optimize_entropy(1e-4)
    assert abs(opt["a_star"] - h) < 1e-3
    assert g.png_ratio_extremum()["a_star"] == h
    print("module: ok")


def check_cli():
    exe = None
    for profile in ("release", "debug"):
        candidate = ROOT / "target" / profile / "gravchan"
        if candidate.exists():
            exe = candidate
            break
    if exe is None:
        print("cli: skipped (binary not built)")
        return
    import jsonschema
    from referencing import Registry, Resource

    docs = ROOT / "docs"
    config_schema = json.loads((docs / "config.schema.json").read_text())
    summary_schema = json.loads((docs / "summary.schema.json").read_text())
    registry = Registry().with_resources(
        [
            (config_schema["$id"], Resource.from_contents(config_schema)),
            (summary_schema["$id"], Resource.from_contents(summary_schema)),
        ]
    )
    validator = jsonschema.Draft202012Validator(summary_schema, registry=registry)
    config_validator = jsonschema.Draft202012Validator(config_schema)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for example in sorted((docs / "examples").glob("*.json")):
            config_validator.validate(json.loads(example.read_text()))
        config = json.loads((docs / "examples" / "full.json").read_text())
        config["noise"]["n_runs"] = 2000
        (tmp / "run.json").write_text(json.dumps(config))
        for command in ("fringe", "noise", "optimize", "prepare"):
            subprocess.run([str(exe), command, "--config", "run.json"], cwd=tmp, check=True, capture_output=True)
            summary = json.loads((tmp / f"{command}_summary.json").read_text())
            validator.validate(summary)
            config_validator.validate(summary["config"])
        for channel in ({"kind": "bell"}, {"kind": "classical_mixture"}, {"kind": "cat", "atoms": 3}):
            (tmp / "prep.json").write_text(json.dumps({"channel": channel, "output": {"summary": "p.json"}}))
            subprocess.run([str(exe), "prepare", "--config", "prep.json"], cwd=tmp, check=True, capture_output=True)
            validator.validate(json.loads((tmp / "p.json").read_text()))
        opt = json.loads((tmp / "optimize_summary.json").read_text())["result"]
        assert abs(opt["a_star_entropy"] - 1 / math.sqrt(2)) < 1e-3
    print("cli summaries: ok")


if __name__ == "__main__":
    check_module(load_module())
    check_cli()
