"""End-to-end CLI behavior: commands, formats, exit codes, determinism."""

import json

import numpy as np
import pytest

from qmchain.cli import main
from qmchain.serialization import matrix_to_json, save_operator


def run(*argv):
    return main([str(a) for a in argv])


def write_state(path, mat):
    save_operator(path, np.asarray(mat, dtype=complex))


@pytest.fixture
def bit_flip_file(tmp_path):
    path = tmp_path / "bitflip.json"
    params = json.dumps({
        "weights": [0.7, 0.3],
        "unitaries": [
            matrix_to_json(np.eye(2)),
            matrix_to_json(np.array([[0, 1], [1, 0]])),
        ],
    })
    assert run("generate", "--kind", "random_unitary", "--params", params,
               "--out", path) == 0
    return path


class TestGenerate:
    @pytest.mark.parametrize("kind,params", [
        ("identity", {"dim": 3}),
        ("unitary", {"dim": 2}),
        ("random_unitary", {"dim": 3, "count": 2}),
        ("amplitude_damping", {"gamma": 0.5}),
        ("depolarizing", {"p": 0.3}),
        ("phase_damping", {"lambda": 0.4}),
        ("random_cptp", {"dim": 3, "k": 4}),
        ("random_cptni", {"dim": 2, "k": 2, "shrink": 0.7}),
    ])
    def test_round_trip_through_analyze(self, tmp_path, kind, params):
        channel_path = tmp_path / f"{kind}.json"
        assert run("generate", "--kind", kind, "--params", json.dumps(params),
                   "--seed", 3, "--out", channel_path) == 0
        assert run("analyze", "--channel", channel_path,
                   "--out", tmp_path / "report.json") == 0

    def test_unknown_kind(self, tmp_path):
        assert run("generate", "--kind", "teleport", "--out", tmp_path / "x.json") == 1

    def test_missing_parameter(self, tmp_path):
        assert run("generate", "--kind", "amplitude_damping",
                   "--out", tmp_path / "x.json") == 1

    def test_bad_params_json(self, tmp_path):
        assert run("generate", "--kind", "identity", "--params", "{",
                   "--out", tmp_path / "x.json") == 1


class TestAnalyze:
    def test_bit_flip_report(self, tmp_path, bit_flip_file):
        out = tmp_path / "report.json"
        assert run("analyze", "--channel", bit_flip_file, "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["classification"]["trace_preserving"]
        assert report["classification"]["unital"]
        peripheral = report["spectrum"]["peripheral"]
        assert len(peripheral) == 1
        assert peripheral[0]["multiplicity"] == 2
        np.testing.assert_allclose(peripheral[0]["lambda"], [1.0, 0.0], atol=1e-10)
        assert len(report["attractor"]["entries"]) == 2
        assert report["invariant_state"]["support_dim"] == 2

    def test_rho_route_included_when_supplied(self, tmp_path, bit_flip_file):
        rho_path = tmp_path / "rho.json"
        write_state(rho_path, np.eye(2) / 2)
        out = tmp_path / "report.json"
        assert run("analyze", "--channel", bit_flip_file, "--rho", rho_path,
                   "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["attractor_rho"]["route"] == "rho_formula"

    def test_missing_file(self, tmp_path):
        assert run("analyze", "--channel", tmp_path / "nope.json") == 1

    def test_malformed_channel(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dim": 2}')
        assert run("analyze", "--channel", bad) == 1

    def test_deterministic_reports(self, tmp_path, bit_flip_file):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert run("analyze", "--channel", bit_flip_file, "--out", out1) == 0
        assert run("analyze", "--channel", bit_flip_file, "--out", out2) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_deterministic_generation(self, tmp_path):
        out1, out2 = tmp_path / "c1.json", tmp_path / "c2.json"
        for out in (out1, out2):
            assert run("generate", "--kind", "random_cptp",
                       "--params", '{"dim": 3, "k": 2}', "--seed", 9,
                       "--out", out) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bad_tolerance(self, bit_flip_file):
        assert run("analyze", "--channel", bit_flip_file,
                   "--tol-peripheral", "-1") == 1


class TestEvolve:
    def test_identity_channel_all_distances_zero(self, tmp_path):
        channel = tmp_path / "id.json"
        assert run("generate", "--kind", "identity", "--out", channel) == 0
        state = tmp_path / "x0.json"
        write_state(state, [[0.25, 0.25], [0.25, 0.75]])
        out = tmp_path / "conv.csv"
        assert run("evolve", "--channel", channel, "--state", state,
                   "--ns", "0,1,5,10", "--out", out) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,distance"
        assert len(lines) == 5
        assert all(float(line.split(",")[1]) <= 1e-12 for line in lines[1:])
        states = json.loads((tmp_path / "conv.csv.states.json").read_text())
        assert states["ns"] == [0, 1, 5, 10]
        assert len(states["states"]) == 4

    def test_bit_flip_decay(self, tmp_path, bit_flip_file):
        state = tmp_path / "e11.json"
        write_state(state, [[1, 0], [0, 0]])
        out = tmp_path / "conv.csv"
        assert run("evolve", "--channel", bit_flip_file, "--state", state,
                   "--n", 5, "--out", out) == 0
        _, row = out.read_text().strip().splitlines()
        n, distance = row.split(",")
        assert float(distance) == pytest.approx(0.4**5 / np.sqrt(2), rel=1e-10)

    def test_requires_iteration_counts(self, tmp_path, bit_flip_file):
        state = tmp_path / "x0.json"
        write_state(state, np.eye(2) / 2)
        assert run("evolve", "--channel", bit_flip_file, "--state", state) == 1


class TestVerify:
    def test_bit_flip_passes(self, tmp_path, bit_flip_file):
        out = tmp_path / "verify.json"
        assert run("verify", "--channel", bit_flip_file, "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["passed"]
        assert report["checks"]["dual_biorthonormality"]["passed"]

    def test_amplitude_damping_uses_reduction(self, tmp_path):
        channel = tmp_path / "ad.json"
        assert run("generate", "--kind", "amplitude_damping",
                   "--params", '{"gamma": 0.5}', "--out", channel) == 0
        out = tmp_path / "verify.json"
        assert run("verify", "--channel", channel, "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["passed"]
        assert report["checks"]["recurrent_reduction"]["value"] == 1.0

    def test_non_subinvariant_rho_is_a_usage_error(self, tmp_path):
        channel = tmp_path / "ad.json"
        assert run("generate", "--kind", "amplitude_damping",
                   "--params", '{"gamma": 0.5}', "--out", channel) == 0
        rho = tmp_path / "rho.json"
        write_state(rho, np.eye(2) / 2)
        assert run("verify", "--channel", channel, "--rho", rho) == 1

    def test_non_quantum_channel_is_a_usage_error(self, tmp_path):
        channel = tmp_path / "grow.json"
        mat = matrix_to_json(1.2 * np.eye(2))
        channel.write_text(json.dumps({"dim": 2, "kraus": [mat]}))
        assert run("verify", "--channel", channel) == 1
        assert run("analyze", "--channel", channel) == 1

    def test_theorem_violation_exits_two(self, tmp_path):
        # a slightly trace-increasing map sneaks past a loosened
        # positivity tolerance but breaks the spectral radius bound
        channel = tmp_path / "inflated.json"
        eps = 5e-8
        mat = matrix_to_json(np.sqrt(1 + eps) * np.eye(2))
        channel.write_text(json.dumps({"dim": 2, "kraus": [mat]}))
        assert run("verify", "--channel", channel,
                   "--tol-positivity", "1e-6") == 2


def test_usage_error_exits_one():
    assert run("analyze") == 1
    assert run("frobnicate") == 1
